use std::f64::consts::PI;

use magcrit::atlas::{build_manifold, check_genericity, critical_data_for, enumerate_critical_data, ManifoldReport, CSV_HEADER};
use magcrit::experiments::{self, BandMode, SurplusSweep};
use magcrit::fixtures::{self, IndexJump, Multiplicity};
use magcrit::graph::{spanning_tree_count, whole_partition, Graph};
use magcrit::linalg::{eig_herm, RMat};
use magcrit::magnetic::{assemble, circle_distance, hessian, BaseMatrix, MagneticPoint};
use magcrit::oracles::{fd_hessian, fd_inertia, grid_search_critical, CandidateKind, HESSIAN_STEP};
use serde::Serialize;
use serde_json::{json, Value};

use crate::Genericity;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    VerificationFailed(String),
    NotGeneric(String),
}

pub struct Outcome {
    pub json: Value,
    /// Header first.
    pub csv: Vec<String>,
    pub verdict: Verdict,
}

/// snake_case name of a unit enum variant.
fn tag<T: Serialize>(t: &T) -> String {
    serde_json::to_value(t).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn genericity_gate(h: &BaseMatrix, opts: &Genericity) -> (Value, Verdict) {
    if opts.no_genericity_check {
        return (Value::Null, Verdict::Pass);
    }
    let rep = check_genericity(h, opts.budget);
    let verdict = if rep.pass {
        Verdict::Pass
    } else {
        Verdict::NotGeneric(format!("{} failures, first: {}", rep.failure_count, rep.failures.first().map_or("", String::as_str)))
    };
    (serde_json::to_value(&rep).unwrap_or(Value::Null), verdict)
}

fn reports(h: &BaseMatrix, samples: usize, seed: u64, skip_whole: bool) -> anyhow::Result<Vec<ManifoldReport>> {
    let mut out = Vec::new();
    for d in enumerate_critical_data(h)? {
        if skip_whole && d.v_n.len() == h.n() {
            continue;
        }
        out.push(build_manifold(h, &d, samples, seed)?);
    }
    Ok(out)
}

pub fn atlas(h: &BaseMatrix, gen: &Genericity, samples: usize, seed: u64, tol: Option<f64>) -> anyhow::Result<Outcome> {
    let (genericity, verdict) = genericity_gate(h, gen);
    if verdict != Verdict::Pass {
        return Ok(Outcome { json: json!({"genericity": genericity}), csv: vec![CSV_HEADER.into()], verdict });
    }
    let reps = reports(h, samples, seed, false)?;
    let limit = tol.unwrap_or_else(|| h.critical_tol());
    let mut verdict = Verdict::Pass;
    let worst = reps
        .iter()
        .flat_map(|r| r.samples.iter())
        .filter(|s| s.simple)
        .map(|s| s.critical_residual)
        .fold(0.0, f64::max);
    if worst > limit {
        verdict = Verdict::VerificationFailed(format!("critical residual {worst:.3e} exceeds {limit:.3e}"));
    }
    let mut csv = vec![CSV_HEADER.to_string()];
    csv.extend(reps.iter().map(ManifoldReport::csv_row));
    let json = json!({
        "n": h.n(),
        "beta": h.graph().betti(),
        "genericity": genericity,
        "max_critical_residual": worst,
        "critical_sets": reps.iter().map(ManifoldReport::to_json).collect::<Vec<_>>(),
    });
    Ok(Outcome { json, csv, verdict })
}

pub struct GridOptions {
    pub k: Option<usize>,
    pub resolution: usize,
    pub match_dist: f64,
    pub samples: usize,
    pub tol: f64,
}

pub fn grid_search(h: &BaseMatrix, gen: &Genericity, opts: &GridOptions, seed: u64) -> anyhow::Result<Outcome> {
    let header = "k,kind,gradient_norm,gap,iterations,angles".to_string();
    let (genericity, verdict) = genericity_gate(h, gen);
    if verdict != Verdict::Pass {
        return Ok(Outcome { json: json!({"genericity": genericity}), csv: vec![header], verdict });
    }
    let reps = reports(h, opts.samples, seed, true)?;
    let labels: Vec<usize> = match opts.k {
        Some(k) => vec![k],
        None => (1..=h.n()).collect(),
    };
    let (mut results, mut csv, mut unmatched) = (Vec::new(), vec![header], 0);
    for k in labels {
        let mut res = grid_search_critical(h, k, opts.resolution, opts.tol)?;
        res.match_reports(h, &reps, opts.match_dist)?;
        for c in &res.candidates {
            if c.kind == CandidateKind::Unmatched {
                unmatched += 1;
            }
            let angles: Vec<String> = c.point.angles().iter().map(|a| format!("{a:.12}")).collect();
            csv.push(format!("{k},{},{:.3e},{:.6e},{},{}", tag(&c.kind), c.gradient_norm, c.gap, c.iterations, angles.join(" ")));
        }
        results.push(res.to_json());
    }
    let verdict = if unmatched > 0 {
        Verdict::VerificationFailed(format!("{unmatched} critical points match no signing or critical set"))
    } else {
        Verdict::Pass
    };
    Ok(Outcome { json: json!({"genericity": genericity, "unmatched": unmatched, "labels": results}), csv, verdict })
}

fn sweep_verdict(sweep: &SurplusSweep) -> Verdict {
    let expected = (sweep.n as u64) << sweep.beta;
    let seen = sweep.tallied() + sweep.skipped() + sweep.out_of_range();
    if sweep.out_of_range() > 0 {
        Verdict::VerificationFailed(format!("{} surpluses outside 0..={}", sweep.out_of_range(), sweep.beta))
    } else if seen != expected {
        Verdict::VerificationFailed(format!("{seen} eigenpairs visited, expected {expected}"))
    } else {
        Verdict::Pass
    }
}

pub fn signings_sweep(h: &BaseMatrix) -> anyhow::Result<Outcome> {
    let sweep = experiments::surplus_sweep(h)?;
    let mut csv = vec!["k,sigma,count".to_string()];
    for d in &sweep.distributions {
        csv.extend(d.counts.iter().enumerate().map(|(s, c)| format!("{},{s},{c}", d.k)));
    }
    let verdict = sweep_verdict(&sweep);
    let json = json!({
        "sweep": sweep,
        "tallied": sweep.tallied(),
        "skipped": sweep.skipped(),
        "max_ks": sweep.max_ks(),
    });
    Ok(Outcome { json, csv, verdict })
}

pub fn ks_report(n: usize, graphs: usize, seed: u64) -> anyhow::Result<Outcome> {
    let mut sweeps = Vec::with_capacity(graphs);
    for i in 0..graphs as u64 {
        let g = experiments::random_3regular(n, seed + i)?;
        sweeps.push(experiments::surplus_sweep(&fixtures::default_matrix(g))?);
    }
    let ks = experiments::ks_report(&sweeps);
    let mut csv = vec!["graph,seed,n,beta,max_ks,skipped,out_of_range".to_string()];
    let mut rows = Vec::new();
    let mut verdict = Verdict::Pass;
    for (i, (s, k)) in sweeps.iter().zip(&ks).enumerate() {
        csv.push(format!("{i},{},{},{},{},{},{}", seed + i as u64, s.n, s.beta, opt(*k), s.skipped(), s.out_of_range()));
        // mean surplus per label, normalized by beta
        let curve: Vec<f64> = s.distributions.iter().map(|d| d.mean / s.beta as f64).collect();
        rows.push(json!({
            "graph": i,
            "seed": seed + i as u64,
            "n": s.n,
            "beta": s.beta,
            "max_ks": k,
            "skipped": s.skipped(),
            "out_of_range": s.out_of_range(),
            "mean_over_beta": curve,
        }));
        if let Verdict::VerificationFailed(why) = sweep_verdict(s) {
            verdict = Verdict::VerificationFailed(format!("graph {i}: {why}"));
        }
    }
    Ok(Outcome { json: json!({"n": n, "graphs": rows}), csv, verdict })
}

pub fn cp_census(h: &BaseMatrix) -> anyhow::Result<Outcome> {
    let census = experiments::cp_census(h)?;
    let mut csv = vec!["zero_set_size,points".to_string()];
    csv.extend(census.buckets.iter().map(|(z, c)| format!("{z},{c}")));
    let expected = (census.n as u64) << census.beta;
    let verdict = match census.buckets.get(&0) {
        Some(&c) if c == expected => Verdict::Pass,
        got => Verdict::VerificationFailed(format!("bucket 0 holds {got:?}, expected {expected}")),
    };
    Ok(Outcome { json: json!({"census": census, "total": census.total()}), csv, verdict })
}

pub fn band_edges(h: &BaseMatrix, mode: BandMode) -> anyhow::Result<Outcome> {
    let rep = experiments::band_edges(h, mode)?;
    let mut csv = vec!["k,min,max,min_source,max_source,min_extremum,max_extremum,gap_above".to_string()];
    for (i, b) in rep.bands.iter().enumerate() {
        csv.push(format!(
            "{},{:.12e},{:.12e},{},{},{},{},{}",
            b.k,
            b.min.value,
            b.max.value,
            tag(&b.min.source),
            tag(&b.max.source),
            tag(&b.min.extremum),
            tag(&b.max.extremum),
            opt(rep.gaps.get(i).map(|g| format!("{g:.12e}"))),
        ));
    }
    Ok(Outcome { json: rep.to_json(), csv, verdict: Verdict::Pass })
}

pub fn gen_3reg(n: usize, seed: u64, with_matrix: bool) -> anyhow::Result<Outcome> {
    let g = experiments::random_3regular(n, seed)?;
    let mut csv = vec!["r,s".to_string()];
    csv.extend(g.edges().iter().map(|&(r, s)| format!("{},{}", r + 1, s + 1)));
    let json = if with_matrix {
        let h = fixtures::default_matrix(g.clone());
        json!({"graph": g.to_json(), "matrix": h.to_json()})
    } else {
        serde_json::to_value(g.to_json())?
    };
    Ok(Outcome { json, csv, verdict: Verdict::Pass })
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn checks_outcome(example: &str, checks: Vec<Check>, extra: Value) -> Outcome {
    let mut csv = vec!["check,pass,detail".to_string()];
    csv.extend(checks.iter().map(|c| format!("{},{},\"{}\"", c.name, c.pass, c.detail.replace('"', "\"\""))));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let verdict = if failed.is_empty() { Verdict::Pass } else { Verdict::VerificationFailed(failed.join(", ")) };
    let list: Vec<_> = checks.iter().map(|c| json!({"check": c.name, "pass": c.pass, "detail": c.detail})).collect();
    Outcome { json: json!({"example": example, "checks": list, "data": extra}), csv, verdict }
}

pub fn example_index_jump(seed: u64) -> anyhow::Result<Outcome> {
    let h = IndexJump::matrix();
    let data = critical_data_for(&h, &IndexJump::support(), 0, 1)?;
    let rep = build_manifold(&h, &data, 32, seed)?;
    let mut checks = Vec::new();
    checks.push(Check {
        name: "topology",
        pass: rep.nonempty && rep.dim == 1 && rep.components == 2,
        detail: format!("dim {}, {} components", rep.dim, rep.components),
    });
    let t = 2.0 * PI / 3.0;
    let off = rep
        .samples
        .iter()
        .filter(|s| {
            let a = s.point.angles();
            circle_distance(a[0], -a[1]) > 1e-6 || circle_distance(a[0], t).min(circle_distance(a[0], -t)) > 1e-6
        })
        .count();
    checks.push(Check { name: "circles", pass: off == 0, detail: format!("{off} of {} samples off a1 = -a2 = +-2pi/3", rep.samples.len()) });
    let mut indices = Vec::new();
    let mut index_ok = true;
    for (a3, want) in [(0.0, 2), (PI, 0)] {
        let p = IndexJump::point(1.0, a3);
        let formula = rep.evaluate_point(&h, &p)?.morse_index;
        let fd = fd_inertia(&fd_hessian(&h, &p, IndexJump::K, HESSIAN_STEP, true)?);
        index_ok &= formula == Some(want) && fd.n_minus == want as usize && fd.n_zero == 1;
        indices.push(json!({"a3": a3, "formula": formula, "fd_minus": fd.n_minus, "fd_zero": fd.n_zero}));
    }
    checks.push(Check { name: "morse_index", pass: index_ok, detail: "index 2 at a3 = 0 and 0 at a3 = pi".into() });
    let det = |a3: f64| -> anyhow::Result<f64> {
        let m = assemble(&h, &IndexJump::point(1.0, a3))?;
        Ok(eig_herm(&m.principal(rep.partition.v_zz.as_slice()))?.values.iter().product())
    };
    let (mut lo, mut hi) = (0.0, PI);
    let f_lo = det(lo)?;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if det(mid)? * f_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let before = rep.evaluate_point(&h, &IndexJump::point(1.0, root - 1e-4))?.morse_index;
    let after = rep.evaluate_point(&h, &IndexJump::point(1.0, root + 1e-4))?.morse_index;
    checks.push(Check {
        name: "index_switch",
        pass: (root - IndexJump::critical_flux()).abs() < 1e-6 && before == Some(2) && after == Some(0),
        detail: format!("residual determinant vanishes at a3 = {root:.9}; index {} -> {}", opt(before), opt(after)),
    });
    Ok(checks_outcome("index-jump", checks, json!({"critical_set": rep.to_json(), "indices": indices, "switch": root})))
}

pub fn example_multiplicity(gamma: f64, seed: u64) -> anyhow::Result<Outcome> {
    let h = Multiplicity::matrix(gamma);
    let values = eig_herm(&assemble(&h, &Multiplicity::double_point())?)?.values;
    let gap = values[1] - values[0];
    let data = critical_data_for(&h, &Multiplicity::support(), 0, 1)?;
    let rep = build_manifold(&h, &data, 200, seed)?;
    let labels: Vec<usize> = rep.samples.iter().filter(|s| s.simple).map(|s| s.k).collect();
    let ones = labels.iter().filter(|&&k| k == 1).count();
    let checks = vec![
        Check { name: "double_eigenvalue", pass: values[0].abs() < 1e-8 && gap < 1e-8, detail: format!("gap {gap:.3e}") },
        Check {
            name: "label_alternates",
            pass: ones > 0 && ones < labels.len() && labels.iter().all(|&k| k == 1 || k == 2),
            detail: format!("{ones} samples with label 1, {} with label 2", labels.len() - ones),
        },
    ];
    Ok(checks_outcome("multiplicity", checks, json!({"spectrum": values, "critical_set": rep.to_json()})))
}

/// Oriented edge-incidence vector of a closed walk.
fn cycle_vector(g: &Graph, walk: &[(usize, usize)]) -> Vec<f64> {
    let mut v = vec![0.0; g.num_edges()];
    for &(a, b) in walk {
        if let Some(e) = g.edge_index(a, b) {
            v[e] += if a < b { 1.0 } else { -1.0 };
        }
    }
    v
}

pub fn example_laplacian(g: Option<Graph>) -> anyhow::Result<Outcome> {
    let g = g.unwrap_or_else(|| fixtures::complete(4));
    let n = g.n();
    let h = BaseMatrix::standard_laplacian(g.clone());
    let whole = whole_partition(&g);
    let free = whole.free_edges();
    let p = MagneticPoint::new(free.clone(), vec![0.0; free.len()]);
    let hess = hessian(&h, &p, 1)?;
    let cycles: Vec<Vec<f64>> = free.iter().map(|&e| cycle_vector(&g, &whole.tree.fundamental_cycle(e))).collect();
    let gram = RMat::from_fn(free.len(), free.len(), |i, j| cycles[i].iter().zip(&cycles[j]).map(|(a, b)| a * b).sum());
    // the Hessian is taken for the unit eigenvector, hence the factor n / 2
    let det = gram.matmul(&hess).matmul(&gram).scaled(n as f64 / 2.0).determinant();
    let tau = spanning_tree_count(&g) as f64;
    let rel = (det - tau).abs() / tau;
    let checks = vec![Check {
        name: "determinant_is_tree_count",
        pass: rel < 1e-6,
        detail: format!("det {det:.9} vs {tau} spanning trees"),
    }];
    Ok(checks_outcome("laplacian", checks, json!({"n": n, "beta": g.betti(), "determinant": det, "spanning_trees": tau})))
}
