//! End-to-end acceptance checks, one line per criterion.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::*;
use magcrit::atlas::{
    build_manifold, construct_existence_instance, count_3regular_points, critical_data_for, enumerate_critical_data,
    stability_probe, ExistenceBlocks, ManifoldReport,
};
use magcrit::experiments::{cp_census, ks_report, random_3regular, surplus_sweep};
use magcrit::fixtures::{self, IndexJump, Multiplicity};
use magcrit::graph::{spanning_tree_count, whole_partition, Graph, VertexSet};
use magcrit::linalg::{
    eig_herm, haynsworth_inertia, inertia, pseudoinverse, real_part_form_inertia, CMat, HermMatrix, RMat, C64,
};
use magcrit::linkage::{classify, jacobian_min_singular, sample_points, LinkageSpec};
use magcrit::magnetic::{
    assemble, circle_distance, eigenpair, hessian, hessian_blocks, is_critical, BaseMatrix, MagneticPoint,
};
use magcrit::oracles::{exhaustive_small_verify, fd_hessian, fd_inertia, grid_search_critical, CandidateKind, HESSIAN_STEP};
use magcrit::tol;
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn index_jump() -> (BaseMatrix, ManifoldReport) {
    let h = IndexJump::matrix();
    let data = critical_data_for(&h, &IndexJump::support(), 0, 1).unwrap();
    let rep = build_manifold(&h, &data, 32, 7).unwrap();
    (h, rep)
}

/// `det(h_a)` on the residual triangle as a function of its flux.
fn residual_det(h: &BaseMatrix, rep: &ManifoldReport, a3: f64) -> f64 {
    let m = assemble(h, &IndexJump::point(1.0, a3)).unwrap();
    eig_herm(&m.principal(rep.partition.v_zz.as_slice())).unwrap().values.iter().product()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (h, rep) = index_jump();
    check!(rep.nonempty && rep.dim == 1 && rep.components == 2, "topology {} {} {}", rep.nonempty, rep.dim, rep.components);
    let t = 2.0 * PI / 3.0;
    for s in &rep.samples {
        let a = s.point.angles();
        let on = circle_distance(a[0], -a[1]) < 1e-6 && circle_distance(a[0], t).min(circle_distance(a[0], -t)) < 1e-6;
        check!(on, "sample off the circles: {a:?}");
    }
    for sign in [1.0, -1.0] {
        for (a3, want) in [(0.0, 2), (PI, 0)] {
            let p = IndexJump::point(sign, a3);
            let s = rep.evaluate_point(&h, &p).unwrap();
            check!(s.morse_index == Some(want), "formula index {:?} at a3 = {a3}", s.morse_index);
            let fd = fd_inertia(&fd_hessian(&h, &p, IndexJump::K, HESSIAN_STEP, true).unwrap());
            check!(fd.n_minus == want as usize && fd.n_zero == 1, "FD inertia {fd} at a3 = {a3}");
        }
    }
    // bisection on the residual determinant over (0, pi)
    let (mut lo, mut hi) = (0.0, PI);
    let f_lo = residual_det(&h, &rep, lo);
    check!(f_lo * residual_det(&h, &rep, hi) < 0.0, "no sign change of the residual determinant");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if residual_det(&h, &rep, mid) * f_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    check!((root - IndexJump::critical_flux()).abs() < 1e-6, "root {root}");
    for (a3, want) in [(root - 1e-4, 2), (root + 1e-4, 0), (-root + 1e-4, 2), (-root - 1e-4, 0)] {
        let s = rep.evaluate_point(&h, &IndexJump::point(1.0, a3)).unwrap();
        check!(s.morse_index == Some(want), "index {:?} at a3 = {a3}", s.morse_index);
    }
    let at = rep.evaluate_point(&h, &IndexJump::point(1.0, root)).unwrap();
    check!(at.zz_resonant && at.morse_index.is_none(), "no resonance at the root");
    let secs = start.elapsed().as_secs_f64();
    check!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("two circles at a1 = -a2 = +-2pi/3, index 2 / 0, switch at a3 = {root:.9} ({secs:.2} s)"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let h = Multiplicity::matrix(3.0);
    let values = eig_herm(&assemble(&h, &Multiplicity::double_point()).unwrap()).unwrap().values;
    check!(values[0].abs() < 1e-8 && (values[1] - values[0]) < 1e-8, "lowest pair {:?}", &values[..2]);
    let data = critical_data_for(&h, &Multiplicity::support(), 0, 1).unwrap();
    let rep = build_manifold(&h, &data, 200, 2).unwrap();
    check!(rep.dim == 1 && rep.components == 1, "topology {} {}", rep.dim, rep.components);
    let s = rep.evaluate_point(&h, &Multiplicity::double_point()).unwrap();
    check!(!s.simple, "double point reported simple");
    let labels: Vec<usize> = rep.samples.iter().filter(|s| s.simple).map(|s| s.k).collect();
    check!(labels.iter().all(|&k| k == 1 || k == 2), "labels {labels:?}");
    let ones = labels.iter().filter(|&&k| k == 1).count();
    check!(ones > 0 && ones < labels.len(), "only one label seen");
    let secs = start.elapsed().as_secs_f64();
    check!(secs < 5.0, "took {secs:.2} s");
    Ok(format!("gap {:.1e}; {ones} samples with label 1, {} with label 2 ({secs:.2} s)", values[1] - values[0], labels.len() - ones))
}

/// Oriented edge-incidence vector of a closed walk.
fn cycle_vector(g: &Graph, walk: &[(usize, usize)]) -> Vec<f64> {
    let mut v = vec![0.0; g.num_edges()];
    for &(a, b) in walk {
        v[g.edge_index(a, b).unwrap()] += if a < b { 1.0 } else { -1.0 };
    }
    v
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = r.random_range(3..=10);
        let beta = r.random_range(1..=4usize).min((n - 1) * (n - 2) / 2);
        let g = random_connected_graph(&mut r, n, beta);
        let h = BaseMatrix::standard_laplacian(g.clone());
        let whole = whole_partition(&g);
        let free = whole.free_edges();
        let p = MagneticPoint::new(free.clone(), vec![0.0; free.len()]);
        let h_free = hessian(&h, &p, 1).unwrap();
        let cycles: Vec<Vec<f64>> = free.iter().map(|&e| cycle_vector(&g, &whole.tree.fundamental_cycle(e))).collect();
        let gram = RMat::from_fn(free.len(), free.len(), |i, j| cycles[i].iter().zip(&cycles[j]).map(|(a, b)| a * b).sum());
        // unit-norm eigenvector: the Hessian carries a factor 2/n against the unnormalized one
        let det = gram.matmul(&h_free).matmul(&gram).scaled(n as f64 / 2.0).determinant();
        let tau = spanning_tree_count(&g) as f64;
        let rel = (det - tau).abs() / tau;
        worst = worst.max(rel);
        check!(rel < 1e-6, "det {det} vs {tau} trees on {:?}", g.edges());
    }
    Ok(format!("20 graphs, worst relative error {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut checks = 0;
    for _ in 0..20 {
        let n = r.random_range(4..=8);
        let beta = r.random_range(1..=3);
        let h = random_instance(&mut r, n, beta);
        let rep = exhaustive_small_verify(&h).unwrap();
        check!(rep.pass(), "{:?} {:?}", rep.mismatches, rep.genericity_failures);
        check!(rep.checks.len() == n << h.graph().betti(), "{} checks", rep.checks.len());
        checks += rep.checks.len();
    }
    Ok(format!("{checks} signing/label pairs, FD index = surplus, nullity 0"))
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let g = fixtures::flower(3, 3);
    let h = random_generic_matrix(&mut r, &g);
    let sweep = surplus_sweep(&h).unwrap();
    check!(sweep.beta == 3, "beta {}", sweep.beta);
    for d in &sweep.distributions {
        check!(d.counts == [1, 3, 3, 1] && d.skipped == 0, "k = {}: {:?}", d.k, d.counts);
    }
    let mut signings = 0;
    for k in 1..=h.n() {
        let res = grid_search_critical(&h, k, 12, 1e-8).unwrap();
        let off = res.off_signing().count();
        check!(off == 0, "k = {k}: {off} critical points off the signings");
        signings += res.candidates.iter().filter(|c| c.kind == CandidateKind::Signing).count();
    }
    Ok(format!("Bin(3, 1/2) for all {} labels; grid search found {signings} signing points and nothing else", h.n()))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let (mut on_sets, mut total) = (0, 0);
    for _ in 0..10 {
        let n = r.random_range(4..=6);
        let beta = r.random_range(1..=3);
        let h = random_instance(&mut r, n, beta);
        let reports: Vec<ManifoldReport> = enumerate_critical_data(&h)
            .unwrap()
            .iter()
            .filter(|d| d.v_n.len() < n)
            .map(|d| build_manifold(&h, d, 8, 6).unwrap())
            .collect();
        for k in 1..=n {
            let mut res = grid_search_critical(&h, k, 10, 1e-8).unwrap();
            res.match_reports(&h, &reports, 1e-4).unwrap();
            for c in &res.candidates {
                if c.kind == CandidateKind::Nonsmooth || c.gap <= tol::SIMPLE_GAP_REL {
                    continue;
                }
                total += 1;
                check!(c.gradient_norm <= 1e-8, "candidate gradient {}", c.gradient_norm);
                check!(c.kind != CandidateKind::Unmatched, "unmatched critical point {:?} of k = {k}", c.point);
                on_sets += usize::from(c.kind == CandidateKind::OnManifold);
            }
        }
    }
    Ok(format!("all {total} simple critical points matched: {} at signings, {on_sets} on critical sets", total - on_sets))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut nonempty = 0;
    for i in 0..200 {
        let d = 3 + i % 4;
        let b = random_lengths(&mut r, d, 0.05);
        let spec = LinkageSpec::new(b.clone()).unwrap();
        let class = classify(&spec).unwrap();
        let (below, above) = mc_closure(&b, 1_000_000, &mut r);
        check!(class.is_nonempty() == (below && above), "classification disagrees with Monte Carlo on {b:?}");
        if class.is_nonempty() {
            nonempty += 1;
            for p in sample_points(&spec, 4, i as u64).unwrap() {
                let s = jacobian_min_singular(&b, &p.thetas);
                check!(s > 1e-8, "rank-deficient differential ({s:.1e}) on {b:?}");
            }
        }
    }
    for _ in 0..40 {
        let b = random_lengths(&mut r, 4, 0.02);
        let class = classify(&LinkageSpec::new(b.clone()).unwrap()).unwrap();
        let sweep = FourBarSweep::new(&b, 20_000);
        check!(class.components() == sweep.components, "components {} vs sweep {} on {b:?}", class.components(), sweep.components);
    }
    Ok(format!("200 length vectors ({nonempty} closable) agree with 1e6-trial Monte Carlo; 40 four-bars match the sweep"))
}

fn random_herm(r: &mut rand_chacha::ChaCha8Rng, values: &[f64]) -> HermMatrix {
    herm_with_spectrum(r, values, None)
}

fn spectrum(r: &mut rand_chacha::ChaCha8Rng, n: usize, zeros: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i < zeros { 0.0 } else { r.random_range(0.1..3.0) * if r.random_bool(0.5) { 1.0 } else { -1.0 } })
        .collect()
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    for _ in 0..500 {
        let (p, q) = (r.random_range(1..5), r.random_range(1..6));
        let kdim = r.random_range(0..3usize).min(q);
        let dvals = spectrum(&mut r, q, kdim);
        let u = random_unitary(&mut r, q, None);
        let dmat = CMat::from_fn(q, q, |i, j| C64::new(if i == j { dvals[i] } else { 0.0 }, 0.0));
        let d = HermMatrix::symmetrize(u.matmul(&dmat).matmul(&u.adjoint()));
        let proj = CMat::from_fn(q, q, |i, j| C64::new(if i == j && i >= kdim { 1.0 } else { 0.0 }, 0.0));
        let b = random_cmat(&mut r, p, q).matmul(&u.matmul(&proj).matmul(&u.adjoint()));
        let a = HermMatrix::symmetrize({
            let x = random_cmat(&mut r, p, p);
            x.add(&x.adjoint())
        });
        let check = haynsworth_inertia(&a, &b, &d).unwrap();
        check!(check.holds(), "Haynsworth: {check:?}");
    }
    for _ in 0..500 {
        let n = r.random_range(1..9);
        let zeros = r.random_range(0..4usize).min(n);
        let values = spectrum(&mut r, n, zeros);
        let a = random_herm(&mut r, &values);
        let x = pseudoinverse(&a).unwrap();
        let (ia, ix) = (inertia(&a, 0.0).unwrap(), inertia(&x, 0.0).unwrap());
        check!(ia == ix && ia.n_zero == zeros, "pseudoinverse: {ia} vs {ix}");
    }
    for _ in 0..500 {
        let n = r.random_range(1..6);
        let zeros = r.random_range(0..3usize).min(n);
        let values = spectrum(&mut r, n, zeros);
        let h = random_herm(&mut r, &values);
        let m = 2 * n + r.random_range(0..4);
        let rep = real_part_form_inertia(&h, &random_cmat(&mut r, n, m)).unwrap();
        check!(rep.holds(), "real part form: {rep:?}");
    }
    Ok("500 instances each: Haynsworth, pseudoinverse inertia, real-part form".into())
}

fn criterion_9() -> Outcome {
    let mut buckets = Vec::new();
    for (n, seed) in [(10, 1), (12, 2), (16, 3)] {
        let g = random_3regular(n, seed).unwrap();
        let h = fixtures::default_matrix(g);
        let census = cp_census(&h).unwrap();
        let want = (n as u64) << (n / 2 + 1);
        check!(census.buckets.get(&0) == Some(&want), "n = {n}: bucket 0 {:?}, want {want}", census.buckets.get(&0));
        buckets.push(want);
    }
    let mut data_checked = 0;
    for seed in 0..3 {
        let g = random_3regular(10, seed).unwrap();
        let h = fixtures::default_matrix(g);
        for d in enumerate_critical_data(&h).unwrap() {
            let rep = build_manifold(&h, &d, 1, seed).unwrap();
            let want = count_3regular_points(&h, &d).unwrap();
            check!(rep.samples.len() as u64 == want, "{} samples vs {want} points", rep.samples.len());
            data_checked += 1;
        }
    }
    Ok(format!("bucket 0 = {buckets:?} for n = 10, 12, 16; {data_checked} critical data match the point count"))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut sweeps = Vec::new();
    for n in [10, 14] {
        for seed in 0..3 {
            let h = fixtures::default_matrix(random_3regular(n, seed).unwrap());
            let s = surplus_sweep(&h).unwrap();
            check!(s.out_of_range() == 0, "surplus outside 0..=beta");
            check!(s.tallied() + s.skipped() == (n as u64) << s.beta, "totals {} + {}", s.tallied(), s.skipped());
            sweeps.push(s);
        }
    }
    let ks = ks_report(&sweeps);
    check!(ks.iter().all(Option::is_some), "missing KS values");
    // control: disjoint cycles give exactly Bin(6, 1/2)
    let control = random_generic_matrix(&mut rng(10), &fixtures::cycle_chain(6, 3));
    let s = surplus_sweep(&control).unwrap();
    let want = binomial_ks(6);
    for d in &s.distributions {
        check!(d.counts == binomial(6), "control k = {}: {:?}", d.k, d.counts);
        let got = d.ks_distance.unwrap();
        check!((got - want).abs() < 1e-12, "control KS {got} vs {want}");
    }
    let secs = start.elapsed().as_secs_f64();
    check!(secs < 600.0, "took {secs:.1} s");
    let shown: Vec<String> = ks.iter().map(|k| format!("{:.4}", k.unwrap())).collect();
    Ok(format!("max KS per graph [{}]; control Bin(6, 1/2) KS {want:.6} ({secs:.2} s)", shown.join(", ")))
}

fn criterion_11() -> Outcome {
    let mut r = rng(11);
    let g = fixtures::complete(4);
    let v_n = VertexSet::from_one_based(&[1, 2, 3]);
    let mut h_n = RMat::zeros(3, 3);
    for a in 0..3 {
        h_n[(a, a)] = r.random_range(-2.0..2.0);
        for b in a + 1..3 {
            h_n[(a, b)] = r.random_range(0.5..1.5);
            h_n[(b, a)] = h_n[(a, b)];
        }
    }
    let mut h_zn = RMat::zeros(1, 1);
    h_zn[(0, 0)] = 5.0;
    let blocks = ExistenceBlocks { h_n, h_zn, h_zz: RMat::zeros(0, 0), k_n: 2 };
    let inst = construct_existence_instance(&g, &v_n, &blocks, 0.5, 11).map_err(|e| e.to_string())?;
    check!(inst.k == inst.k_n + inst.k_zn + inst.k_zz, "label {} vs {}", inst.k, inst.k_n + inst.k_zn + inst.k_zz);
    let crit = is_critical(&inst.h, &inst.point, inst.k).unwrap();
    check!(crit.critical, "not critical: residual {}", crit.residual);
    let ep = eigenpair(&assemble(&inst.h, &inst.point).unwrap(), inst.k).unwrap();
    let support: Vec<usize> = (0..4).filter(|&v| ep.psi[v].norm() > tol::SUPPORT_ZERO).collect();
    check!(support == [0, 1, 2], "support {support:?}");
    let part = magcrit::graph::partition_for_support(&g, &v_n).unwrap();
    let blocks = hessian_blocks(&inst.h, &inst.point, inst.k, &part).unwrap();
    check!(blocks.consistent(&part), "Hessian blocks {blocks:?}");

    let (h, rep) = index_jump();
    let probe = stability_probe(&h, &rep, 1e-3, 10, 11);
    check!(probe.pass, "stability probe failed: {:?}", probe.trials);
    Ok(format!("K4 instance critical for k = {} at epsilon {:.3}; 10 perturbations of size 1e-3 keep (dim, components)", inst.k, inst.epsilon))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &i.to_string()) {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {i}: PASS ({secs:.1} s) {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {i}: FAIL ({secs:.1} s) {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
