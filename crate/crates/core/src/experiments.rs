//! Signing sweeps on random cubic graphs: nodal-surplus distributions,
//! their distance to a Gaussian, critical-point census and band edges.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::atlas::{self, eigenpair_defect, support_block, triangle_closes, AtlasError, Extremum};
use crate::graph::{enumerate_supports_3regular, partition_for_support, whole_partition, Graph, GraphError};
use crate::linalg::{eig_herm, symmetric_inertia, HermMatrix, RMat};
use crate::magnetic::{
    assemble, eigenpair, enumerate_signings, hessian_matrix, signings_over, BaseMatrix, MagneticError, MagneticPoint,
    Signing, DEFAULT_SIGNING_CAP,
};
use crate::oracles::{self, CandidateKind, OracleError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("a 3-regular graph needs an even number n >= 4 of vertices, got {0}")]
    BadOrder(usize),
    #[error("no simple connected 3-regular graph found in {0} pairings")]
    Exhausted(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Magnetic(#[from] MagneticError),
    #[error(transparent)]
    Atlas(#[from] AtlasError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Simple connected 3-regular graph from the pairing model with rejection.
pub fn random_3regular(n: usize, seed: u64) -> Result<Graph, ExperimentError> {
    if n < 4 || n % 2 == 1 {
        return Err(ExperimentError::BadOrder(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..3 * n).map(|p| p / 3).collect();
    const TRIES: usize = 100_000;
    'outer: for _ in 0..TRIES {
        points.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(3 * n / 2);
        for pair in points.chunks(2) {
            let (r, s) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if r == s || edges.contains(&(r, s)) {
                continue 'outer;
            }
            edges.push((r, s));
        }
        match Graph::new(n, &edges) {
            Ok(g) => return Ok(g),
            Err(GraphError::Disconnected { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(ExperimentError::Exhausted(TRIES))
}

/// Nodal-surplus histogram of one eigenvalue label over all signings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurplusDistribution {
    pub k: usize,
    /// `counts[sigma]` for `sigma = 0..=beta`.
    pub counts: Vec<u64>,
    /// Signings where `lambda_k` was multiple or its eigenvector vanished somewhere.
    pub skipped: u64,
    /// Surpluses outside `0..=beta`; nonzero only if the nodal bound fails.
    pub out_of_range: u64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Kolmogorov-Smirnov distance of the standardized surplus to `N(0, 1)`;
    /// `None` when `std = 0`.
    pub ks_distance: Option<f64>,
}

impl SurplusDistribution {
    pub fn from_counts(k: usize, counts: Vec<u64>, skipped: u64) -> Self {
        let total: u64 = counts.iter().sum();
        let (mean, std) = if total == 0 {
            (f64::NAN, 0.0)
        } else {
            let t = total as f64;
            let mean = counts.iter().enumerate().map(|(s, &c)| s as f64 * c as f64).sum::<f64>() / t;
            let var = counts.iter().enumerate().map(|(s, &c)| (s as f64 - mean).powi(2) * c as f64).sum::<f64>() / t;
            (mean, var.sqrt())
        };
        let ks_distance = (std > 0.0).then(|| ks_to_normal(&counts, mean, std));
        Self { k, counts, skipped, out_of_range: 0, mean, std, ks_distance }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Standard normal CDF through `erfc`, accurate in the tails too.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup_x |F(x) - Phi(x)|` for the standardized histogram. Both sides are
/// monotone and `Phi` is continuous, so the supremum is reached at an atom,
/// from one side or the other.
pub fn ks_to_normal(counts: &[u64], mean: f64, std: f64) -> f64 {
    let total: u64 = counts.iter().sum();
    let mut below = 0u64;
    let mut sup = 0.0f64;
    for (s, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let phi = normal_cdf((s as f64 - mean) / std);
        let left = below as f64 / total as f64;
        below += c;
        let right = below as f64 / total as f64;
        sup = sup.max((phi - left).abs()).max((right - phi).abs());
    }
    sup
}

#[derive(Debug, Clone, Serialize)]
pub struct SurplusSweep {
    pub n: usize,
    pub beta: usize,
    pub distributions: Vec<SurplusDistribution>,
}

impl SurplusSweep {
    pub fn tallied(&self) -> u64 {
        self.distributions.iter().map(SurplusDistribution::total).sum()
    }

    pub fn skipped(&self) -> u64 {
        self.distributions.iter().map(|d| d.skipped).sum()
    }

    pub fn out_of_range(&self) -> u64 {
        self.distributions.iter().map(|d| d.out_of_range).sum()
    }

    /// Largest KS distance over labels with a nondegenerate distribution.
    pub fn max_ks(&self) -> Option<f64> {
        self.distributions.iter().filter_map(|d| d.ks_distance).reduce(f64::max)
    }
}

fn signed_real(h: &BaseMatrix, s: &Signing) -> RMat {
    let mut m = h.matrix().clone();
    for (&(r, t), &minus) in s.free_edges().iter().zip(s.minus()) {
        if minus {
            m[(r, t)] = -m[(r, t)];
            m[(t, r)] = -m[(t, r)];
        }
    }
    m
}

/// Surplus histogram per label over all `2^beta` signings.
pub fn surplus_sweep(h: &BaseMatrix) -> Result<SurplusSweep, ExperimentError> {
    let g = h.graph();
    let (n, beta) = (g.n(), g.betti());
    let signings = enumerate_signings(h)?;
    let per: Vec<Vec<Option<isize>>> = signings
        .par_iter()
        .map(|s| -> Result<Vec<Option<isize>>, ExperimentError> {
            let m = signed_real(h, s);
            let sys = eig_herm(&HermMatrix::from_real(&m).map_err(MagneticError::from)?).map_err(MagneticError::from)?;
            Ok((0..n)
                .map(|k| {
                    if eigenpair_defect(&sys, k).is_some() {
                        return None;
                    }
                    let psi: Vec<f64> = (0..n).map(|r| sys.vectors[(r, k)].re).collect();
                    let nodal = g.edges().iter().filter(|&&(r, t)| m[(r, t)] * psi[r] * psi[t] > 0.0).count();
                    Some(nodal as isize - k as isize)
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    let mut counts = vec![vec![0u64; beta + 1]; n];
    let mut skipped = vec![0u64; n];
    let mut outside = vec![0u64; n];
    for row in &per {
        for (k, v) in row.iter().enumerate() {
            match *v {
                Some(sigma) if (0..=beta as isize).contains(&sigma) => counts[k][sigma as usize] += 1,
                Some(_) => outside[k] += 1,
                None => skipped[k] += 1,
            }
        }
    }
    let distributions = counts
        .into_iter()
        .zip(skipped)
        .zip(outside)
        .enumerate()
        .map(|(k, ((c, s), o))| SurplusDistribution { out_of_range: o, ..SurplusDistribution::from_counts(k + 1, c, s) })
        .collect();
    Ok(SurplusSweep { n, beta, distributions })
}

/// Per-sweep maximum over labels of the KS distance.
pub fn ks_report(sweeps: &[SurplusSweep]) -> Vec<Option<f64>> {
    sweeps.iter().map(SurplusSweep::max_ks).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpCensus {
    pub n: usize,
    pub beta: usize,
    pub supports: usize,
    /// Number of critical points by the size of the zero set `n - |V_N|`.
    pub buckets: BTreeMap<usize, u64>,
    /// Critical data dropped because the eigenpair was not generic.
    pub skipped: u64,
}

impl CpCensus {
    pub fn total(&self) -> u64 {
        self.buckets.values().sum()
    }
}

/// Critical points of all eigenvalues of a cubic `h`, bucketed by zero-set size.
pub fn cp_census(h: &BaseMatrix) -> Result<CpCensus, ExperimentError> {
    let g = h.graph();
    let supports = enumerate_supports_3regular(g)?;
    let per: Vec<(usize, u64, u64)> = supports
        .par_iter()
        .map(|v_n| -> Result<_, ExperimentError> {
            let p = partition_for_support(g, v_n)?;
            let z = g.n() - v_n.len();
            let (mut points, mut skipped) = (0u64, 0u64);
            for s in signings_over(&p.free_nn, DEFAULT_SIGNING_CAP)? {
                let block = support_block(h, v_n, &s);
                let sys = eig_herm(&HermMatrix::from_real(&block).map_err(MagneticError::from)?)
                    .map_err(MagneticError::from)?;
                for k in 0..sys.dim() {
                    if eigenpair_defect(&sys, k).is_some() {
                        skipped += 1;
                        continue;
                    }
                    let mut psi = vec![0.0; g.n()];
                    for (i, &v) in v_n.as_slice().iter().enumerate() {
                        psi[v] = sys.vectors[(i, k)].re;
                    }
                    let closes = p.v_zn.as_slice().iter().all(|&r| {
                        let b: Vec<f64> = p.zn_links(g, r).iter().map(|&t| (h.entry(r, t) * psi[t]).abs()).collect();
                        triangle_closes(&b)
                    });
                    if closes {
                        points += 1u64 << z;
                    }
                }
            }
            Ok((z, points, skipped))
        })
        .collect::<Result<_, _>>()?;
    let mut buckets = BTreeMap::new();
    let mut skipped = 0;
    for (z, pts, sk) in per {
        if pts > 0 {
            *buckets.entry(z).or_insert(0) += pts;
        }
        skipped += sk;
    }
    Ok(CpCensus { n: g.n(), beta: g.betti(), supports: supports.len(), buckets, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessSource {
    Signing,
    CriticalSet,
    Grid,
}

#[derive(Debug, Clone)]
pub struct BandWitness {
    pub value: f64,
    /// In the whole-graph gauge.
    pub point: MagneticPoint,
    pub source: WitnessSource,
    pub extremum: Extremum,
}

#[derive(Debug, Clone)]
pub struct Band {
    pub k: usize,
    pub min: BandWitness,
    pub max: BandWitness,
}

#[derive(Debug, Clone)]
pub struct BandReport {
    pub bands: Vec<Band>,
    /// `max(0, min_{k+1} - max_k)` for consecutive labels.
    pub gaps: Vec<f64>,
}

impl BandReport {
    pub fn to_json(&self) -> serde_json::Value {
        let w = |b: &BandWitness| {
            serde_json::json!({
                "value": b.value,
                "point": b.point.to_json_map(),
                "source": b.source,
                "extremum": b.extremum,
            })
        };
        let bands: Vec<_> =
            self.bands.iter().map(|b| serde_json::json!({"k": b.k, "min": w(&b.min), "max": w(&b.max)})).collect();
        serde_json::json!({"bands": bands, "gaps": self.gaps})
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandMode {
    /// Torus grid plus refined critical points; needs `beta <= 4`.
    Grid { resolution: usize },
    /// Signings and sampled critical sets of every support.
    Atlas { samples: usize, seed: u64 },
}

/// Min/max/saddle of a smooth point from the full Hessian on the torus.
fn hessian_type(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Extremum {
    match hessian_matrix(h, p, k).map(|m| symmetric_inertia(&m)) {
        Ok(Ok(i)) if i.n_minus == 0 => Extremum::Min,
        Ok(Ok(i)) if i.n_plus == 0 => Extremum::Max,
        Ok(Ok(_)) => Extremum::Saddle,
        _ => Extremum::NotApplicable,
    }
}

fn lambda_k(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Option<f64> {
    let m = assemble(h, p).ok()?;
    let sys = eig_herm(&m).ok()?;
    Some(sys.values[k - 1])
}

/// Range of every eigenvalue over the torus with a witness for each end.
pub fn band_edges(h: &BaseMatrix, mode: BandMode) -> Result<BandReport, ExperimentError> {
    let g = h.graph();
    let n = g.n();
    let whole = whole_partition(g);
    let mut pool: Vec<Vec<BandWitness>> = vec![Vec::new(); n];
    for s in enumerate_signings(h)? {
        let p = s.to_point();
        for (k, list) in pool.iter_mut().enumerate() {
            if let Some(v) = lambda_k(h, &p, k + 1) {
                list.push(BandWitness { value: v, point: p.clone(), source: WitnessSource::Signing, extremum: Extremum::NotApplicable });
            }
        }
    }
    match mode {
        BandMode::Grid { resolution } => {
            let beta = whole.free_edges().len();
            if beta > 4 {
                return Err(OracleError::TooLarge { n, beta }.into());
            }
            let free = whole.free_edges();
            let cells = resolution.pow(beta as u32);
            let grid: Vec<(MagneticPoint, Vec<f64>)> = (0..cells)
                .into_par_iter()
                .filter_map(|mut i| {
                    let mut a = vec![0.0; beta];
                    for slot in a.iter_mut().rev() {
                        *slot = TAU * (i % resolution) as f64 / resolution as f64;
                        i /= resolution;
                    }
                    let p = MagneticPoint::new(free.clone(), a);
                    let sys = eig_herm(&assemble(h, &p).ok()?).ok()?;
                    Some((p, sys.values))
                })
                .collect();
            for (p, vals) in grid {
                for (k, list) in pool.iter_mut().enumerate() {
                    list.push(BandWitness { value: vals[k], point: p.clone(), source: WitnessSource::Grid, extremum: Extremum::NotApplicable });
                }
            }
            for (k, list) in pool.iter_mut().enumerate() {
                let found = oracles::grid_search_critical(h, k + 1, resolution, 1e-8)?;
                for c in found.candidates.iter().filter(|c| c.kind != CandidateKind::Nonsmooth) {
                    if let Some(v) = lambda_k(h, &c.point, k + 1) {
                        list.push(BandWitness { value: v, point: c.point.clone(), source: WitnessSource::CriticalSet, extremum: Extremum::NotApplicable });
                    }
                }
            }
        }
        BandMode::Atlas { samples, seed } => {
            for data in atlas::enumerate_critical_data(h)? {
                if data.v_n.len() == n {
                    continue;
                }
                let rep = atlas::build_manifold(h, &data, samples, seed)?;
                for s in rep.samples.iter().filter(|s| s.simple) {
                    let p = s.point.in_gauge(g, &whole)?;
                    pool[s.k - 1].push(BandWitness { value: data.lambda, point: p, source: WitnessSource::CriticalSet, extremum: s.extremum });
                }
            }
        }
    }
    let mut bands = Vec::with_capacity(n);
    for (k, list) in pool.into_iter().enumerate() {
        let pick = |better: fn(f64, f64) -> bool| {
            list.iter().fold(None::<&BandWitness>, |best, w| match best {
                Some(b) if !better(w.value, b.value) => Some(b),
                _ => Some(w),
            })
        };
        let (Some(lo), Some(hi)) = (pick(|a, b| a < b), pick(|a, b| a > b)) else {
            continue;
        };
        let classify = |w: &BandWitness| {
            let mut w = w.clone();
            if w.extremum == Extremum::NotApplicable && eigenpair(&assemble(h, &w.point).expect("own point"), k + 1).is_ok() {
                w.extremum = hessian_type(h, &w.point, k + 1);
            }
            w
        };
        bands.push(Band { k: k + 1, min: classify(lo), max: classify(hi) });
    }
    let gaps = bands.windows(2).map(|w| (w[1].min.value - w[0].max.value).max(0.0)).collect();
    Ok(BandReport { bands, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn k4_is_the_only_cubic_graph_on_four_vertices() {
        let g = random_3regular(4, 9).unwrap();
        assert_eq!(g.edges(), fixtures::complete(4).edges());
    }

    #[test]
    fn odd_order_rejected() {
        assert_eq!(random_3regular(7, 0), Err(ExperimentError::BadOrder(7)));
    }

    #[test]
    fn tree_sweep_has_no_surplus() {
        let h = fixtures::default_matrix(fixtures::path(6));
        let s = surplus_sweep(&h).unwrap();
        assert_eq!(s.beta, 0);
        for d in &s.distributions {
            assert_eq!(d.counts, vec![1]);
            assert_eq!(d.ks_distance, None);
        }
    }

    #[test]
    fn ks_of_two_point_mass() {
        // standardized atoms at -1 and 1, half the mass each
        let ks = ks_to_normal(&[1, 1], 0.5, 0.5);
        // Phi(1) to 17 digits
        let phi = 1.0 - 0.841_344_746_068_542_9;
        assert!((ks - (0.5 - phi)).abs() < 1e-15);
    }
}
