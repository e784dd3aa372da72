//! Instances with a prescribed critical point, and perturbation probes of
//! existing critical sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{partition_for_support, Graph, VertexSet};
use crate::linalg::{eig_herm, HermMatrix, RMat};
use crate::linkage;
use crate::magnetic::{assemble, eigenpair, BaseMatrix, MagneticPoint, Signing};
use crate::tol;

use super::{build_manifold, eigenpair_defect, support_block, AtlasError, CriticalData, ManifoldReport};

/// Diagonal blocks of the matrix to construct, indexed by the support, the
/// boundary and the residual vertex sets in increasing order.
#[derive(Debug, Clone)]
pub struct ExistenceBlocks {
    pub h_n: RMat,
    pub h_zn: RMat,
    pub h_zz: RMat,
    /// 1-based label of the eigenvalue of `h_n` to make critical.
    pub k_n: usize,
}

#[derive(Debug, Clone)]
pub struct ExistenceInstance {
    pub h: BaseMatrix,
    pub point: MagneticPoint,
    /// Label of `lambda` in `h_a`, equal to `k_n + k_zn + k_zz`.
    pub k: usize,
    pub lambda: f64,
    /// Coupling scale that was accepted.
    pub epsilon: f64,
    pub k_n: usize,
    pub k_zn: usize,
    pub k_zz: usize,
    /// Largest entry change of the three diagonal blocks against the prescribed ones.
    pub block_deviation: f64,
}

fn check_block(g: &Graph, vs: &[usize], m: &RMat, name: &str) -> Result<(), AtlasError> {
    let k = vs.len();
    if m.rows() != k || m.cols() != k {
        return Err(AtlasError::InvalidData(format!("{name} block is {}x{}, expected {k}x{k}", m.rows(), m.cols())));
    }
    for a in 0..k {
        for b in 0..k {
            if m[(a, b)] != m[(b, a)] {
                return Err(AtlasError::InvalidData(format!("{name} block is not symmetric")));
            }
            if a != b && (m[(a, b)].abs() > tol::STRICT_SUPPORT) != g.has_edge(vs[a], vs[b]) {
                return Err(AtlasError::InvalidData(format!(
                    "{name} block entry ({}, {}) does not match the graph",
                    vs[a] + 1,
                    vs[b] + 1
                )));
            }
        }
    }
    Ok(())
}

fn count_below_checked(m: &RMat, lambda: f64, block: &'static str) -> Result<usize, AtlasError> {
    if m.rows() == 0 {
        return Ok(0);
    }
    let sys = eig_herm(&HermMatrix::from_real(m)?)?;
    let dist = sys.values.iter().map(|v| (v - lambda).abs()).fold(f64::INFINITY, f64::min);
    if dist <= tol::ZZ_RESONANCE_REL * sys.scale().max(tol::scale(lambda.abs())) {
        return Err(AtlasError::SpectralClash { lambda, block });
    }
    Ok(sys.values.iter().filter(|&&v| v < lambda).count())
}

/// Multiplies every entry of `m` by `1 + eta * u`, `u` uniform in `[-1, 1]`,
/// keeping symmetry.
fn jitter(m: &RMat, eta: f64, rng: &mut ChaCha8Rng) -> RMat {
    let mut out = m.clone();
    for a in 0..m.rows() {
        for b in a..m.cols() {
            let f = 1.0 + eta * rng.random_range(-1.0..=1.0);
            out[(a, b)] = m[(a, b)] * f;
            out[(b, a)] = out[(a, b)];
        }
    }
    out
}

struct Couplings {
    /// `H_rs` for boundary-support edges, keyed by the global edge.
    h: Vec<((usize, usize), f64)>,
    /// `B` for boundary-residual edges.
    b: Vec<((usize, usize), f64)>,
}

fn assemble_blocks(
    g: &Graph,
    parts: [&[usize]; 3],
    blocks: [&RMat; 3],
    couplings: &Couplings,
    eps: f64,
) -> RMat {
    let mut m = RMat::zeros(g.n(), g.n());
    for (vs, blk) in parts.iter().zip(blocks) {
        for (a, &r) in vs.iter().enumerate() {
            for (b, &s) in vs.iter().enumerate() {
                m[(r, s)] = blk[(a, b)];
            }
        }
    }
    for &((r, s), v) in couplings.h.iter().chain(&couplings.b) {
        m[(r, s)] = eps * v;
        m[(s, r)] = eps * v;
    }
    m
}

/// Builds `h` close to the prescribed blocks, with weak couplings, together
/// with a critical point of `lambda_{k_n + k_zn + k_zz}` whose eigenvector is
/// supported on `v_n`.
///
/// The couplings are halved from `epsilon` until the label is right, then the
/// nonzero entries are jittered by a relative `1e-6 * epsilon` and the whole
/// construction is redone and re-verified on the jittered blocks.
pub fn construct_existence_instance(
    g: &Graph,
    v_n: &VertexSet,
    blocks: &ExistenceBlocks,
    epsilon: f64,
    seed: u64,
) -> Result<ExistenceInstance, AtlasError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(AtlasError::InvalidData(format!("epsilon must be positive, got {epsilon}")));
    }
    let p = partition_for_support(g, v_n)?;
    let (vn, vzn, vzz) = (p.v_n.as_slice(), p.v_zn.as_slice(), p.v_zz.as_slice());
    check_block(g, vn, &blocks.h_n, "support")?;
    check_block(g, vzn, &blocks.h_zn, "boundary")?;
    check_block(g, vzz, &blocks.h_zz, "residual")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi_abs = {
        let sys = eig_herm(&HermMatrix::from_real(&blocks.h_n)?)?;
        if blocks.k_n == 0 || blocks.k_n > sys.dim() {
            return Err(AtlasError::InvalidData(format!("k_n = {} out of range", blocks.k_n)));
        }
        if let Some(why) = eigenpair_defect(&sys, blocks.k_n - 1) {
            return Err(AtlasError::InvalidData(why));
        }
        (0..sys.dim()).map(|r| sys.vectors[(r, blocks.k_n - 1)].re.abs()).collect::<Vec<_>>()
    };

    // |H_rs psi_s| near 1 and spread out, so every boundary polygon closes and is generic.
    let mut couplings = Couplings { h: Vec::new(), b: Vec::new() };
    for &(r, s) in &p.e_zn {
        let (z, n) = if p.v_n.contains(r) { (s, r) } else { (r, s) };
        let i = p.v_n.position(n).expect("support endpoint");
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        couplings.h.push(((z, n), sign * (1.0 + 0.3 * rng.random::<f64>()) / psi_abs[i]));
    }
    for &(r, s) in &p.e_zz {
        if p.v_zn.contains(r) != p.v_zn.contains(s) {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            couplings.b.push(((r, s), sign * (0.5 + rng.random::<f64>())));
        }
    }

    let first = attempt(g, v_n, blocks, &couplings, epsilon, seed)?;
    let eta = 1e-6 * first.epsilon.min(1.0);
    let jittered = ExistenceBlocks {
        h_n: jitter(&blocks.h_n, eta, &mut rng),
        h_zn: jitter(&blocks.h_zn, eta, &mut rng),
        h_zz: jitter(&blocks.h_zz, eta, &mut rng),
        k_n: blocks.k_n,
    };
    let jittered_couplings = Couplings {
        h: couplings.h.iter().map(|&(e, v)| (e, v * (1.0 + eta * rng.random_range(-1.0..=1.0)))).collect(),
        b: couplings.b.iter().map(|&(e, v)| (e, v * (1.0 + eta * rng.random_range(-1.0..=1.0)))).collect(),
    };
    let mut out = attempt(g, v_n, &jittered, &jittered_couplings, first.epsilon, seed)?;
    out.block_deviation = [
        (&jittered.h_n, &blocks.h_n),
        (&jittered.h_zn, &blocks.h_zn),
        (&jittered.h_zz, &blocks.h_zz),
    ]
    .iter()
    .map(|(a, b)| if a.rows() == 0 { 0.0 } else { a.max_abs_diff(b) })
    .fold(0.0, f64::max);
    Ok(out)
}

fn attempt(
    g: &Graph,
    v_n: &VertexSet,
    blocks: &ExistenceBlocks,
    couplings: &Couplings,
    epsilon: f64,
    seed: u64,
) -> Result<ExistenceInstance, AtlasError> {
    let p = partition_for_support(g, v_n)?;
    let sys = eig_herm(&HermMatrix::from_real(&blocks.h_n)?)?;
    if let Some(why) = eigenpair_defect(&sys, blocks.k_n - 1) {
        return Err(AtlasError::InvalidData(why));
    }
    let lambda = sys.values[blocks.k_n - 1];
    let psi_n: Vec<f64> = (0..sys.dim()).map(|r| sys.vectors[(r, blocks.k_n - 1)].re).collect();
    let k_zn = count_below_checked(&blocks.h_zn, lambda, "boundary")?;
    let k_zz = count_below_checked(&blocks.h_zz, lambda, "residual")?;
    let want = blocks.k_n + k_zn + k_zz;

    let parts = [p.v_n.as_slice(), p.v_zn.as_slice(), p.v_zz.as_slice()];
    let mut eps = epsilon;
    let mut last = String::new();
    for _ in 0..60 {
        let h = BaseMatrix::new(g.clone(), assemble_blocks(g, parts, [&blocks.h_n, &blocks.h_zn, &blocks.h_zz], couplings, eps))?;
        let data = CriticalData {
            v_n: v_n.clone(),
            signing_n: Signing::new(p.free_nn.clone(), vec![false; p.free_nn.len()]),
            k_n: blocks.k_n,
            lambda,
            psi_n: psi_n.clone(),
        };
        match verify(&h, &data, want, seed) {
            Ok(point) => {
                return Ok(ExistenceInstance {
                    h,
                    point,
                    k: want,
                    lambda,
                    epsilon: eps,
                    k_n: blocks.k_n,
                    k_zn,
                    k_zz,
                    block_deviation: 0.0,
                })
            }
            Err(why) => last = why,
        }
        eps /= 2.0;
    }
    Err(AtlasError::Construction(format!("no coupling scale down to {eps:.3e} works: {last}")))
}

/// The point with phase 0 on residual edges, checked for label, simplicity,
/// criticality and support.
fn verify(h: &BaseMatrix, data: &CriticalData, want: usize, seed: u64) -> Result<MagneticPoint, String> {
    let report = build_manifold(h, data, 1, seed).map_err(|e| e.to_string())?;
    if !report.nonempty {
        return Err("a boundary polygon does not close".into());
    }
    let polygons = report
        .linkages
        .iter()
        .map(|l| linkage::sample_points(&l.spec, 1, seed).map(|pts| pts[0].thetas.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let zz = vec![0.0; report.partition.free_zz.len()];
    let s = report.point_from_parts(h, &polygons, &zz).map_err(|e| e.to_string())?;
    if !s.simple || s.k != want {
        return Err(format!("lambda has label {} (simple: {}), want {want}", s.k, s.simple));
    }
    let m = assemble(h, &s.point).map_err(|e| e.to_string())?;
    let ep = eigenpair(&m, want).map_err(|e| e.to_string())?;
    let support: Vec<usize> = (0..h.n()).filter(|&v| ep.psi[v].norm() > tol::SUPPORT_ZERO).collect();
    if support != data.v_n.as_slice() {
        return Err(format!("eigenvector support {support:?} differs from the target"));
    }
    if s.critical_residual > h.critical_tol() {
        return Err(format!("criticality residual {:.3e}", s.critical_residual));
    }
    Ok(s.point)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityTrial {
    /// Largest entry change of `h`.
    pub perturbation: f64,
    pub lambda_shift: f64,
    pub psi_shift: f64,
    pub nonempty: bool,
    pub dim: usize,
    pub components: usize,
    pub preserved: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub pass: bool,
    pub trials: Vec<StabilityTrial>,
}

/// Perturbs every nonzero entry of `h` by at most `delta` and rebuilds the
/// critical set of the continued data on the same support and signing.
///
/// A trial preserves the set when it stays nonempty with the same dimension
/// and component count and the eigenvalue moves by no more than the
/// Frobenius norm of the support-block change.
pub fn stability_probe(h: &BaseMatrix, report: &ManifoldReport, delta: f64, trials: usize, seed: u64) -> StabilityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = h.graph();
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut m = h.matrix().clone();
        let mut pert = 0.0f64;
        for r in 0..g.n() {
            for s in r..g.n() {
                if r == s || g.has_edge(r, s) {
                    let d = delta * rng.random_range(-1.0..=1.0);
                    pert = pert.max(d.abs());
                    m[(r, s)] += d;
                    m[(s, r)] = m[(r, s)];
                }
            }
        }
        out.push(probe_one(h, &m, report, pert, seed.wrapping_add(t as u64)));
    }
    StabilityReport { pass: out.iter().all(|t| t.preserved), trials: out }
}

fn probe_one(h: &BaseMatrix, m: &RMat, report: &ManifoldReport, pert: f64, seed: u64) -> StabilityTrial {
    let fail = |e: String| StabilityTrial {
        perturbation: pert,
        lambda_shift: f64::NAN,
        psi_shift: f64::NAN,
        nonempty: false,
        dim: 0,
        components: 0,
        preserved: false,
        error: Some(e),
    };
    let Ok(h2) = h.with_matrix(m.clone()) else {
        return fail("perturbation broke strict support".into());
    };
    let data = &report.data;
    let signing = data.signing_n.clone();
    let b0 = support_block(h, &data.v_n, &signing);
    let b1 = support_block(&h2, &data.v_n, &signing);
    let sys = match HermMatrix::from_real(&b1).map_err(AtlasError::from).and_then(|x| Ok(eig_herm(&x)?)) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let k = data.k_n - 1;
    if let Some(why) = eigenpair_defect(&sys, k) {
        return fail(why);
    }
    let mut psi: Vec<f64> = (0..sys.dim()).map(|r| sys.vectors[(r, k)].re).collect();
    if psi.iter().zip(&data.psi_n).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        psi.iter_mut().for_each(|x| *x = -*x);
    }
    let lambda = sys.values[k];
    let lambda_shift = (lambda - data.lambda).abs();
    let psi_shift = psi.iter().zip(&data.psi_n).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let block_change = (0..b0.rows())
        .flat_map(|a| (0..b0.cols()).map(move |c| (a, c)))
        .map(|(a, c)| (b0[(a, c)] - b1[(a, c)]).powi(2))
        .sum::<f64>()
        .sqrt();
    let data2 = CriticalData { v_n: data.v_n.clone(), signing_n: signing, k_n: data.k_n, lambda, psi_n: psi };
    match build_manifold(&h2, &data2, 2, seed) {
        Ok(r) => StabilityTrial {
            perturbation: pert,
            lambda_shift,
            psi_shift,
            nonempty: r.nonempty,
            dim: r.dim,
            components: r.components,
            preserved: r.nonempty == report.nonempty
                && r.dim == report.dim
                && r.components == report.components
                && lambda_shift <= block_change + 1e-12 * tol::scale(h.frobenius()),
            error: None,
        },
        Err(e) => fail(e.to_string()),
    }
}
