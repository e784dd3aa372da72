//! First and second derivatives of a simple eigenvalue on the magnetic torus.
//!
//! Both derivatives are computed on the full space of edge one-forms and then
//! restricted to whatever coordinates a caller needs; the edge-level forms are
//! gauge invariant, so the restriction may use any tree gauge.

use crate::graph::{Edge, Graph, SupportPartition};
use crate::linalg::{
    eig_herm, null_space, pseudoinverse_from, real_linear_matrix, symmetric_inertia, CMat, EigenSystem, HermMatrix,
    Inertia, RMat, C64,
};
use crate::tol;

use super::{assemble_form, BaseMatrix, MagneticError, MagneticPoint, OneForm};

/// Simple eigenpair `(lambda_k, psi)` with `k` 1-based.
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub k: usize,
    pub lambda: f64,
    pub psi: Vec<C64>,
    /// Distance to the nearest other eigenvalue.
    pub gap: f64,
    pub system: EigenSystem,
}

/// Eigenpair number `k` (1-based), rejected when not simple.
pub fn eigenpair(m: &HermMatrix, k: usize) -> Result<Eigenpair, MagneticError> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(MagneticError::Label { k, n });
    }
    let system = eig_herm(m)?;
    let gap = system.min_gap(k - 1);
    if !system.is_simple(k - 1) {
        return Err(MagneticError::NonSmooth { k, gap });
    }
    Ok(Eigenpair { k, lambda: system.values[k - 1], psi: system.vector(k - 1), gap, system })
}

/// `(h_a)_rs conj(psi_r) psi_s` for an edge.
fn edge_product(m: &HermMatrix, psi: &[C64], r: usize, s: usize) -> C64 {
    m[(r, s)] * psi[r].conj() * psi[s]
}

/// `max_e |Im((h_a)_rs conj(psi_r) psi_s)|` over the edges of `g`.
pub fn critical_residual(m: &HermMatrix, g: &Graph, psi: &[C64]) -> f64 {
    g.edges().iter().map(|&(r, s)| edge_product(m, psi, r, s).im.abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criticality {
    pub critical: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub lambda: f64,
}

pub fn is_critical(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Result<Criticality, MagneticError> {
    let m = super::assemble(h, p)?;
    let ep = eigenpair(&m, k)?;
    let residual = critical_residual(&m, h.graph(), &ep.psi);
    let tolerance = h.critical_tol();
    Ok(Criticality { critical: residual <= tolerance, residual, tolerance, lambda: ep.lambda })
}

/// Derivative of `lambda_k` along each free edge of `p`:
/// `d lambda / d a_rs = -2 Im((h_a)_rs conj(psi_r) psi_s)`.
pub fn gradient(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Result<Vec<f64>, MagneticError> {
    let m = super::assemble(h, p)?;
    let ep = eigenpair(&m, k)?;
    Ok(p.free_edges().iter().map(|&(r, s)| -2.0 * edge_product(&m, &ep.psi, r, s).im).collect())
}

fn nodal_count_on(m: &HermMatrix, psi: &[C64], edges: &[Edge], scale: f64) -> Result<usize, MagneticError> {
    let t = tol::CRITICAL_REL * tol::scale(scale);
    let mut count = 0;
    for &(r, s) in edges {
        let z = edge_product(m, psi, r, s);
        if z.im.abs() > t {
            return Err(MagneticError::NotCritical { residual: z.im.abs() });
        }
        if z.re > 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

fn support_edges(m: &HermMatrix) -> Vec<Edge> {
    let n = m.dim();
    (0..n).flat_map(|r| (r + 1..n).map(move |s| (r, s))).filter(|&(r, s)| m[(r, s)].norm() > 0.0).collect()
}

/// Number of edges with `Re((h_a)_rs conj(psi_r) psi_s) > 0`; requires every
/// such product to be real.
pub fn nodal_count(m: &HermMatrix, psi: &[C64]) -> Result<usize, MagneticError> {
    nodal_count_on(m, psi, &support_edges(m), m.frobenius())
}

/// `nodal_count - (k - 1)` for the 1-based label `k`.
pub fn nodal_surplus(m: &HermMatrix, k: usize, psi: &[C64]) -> Result<isize, MagneticError> {
    Ok(nodal_count(m, psi)? as isize - (k as isize - 1))
}

/// Edge-level derivative data at a simple eigenvalue.
struct EdgeForms {
    pair: Eigenpair,
    /// `B` as an `n x |E|` complex matrix: column `e` is `B` applied to the unit form on `e`.
    b: CMat,
    /// Diagonal of `Q_in`.
    q_in: Vec<f64>,
    q_out: RMat,
}

impl EdgeForms {
    fn hessian(&self) -> RMat {
        let mut q = self.q_out.clone();
        for (i, &d) in self.q_in.iter().enumerate() {
            q[(i, i)] += d;
        }
        q
    }
}

fn edge_forms(h: &BaseMatrix, alpha: &OneForm, k: usize) -> Result<EdgeForms, MagneticError> {
    let g = h.graph();
    let m = assemble_form(h, alpha);
    let pair = eigenpair(&m, k)?;
    let n = g.n();
    let ne = g.num_edges();
    let psi = &pair.psi;
    let i = C64::new(0.0, 1.0);
    let mut b = CMat::zeros(n, ne);
    let mut q_in = vec![0.0; ne];
    for (e, &(r, s)) in g.edges().iter().enumerate() {
        b[(r, e)] = i * m[(r, s)] * psi[s];
        b[(s, e)] = -i * m[(s, r)] * psi[r];
        q_in[e] = -2.0 * edge_product(&m, psi, r, s).re;
    }
    let shifted: Vec<f64> = pair.system.values.iter().map(|v| v - pair.lambda).collect();
    let mut sys = pair.system.clone();
    sys.values = shifted;
    let pinv = pseudoinverse_from(&sys);
    let pb = pinv.as_cmat().matmul(&b);
    let gram = b.adjoint().matmul(&pb);
    let q_out = RMat::from_fn(ne, ne, |e, f| -2.0 * gram[(e, f)].re).symmetrized();
    Ok(EdgeForms { pair, b, q_in, q_out })
}

fn edge_positions(g: &Graph, edges: &[Edge]) -> Vec<usize> {
    edges.iter().map(|&(r, s)| g.edge_index(r, s).expect("not an edge of the graph")).collect()
}

/// Hessian of `lambda_k` in the free-edge coordinates of `p`. Valid at any
/// point where `lambda_k` is simple.
pub fn hessian_matrix(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Result<RMat, MagneticError> {
    let forms = edge_forms(h, &p.to_one_form(h.graph())?, k)?;
    let idx = edge_positions(h.graph(), p.free_edges());
    Ok(forms.hessian().select(&idx, &idx))
}

/// [`hessian_matrix`] restricted to critical points.
pub fn hessian(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Result<RMat, MagneticError> {
    let c = is_critical(h, p, k)?;
    if !c.critical {
        return Err(MagneticError::NotCritical { residual: c.residual });
    }
    hessian_matrix(h, p, k)
}

/// Hessian at a critical point split along the support of the eigenvector.
#[derive(Debug, Clone)]
pub struct HessianBlocks {
    pub k: usize,
    pub lambda: f64,
    pub k_n: usize,
    pub k_zz: usize,
    /// Nodal surplus of `psi` restricted to the support subgraph.
    pub sigma_n: usize,
    /// Full Hessian in the free-edge coordinates of the point.
    pub full: RMat,
    pub full_inertia: Inertia,
    pub wn_dim: usize,
    pub q_in_wn: Inertia,
    pub q_out_zn: Inertia,
    /// Real rank of `B` on the free boundary edges.
    pub b_zn_rank: usize,
    /// Inertia of `-Q_out` on coboundaries `d theta`, `theta` ranging over all vertices.
    pub neg_q_out_exact: Inertia,
    pub predicted_index: isize,
    pub predicted_nullity: usize,
}

impl HessianBlocks {
    /// Every block matches its predicted inertia.
    pub fn consistent(&self, p: &SupportPartition) -> bool {
        let (vzn, ezn) = (p.v_zn.len(), p.e_zn.len());
        let zn_index = 2 * vzn as isize - 2 * (self.k as isize - self.k_n as isize - self.k_zz as isize);
        self.q_in_wn.n_minus == self.sigma_n
            && self.q_in_wn.n_zero == 0
            && self.q_out_zn.n_minus as isize == zn_index
            && self.q_out_zn.n_zero as isize == ezn as isize - 3 * vzn as isize
            && self.b_zn_rank == 2 * vzn
            && self.neg_q_out_exact.n_minus == self.k_n - 1
            && self.neg_q_out_exact.n_plus + self.neg_q_out_exact.n_minus == p.v_n.len() - 1
            && self.full_inertia.n_minus as isize == self.predicted_index
            && self.full_inertia.n_zero == self.predicted_nullity
    }
}

/// Block decomposition of the Hessian at a critical point whose eigenvector
/// is supported exactly on `partition.v_n`.
pub fn hessian_blocks(
    h: &BaseMatrix,
    p: &MagneticPoint,
    k: usize,
    partition: &SupportPartition,
) -> Result<HessianBlocks, MagneticError> {
    let g = h.graph();
    let alpha = p.to_one_form(g)?;
    let m = assemble_form(h, &alpha);
    let forms = edge_forms(h, &alpha, k)?;
    let pair = &forms.pair;
    let residual = critical_residual(&m, g, &pair.psi);
    if residual > h.critical_tol() {
        return Err(MagneticError::NotCritical { residual });
    }
    let found: Vec<usize> = (0..g.n()).filter(|&v| pair.psi[v].norm() > tol::SUPPORT_ZERO).collect();
    if found != partition.v_n.as_slice() {
        return Err(MagneticError::SupportMismatch { found, expected: partition.v_n.as_slice().to_vec() });
    }
    let lambda = pair.lambda;

    let hn = m.principal(partition.v_n.as_slice());
    let nsys = eig_herm(&hn)?;
    let near = nsys.indices_near(lambda);
    if near.len() != 1 || !nsys.is_simple(near[0]) {
        return Err(MagneticError::NonSmooth { k: nsys.count_below(lambda) + 1, gap: 0.0 });
    }
    let k_n = near[0] + 1;

    let k_zz = if partition.v_zz.is_empty() {
        0
    } else {
        let zsys = eig_herm(&m.principal(partition.v_zz.as_slice()))?;
        let distance = zsys.values.iter().map(|v| (v - lambda).abs()).fold(f64::INFINITY, f64::min);
        if distance <= tol::ZZ_RESONANCE_REL * zsys.scale().max(pair.system.scale()) {
            return Err(MagneticError::DegenerateNormalData { distance });
        }
        zsys.values.iter().filter(|&&v| v < lambda).count()
    };

    let nu_n = nodal_count_on(&m, &pair.psi, &partition.e_nn, h.frobenius())?;
    let sigma_n = nu_n + 1 - k_n;

    let q = forms.hessian();
    let free_idx = edge_positions(g, p.free_edges());
    let full = q.select(&free_idx, &free_idx);
    let full_inertia = symmetric_inertia(&full)?;

    let nn_idx = edge_positions(g, &partition.e_nn);
    let all_rows: Vec<usize> = (0..g.n()).collect();
    let b_nn = forms.b.select(&all_rows, &nn_idx);
    let wn = null_space(&real_linear_matrix(&b_nn));
    let q_in_nn = RMat::from_fn(nn_idx.len(), nn_idx.len(), |a, c| if a == c { forms.q_in[nn_idx[a]] } else { 0.0 });
    let q_in_wn = if wn.cols() == 0 { Inertia::default() } else { symmetric_inertia(&q_in_nn.congruence(&wn))? };

    let zn_idx = edge_positions(g, &partition.free_zn);
    let q_out_zn = symmetric_inertia(&forms.q_out.select(&zn_idx, &zn_idx))?;
    let b_zn_rank = crate::linalg::rank(&real_linear_matrix(&forms.b.select(&all_rows, &zn_idx)));

    let d = RMat::from_fn(g.num_edges(), g.n(), |e, v| {
        let (r, s) = g.edges()[e];
        if v == r {
            1.0
        } else if v == s {
            -1.0
        } else {
            0.0
        }
    });
    let neg_q_out_exact = symmetric_inertia(&forms.q_out.scaled(-1.0).congruence(&d))?;

    let vzn = partition.v_zn.len() as isize;
    let predicted_index = sigma_n as isize + 2 * vzn - 2 * (k as isize - k_zz as isize - k_n as isize);
    let predicted_nullity = partition.e_zn.len() + partition.e_zz.len() - 3 * partition.v_zn.len() - partition.v_zz.len();

    Ok(HessianBlocks {
        k,
        lambda,
        k_n,
        k_zz,
        sigma_n,
        full,
        full_inertia,
        wn_dim: wn.cols(),
        q_in_wn,
        q_out_zn,
        b_zn_rank,
        neg_q_out_exact,
        predicted_index,
        predicted_nullity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{whole_partition, Graph};
    use crate::magnetic::{enumerate_signings, BaseMatrix};

    fn cycle(n: usize) -> Graph {
        Graph::new(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn tree_nodal_count_is_fiedler() {
        let g = Graph::new(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let h = BaseMatrix::adjacency_plus_diagonal(g, &[0.11, 0.53, 0.27, 0.94, 0.38]).unwrap();
        let m = HermMatrix::from_real(h.matrix()).unwrap();
        for k in 1..=5 {
            let ep = eigenpair(&m, k).unwrap();
            assert_eq!(nodal_surplus(&m, k, &ep.psi).unwrap(), 0);
        }
    }

    #[test]
    fn laplacian_ground_state_has_no_sign_changes() {
        let h = BaseMatrix::standard_laplacian(cycle(5));
        let m = HermMatrix::from_real(h.matrix()).unwrap();
        let ep = eigenpair(&m, 1).unwrap();
        assert_eq!(nodal_count(&m, &ep.psi).unwrap(), 0);
    }

    #[test]
    fn signings_are_critical() {
        let g = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        let h = BaseMatrix::adjacency_plus_diagonal(g, &[0.13, 0.71, 0.37, 0.52]).unwrap();
        for s in enumerate_signings(&h).unwrap() {
            for k in 1..=4 {
                let c = is_critical(&h, &s.to_point(), k).unwrap();
                assert!(c.critical, "{c:?}");
                assert!(gradient(&h, &s.to_point(), k).unwrap().iter().all(|x| x.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn nonsimple_is_reported() {
        let m = HermMatrix::from_real(&RMat::identity(2)).unwrap();
        assert!(matches!(eigenpair(&m, 1), Err(MagneticError::NonSmooth { .. })));
        assert!(matches!(eigenpair(&m, 3), Err(MagneticError::Label { .. })));
    }

    #[test]
    fn hessian_on_cycle_matches_second_difference() {
        let g = cycle(4);
        let h = BaseMatrix::adjacency_plus_diagonal(g.clone(), &[0.1, 0.4, 0.2, 0.7]).unwrap();
        let part = whole_partition(&g);
        let p = MagneticPoint::new(part.free_edges(), vec![1.1]);
        let k = 2;
        let hess = hessian_matrix(&h, &p, k).unwrap()[(0, 0)];
        let f = |t: f64| {
            let m = crate::magnetic::assemble(&h, &p.with_angles(vec![t])).unwrap();
            eigenpair(&m, k).unwrap().lambda
        };
        let s = 1e-4;
        let fd = (f(1.1 + s) - 2.0 * f(1.1) + f(1.1 - s)) / (s * s);
        assert!((hess - fd).abs() < 1e-5, "{hess} vs {fd}");
    }
}
