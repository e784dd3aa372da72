//! Cyclic complex Jacobi eigensolver for Hermitian matrices.

use super::matrix::{CMat, HermMatrix, RMat, C64};
use super::LinalgError;
use crate::tol;

const MAX_SWEEPS: usize = 80;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMat,
    /// `values[k] - values[k-1]`, infinite for `k = 0`.
    pub gap_below: Vec<f64>,
    /// `values[k+1] - values[k]`, infinite for the top index.
    pub gap_above: Vec<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `max(1, spectral radius)`, the scale used by every relative threshold.
    pub fn scale(&self) -> f64 {
        tol::scale(self.spectral_radius())
    }

    /// Unit eigenvector for the 0-based index `k`.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    pub fn min_gap(&self, k: usize) -> f64 {
        self.gap_below[k].min(self.gap_above[k])
    }

    pub fn is_simple(&self, k: usize) -> bool {
        self.min_gap(k) > tol::SIMPLE_GAP_REL * self.scale()
    }

    pub fn zero_threshold(&self) -> f64 {
        tol::ZERO_EIG_REL * self.scale()
    }

    /// Number of eigenvalues strictly below `lambda - zero_threshold`.
    pub fn count_below(&self, lambda: f64) -> usize {
        let t = self.zero_threshold();
        self.values.iter().filter(|&&v| v < lambda - t).count()
    }

    /// Indices whose eigenvalue lies within the zero threshold of `lambda`.
    pub fn indices_near(&self, lambda: f64) -> Vec<usize> {
        let t = self.zero_threshold();
        (0..self.dim()).filter(|&i| (self.values[i] - lambda).abs() <= t).collect()
    }

    /// Real eigenvector matrix; valid when the input was real symmetric.
    pub fn real_vectors(&self) -> RMat {
        RMat::from_fn(self.vectors.rows(), self.vectors.cols(), |r, c| self.vectors[(r, c)].re)
    }
}

fn off_norm_sq(a: &CMat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += a[(p, q)].norm_sqr();
        }
    }
    2.0 * s
}

/// Fixes the phase of each column so its first entry above the support
/// threshold is real and positive.
pub(crate) fn normalize_phases(v: &mut CMat) {
    for c in 0..v.cols() {
        let pivot = (0..v.rows()).map(|r| v[(r, c)]).find(|z| z.norm() > tol::SUPPORT_ZERO);
        if let Some(z) = pivot {
            let phase = z.conj() / z.norm();
            for r in 0..v.rows() {
                v[(r, c)] *= phase;
            }
        }
    }
}

/// Eigendecomposition with ascending eigenvalues, stable among ties.
pub fn eig_herm(h: &HermMatrix) -> Result<EigenSystem, LinalgError> {
    let n = h.dim();
    let mut a = h.as_cmat().clone();
    let mut v = CMat::identity(n);
    let total = a.frobenius();
    let target = (f64::EPSILON * total).powi(2);

    let mut sweeps = 0;
    while off_norm_sq(&a) > target && total > 0.0 {
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                // Make a_pq real positive: A <- U^H A U, U = diag(.., e^{-i phi} at q, ..).
                let u = apq.conj() / g;
                if u != C64::new(1.0, 0.0) {
                    for r in 0..n {
                        a[(r, q)] *= u;
                        v[(r, q)] *= u;
                    }
                    let uc = u.conj();
                    for c in 0..n {
                        a[(q, c)] *= uc;
                    }
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for r in 0..n {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * c - arq * s;
                    a[(r, q)] = arp * s + arq * c;
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * c - vrq * s;
                    v[(r, q)] = vrp * s + vrq * c;
                }
                for col in 0..n {
                    let apc = a[(p, col)];
                    let aqc = a[(q, col)];
                    a[(p, col)] = apc * c - aqc * s;
                    a[(q, col)] = apc * s + aqc * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    normalize_phases(&mut vectors);

    let gap_below = (0..n)
        .map(|k| if k == 0 { f64::INFINITY } else { values[k] - values[k - 1] })
        .collect();
    let gap_above = (0..n)
        .map(|k| if k + 1 == n { f64::INFINITY } else { values[k + 1] - values[k] })
        .collect();
    let sys = EigenSystem { values, vectors, gap_below, gap_above };
    verify(h, &sys, sweeps)?;
    Ok(sys)
}

fn verify(h: &HermMatrix, sys: &EigenSystem, sweeps: usize) -> Result<(), LinalgError> {
    let n = sys.dim();
    let tol = tol::EIG_RESIDUAL_REL * tol::scale(sys.spectral_radius());
    let hv = h.as_cmat().matmul(&sys.vectors);
    let mut worst = 0.0f64;
    for k in 0..n {
        let res: f64 = (0..n)
            .map(|r| (hv[(r, k)] - sys.vectors[(r, k)] * sys.values[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(res);
    }
    let gram = sys.vectors.adjoint().matmul(&sys.vectors);
    worst = worst.max(gram.sub(&CMat::identity(n)).max_abs());
    if worst > tol {
        return Err(LinalgError::NoConvergence { sweeps, residual: worst });
    }
    Ok(())
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &RMat) -> Result<Vec<f64>, LinalgError> {
    Ok(eig_herm(&HermMatrix::from_real(m)?)?.values)
}

/// Eigenvalues and real orthonormal eigenvectors of a real symmetric matrix.
pub fn eig_symmetric(m: &RMat) -> Result<(Vec<f64>, RMat), LinalgError> {
    let sys = eig_herm(&HermMatrix::from_real(m)?)?;
    let vecs = sys.real_vectors();
    Ok((sys.values, vecs))
}
