//! One-sided Jacobi singular value decomposition for real matrices.

use super::matrix::RMat;
use crate::tol;

const MAX_SWEEPS: usize = 80;

/// Singular values (descending) and right singular vectors (columns of `v`).
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub v: RMat,
}

impl Svd {
    pub fn cutoff(&self) -> f64 {
        tol::PINV_CUTOFF * self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        let c = self.cutoff();
        self.singular_values.iter().filter(|&&s| s > c && s > 0.0).count()
    }

    /// Orthonormal basis of the numerical kernel, as columns.
    pub fn null_space(&self) -> RMat {
        let r = self.rank();
        let n = self.v.rows();
        let idx: Vec<usize> = (r..n).collect();
        let rows: Vec<usize> = (0..n).collect();
        self.v.select(&rows, &idx)
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

pub fn svd(a: &RMat) -> Svd {
    let m = a.rows();
    let n = a.cols();
    let mut u = a.clone();
    let mut v = RMat::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> =
        (0..n).map(|j| (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values = order.iter().map(|&j| norms[j]).collect();
    let rows: Vec<usize> = (0..n).collect();
    Svd { singular_values, v: v.select(&rows, &order) }
}

pub fn rank(a: &RMat) -> usize {
    svd(a).rank()
}

pub fn null_space(a: &RMat) -> RMat {
    svd(a).null_space()
}
