use serde::{Deserialize, Serialize};

use super::eigen::{eig_herm, EigenSystem};
use super::matrix::{CMat, HermMatrix, RMat, C64};
use super::svd::svd;
use super::LinalgError;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl std::ops::Add for Inertia {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        Self::new(self.n_plus + other.n_plus, self.n_minus + other.n_minus, self.n_zero + other.n_zero)
    }
}

impl Inertia {
    pub fn new(n_plus: usize, n_minus: usize, n_zero: usize) -> Self {
        Self { n_plus, n_minus, n_zero }
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    /// Component-wise difference, `None` if any component would go negative.
    pub fn checked_sub(self, other: Self) -> Option<Self> {
        Some(Self::new(
            self.n_plus.checked_sub(other.n_plus)?,
            self.n_minus.checked_sub(other.n_minus)?,
            self.n_zero.checked_sub(other.n_zero)?,
        ))
    }

    pub fn negated(self) -> Self {
        Self::new(self.n_minus, self.n_plus, self.n_zero)
    }

    /// Classifies `values` against the zero threshold `ZERO_EIG_REL * max(1, scale)`.
    pub fn of_values(values: &[f64], scale: f64) -> Self {
        let t = tol::ZERO_EIG_REL * tol::scale(scale);
        let mut out = Self::default();
        for &v in values {
            if v > t {
                out.n_plus += 1;
            } else if v < -t {
                out.n_minus += 1;
            } else {
                out.n_zero += 1;
            }
        }
        out
    }
}

impl std::fmt::Display for Inertia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(+{}, -{}, 0:{})", self.n_plus, self.n_minus, self.n_zero)
    }
}

/// Inertia of `h - shift * I`; the zero threshold scales with the spectral
/// radius of `h` and `|shift|`.
pub fn inertia(h: &HermMatrix, shift: f64) -> Result<Inertia, LinalgError> {
    let sys = eig_herm(h)?;
    Ok(inertia_from(&sys, shift))
}

pub fn inertia_from(sys: &EigenSystem, shift: f64) -> Inertia {
    let shifted: Vec<f64> = sys.values.iter().map(|v| v - shift).collect();
    Inertia::of_values(&shifted, sys.spectral_radius().max(shift.abs()))
}

/// Inertia of a real symmetric matrix.
pub fn symmetric_inertia(m: &RMat) -> Result<Inertia, LinalgError> {
    inertia(&HermMatrix::from_real(&m.symmetrized())?, 0.0)
}

pub fn pseudoinverse(h: &HermMatrix) -> Result<HermMatrix, LinalgError> {
    let sys = eig_herm(h)?;
    Ok(pseudoinverse_from(&sys))
}

pub fn pseudoinverse_from(sys: &EigenSystem) -> HermMatrix {
    let n = sys.dim();
    let cutoff = tol::PINV_CUTOFF * sys.spectral_radius();
    let inv: Vec<f64> =
        sys.values.iter().map(|&v| if v.abs() > cutoff && v != 0.0 { 1.0 / v } else { 0.0 }).collect();
    let v = &sys.vectors;
    let m = CMat::from_fn(n, n, |r, c| (0..n).map(|k| v[(r, k)] * inv[k] * v[(c, k)].conj()).sum());
    HermMatrix::symmetrize(m)
}

/// Orthonormal basis (columns) of the eigenspace of `sys` at `lambda`.
fn kernel_basis(sys: &EigenSystem, lambda: f64) -> CMat {
    let idx = sys.indices_near(lambda);
    let rows: Vec<usize> = (0..sys.dim()).collect();
    sys.vectors.select(&rows, &idx)
}

/// Both sides of the extended Haynsworth identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaynsworthCheck {
    pub whole: Inertia,
    pub d: Inertia,
    pub schur: Inertia,
}

impl HaynsworthCheck {
    pub fn holds(&self) -> bool {
        self.whole == self.d + self.schur
    }
}

/// Checks `n_*(h) = n_*(D) + n_*(A - B D^+ B^*)` for `h = [[A, B], [B^*, D]]`.
pub fn haynsworth_inertia(a: &HermMatrix, b: &CMat, d: &HermMatrix) -> Result<HaynsworthCheck, LinalgError> {
    let (p, q) = (a.dim(), d.dim());
    if b.rows() != p || b.cols() != q {
        return Err(LinalgError::Hypothesis(format!(
            "coupling block is {}x{}, expected {p}x{q}",
            b.rows(),
            b.cols()
        )));
    }
    let dsys = eig_herm(d)?;
    let scale = tol::scale(dsys.spectral_radius().max(b.max_abs()));
    let ker = kernel_basis(&dsys, 0.0);
    let leak = b.matmul(&ker).max_abs();
    if leak > tol::ZERO_EIG_REL * scale * 10.0 {
        return Err(LinalgError::KernelCondition { residual: leak });
    }
    let dplus = pseudoinverse_from(&dsys);
    let schur = HermMatrix::symmetrize(a.as_cmat().sub(&b.matmul(dplus.as_cmat()).matmul(&b.adjoint())));
    let whole = HermMatrix::symmetrize(block(a.as_cmat(), b, d.as_cmat()));
    // One threshold for all three spectra keeps the counts comparable.
    let wsys = eig_herm(&whole)?;
    let ssys = eig_herm(&schur)?;
    let s = wsys.spectral_radius().max(dsys.spectral_radius()).max(ssys.spectral_radius());
    Ok(HaynsworthCheck {
        whole: Inertia::of_values(&wsys.values, s),
        d: Inertia::of_values(&dsys.values, s),
        schur: Inertia::of_values(&ssys.values, s),
    })
}

fn block(a: &CMat, b: &CMat, d: &CMat) -> CMat {
    let p = a.rows();
    let n = p + d.rows();
    CMat::from_fn(n, n, |r, c| match (r < p, c < p) {
        (true, true) => a[(r, c)],
        (true, false) => b[(r, c - p)],
        (false, true) => b[(c, r - p)].conj(),
        (false, false) => d[(r - p, c - p)],
    })
}

/// Inertia of the compression `R_0` together with both sides of the spectral shift identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionReport {
    pub r0: Inertia,
    pub h_shifted: Inertia,
    pub d_shifted: Inertia,
}

impl CompressionReport {
    /// `n_*(R_0) = n_*(h - lambda) - n_*(D - lambda)` for all three components.
    pub fn holds(&self) -> bool {
        self.h_shifted.checked_sub(self.d_shifted) == Some(self.r0)
    }

    /// `n_-(h - lambda) - n_-(D - lambda)`.
    pub fn spectral_shift(&self) -> isize {
        self.h_shifted.n_minus as isize - self.d_shifted.n_minus as isize
    }
}

/// Compression of `(h - lambda)^+` to the coordinates `v0`, with the
/// hypotheses of the spectral shift identity verified first.
pub fn spectral_shift_compression(
    h: &HermMatrix,
    v0: &[usize],
    lambda: f64,
) -> Result<CompressionReport, LinalgError> {
    let n = h.dim();
    if v0.iter().any(|&i| i >= n) {
        return Err(LinalgError::Hypothesis("index set exceeds matrix dimension".into()));
    }
    let v1: Vec<usize> = (0..n).filter(|i| !v0.contains(i)).collect();
    let hsys = eig_herm(h)?;
    let scale = hsys.scale().max(lambda.abs());
    let ker = kernel_basis(&hsys, lambda);
    if ker.cols() == 0 {
        return Err(LinalgError::Hypothesis(format!("{lambda} is not an eigenvalue")));
    }
    // Some kernel vector must vanish on v0: the restriction of the kernel to v0 is not injective.
    let restricted = ker.select(v0, &(0..ker.cols()).collect::<Vec<_>>());
    if complex_real_rank(&restricted) >= ker.cols() {
        return Err(LinalgError::Hypothesis("no eigenvector for lambda vanishes on v0".into()));
    }
    let d = h.principal(&v1);
    let b = h.as_cmat().select(v0, &v1);
    let dsys = eig_herm(&d)?;
    let dker = kernel_basis(&dsys, lambda);
    let leak = b.matmul(&dker).max_abs();
    if leak > tol::ZERO_EIG_REL * scale * 10.0 {
        return Err(LinalgError::KernelCondition { residual: leak });
    }
    let pinv = pseudoinverse(&h.shifted(lambda))?;
    let r0 = pinv.principal(v0);
    let r0sys = eig_herm(&r0)?;
    Ok(CompressionReport {
        r0: Inertia::of_values(&r0sys.values, r0sys.spectral_radius()),
        h_shifted: inertia_from(&hsys, lambda),
        d_shifted: inertia_from(&dsys, lambda),
    })
}

/// Rank over the complex numbers, via the real embedding (which doubles it).
/// Rank of a block of unit-norm kernel vectors, with an absolute cutoff.
fn complex_real_rank(m: &CMat) -> usize {
    svd(&realify(m)).singular_values.iter().filter(|&&s| s > tol::SUPPORT_ZERO).count() / 2
}

/// Real 2r x 2c embedding `[[Re, -Im], [Im, Re]]` of a complex matrix.
pub fn realify(m: &CMat) -> RMat {
    let (r, c) = (m.rows(), m.cols());
    RMat::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// `[Re B; Im B]`: the real matrix of a real-linear map `R^m -> C^n` given by complex columns.
pub fn real_linear_matrix(b: &CMat) -> RMat {
    let n = b.rows();
    RMat::from_fn(2 * n, b.cols(), |i, j| if i < n { b[(i, j)].re } else { b[(i - n, j)].im })
}

/// Real symmetric matrix of `Q(x, y) = Re <Bx, H By>`.
pub fn real_part_form(h: &HermMatrix, b: &CMat) -> RMat {
    let hb = h.as_cmat().matmul(b);
    let m = b.cols();
    let q = RMat::from_fn(m, m, |j, l| {
        (0..b.rows()).map(|r| b[(r, j)] * hb[(r, l)].conj()).sum::<C64>().re
    });
    q.symmetrized()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RealFormInertia {
    /// Inertia of `Q` computed from its own spectrum.
    pub direct: Inertia,
    /// `(2 n_+(H), 2 n_-(H), 2 n_0(H) + m - 2n)`.
    pub predicted: Inertia,
}

impl RealFormInertia {
    pub fn holds(&self) -> bool {
        self.direct == self.predicted
    }
}

/// Inertia of `Re <Bx, H By>` for a surjective real-linear `B: R^m -> C^n`.
pub fn real_part_form_inertia(h: &HermMatrix, b: &CMat) -> Result<RealFormInertia, LinalgError> {
    let n = h.dim();
    if b.rows() != n {
        return Err(LinalgError::Hypothesis(format!("map has {} rows, expected {n}", b.rows())));
    }
    let m = b.cols();
    let rank = svd(&real_linear_matrix(b)).rank();
    if rank != 2 * n {
        return Err(LinalgError::NotSurjective { rank, required: 2 * n });
    }
    let q = real_part_form(h, b);
    let qsys = eig_herm(&HermMatrix::from_real(&q)?)?;
    let hsys = eig_herm(h)?;
    let hi = Inertia::of_values(&hsys.values, hsys.spectral_radius());
    // Q's spectrum is H's scaled by squared singular values of B; scale the threshold accordingly.
    let smax = svd(&real_linear_matrix(b)).singular_values[0];
    let direct = Inertia::of_values(&qsys.values, qsys.spectral_radius().max(smax * smax * hsys.spectral_radius()));
    Ok(RealFormInertia {
        direct,
        predicted: Inertia::new(2 * hi.n_plus, 2 * hi.n_minus, 2 * hi.n_zero + m - 2 * n),
    })
}
