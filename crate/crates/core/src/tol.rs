//! Numerical thresholds shared by every module.
//!
//! All statements about inertia, simplicity and support are exact in theory;
//! these constants are the single place where they become decidable in
//! floating point. Relative thresholds are scaled by `max(1, spectral radius)`
//! unless noted otherwise.

/// An eigenvalue `mu` counts as zero when `|mu| <= ZERO_EIG_REL * max(1, rho)`.
pub const ZERO_EIG_REL: f64 = 1e-9;

/// An eigenvalue is simple when both neighbouring gaps exceed
/// `SIMPLE_GAP_REL * max(1, rho)`.
pub const SIMPLE_GAP_REL: f64 = 1e-7;

/// Singular values at or below `PINV_CUTOFF * sigma_max` are discarded by the
/// pseudoinverse and by numerical rank / nullspace computations.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Eigensolver residual and orthonormality tolerance, relative to `max(1, ||H||)`.
pub const EIG_RESIDUAL_REL: f64 = 1e-10;

/// Entry of a unit eigenvector considered zero.
pub const SUPPORT_ZERO: f64 = 1e-8;

/// Criticality residual `max |Im((h_a)_rs conj(psi_r) psi_s)|`, relative to `||h||_F`.
pub const CRITICAL_REL: f64 = 1e-9;

/// Off-diagonal entries below this magnitude violate strict support.
pub const STRICT_SUPPORT: f64 = 1e-12;

/// Relative slack for signed link sums and triangle inequalities.
pub const LINKAGE_SLACK: f64 = 1e-12;

/// Torus distance under which two sampled points are identified.
pub const DEDUP_DIST: f64 = 1e-6;

/// Threshold on the zero test in the residual-subgraph spectrum.
pub const ZZ_RESONANCE_REL: f64 = 1e-9;

/// Default finite-difference step (radians).
pub const FD_STEP: f64 = 1e-5;

pub(crate) fn scale(rho: f64) -> f64 {
    rho.max(1.0)
}
