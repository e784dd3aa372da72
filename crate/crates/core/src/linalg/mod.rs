//! Dense linear algebra for small Hermitian and real symmetric matrices.

mod eigen;
mod inertia;
mod matrix;
mod svd;

pub use eigen::{eig_herm, eig_symmetric, symmetric_eigenvalues, EigenSystem};
pub use inertia::{
    haynsworth_inertia, inertia, inertia_from, pseudoinverse, pseudoinverse_from, real_linear_matrix,
    real_part_form, real_part_form_inertia, realify, spectral_shift_compression, symmetric_inertia,
    CompressionReport, HaynsworthCheck, Inertia, RealFormInertia,
};
pub use matrix::{CMat, HermMatrix, MatrixJson, RMat, C64};
pub use svd::{null_space, rank, svd, Svd};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is singular")]
    Singular,
    #[error("eigensolver failed to converge after {sweeps} sweeps (residual {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("kernel condition ker D in ker B fails (|B v| = {residual:.3e})")]
    KernelCondition { residual: f64 },
    #[error("real-linear map is not surjective: real rank {rank}, need {required}")]
    NotSurjective { rank: usize, required: usize },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("malformed matrix: {0}")]
    Format(String),
}
