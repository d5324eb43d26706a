//! Dense complex linear algebra and seeded randomness.
//!
//! Bipartite spaces are always ordered ancilla first, qubit second: the
//! qubit is the fastest-varying index, so `ρ ⊗ |φ⟩⟨φ|` is `tensor(ρ, φφ†)`.

mod eig;
mod matrix;
mod rng;
mod state;

use thiserror::Error;

pub use eig::{
    hermitian_eig, matrix_sqrt_psd, min_eigenvalue, operator_from_singlet, singlet, HermitianEigen,
};
pub use matrix::{
    inner, partial_trace, tensor, tensor_vec, vec_norm, ComplexMatrix, Keep, I, ONE, ZERO,
};
pub use num_complex::Complex64;
pub use rng::{
    fibonacci_sphere, random_orthonormal_completion, sample_haar_qubit, sample_sphere_direction,
    SeededRng,
};
pub use state::{DensityMatrix, PureQubit, DENSITY_TOL, NORM_TOL};

/// Eigenvalues at or above `1 − EIGENVALUE_ONE_TOL` belong to the
/// eigenvalue-1 eigenspace.
pub const EIGENVALUE_ONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmathError {
    #[error("expected {expected} entries, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },
    #[error("state is not normalised: norm {norm}")]
    NotNormalized { norm: f64 },
    #[error("zero vector cannot be normalised")]
    ZeroVector,
}
