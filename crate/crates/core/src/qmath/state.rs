use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eig::min_eigenvalue;
use super::matrix::{inner, vec_norm, ComplexMatrix, ONE, ZERO};
use super::QmathError;

/// Tolerance on `|α|² + |β|² = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance shared by the Hermiticity, positivity and trace checks on
/// density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// A pure qubit state `α|↑⟩ + β|↓⟩`.
///
/// Global phase carries no meaning; compare states with [`PureQubit::fidelity`],
/// never componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QubitRepr", into = "QubitRepr")]
pub struct PureQubit {
    alpha: Complex64,
    beta: Complex64,
}

#[derive(Serialize, Deserialize)]
struct QubitRepr {
    amplitudes: [[f64; 2]; 2],
    #[serde(default, skip_deserializing)]
    bloch: Option<[f64; 3]>,
}

impl TryFrom<QubitRepr> for PureQubit {
    type Error = QmathError;

    fn try_from(r: QubitRepr) -> Result<Self, QmathError> {
        let [[ar, ai], [br, bi]] = r.amplitudes;
        PureQubit::new(Complex64::new(ar, ai), Complex64::new(br, bi))
    }
}

impl From<PureQubit> for QubitRepr {
    fn from(q: PureQubit) -> Self {
        QubitRepr {
            amplitudes: [[q.alpha.re, q.alpha.im], [q.beta.re, q.beta.im]],
            bloch: Some(q.bloch()),
        }
    }
}

impl PureQubit {
    /// Rejects amplitudes whose squared norm strays from 1 by more than
    /// [`NORM_TOL`].
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self, QmathError> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(QmathError::NotNormalized {
                norm: norm_sqr.sqrt(),
            });
        }
        Ok(PureQubit { alpha, beta })
    }

    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self, QmathError> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if n.is_nan() || n <= 1e-300 || !n.is_finite() {
            return Err(QmathError::ZeroVector);
        }
        Ok(PureQubit {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    pub fn from_ket(v: &[Complex64]) -> Result<Self, QmathError> {
        if v.len() != 2 {
            return Err(QmathError::ShapeMismatch {
                expected: 2,
                actual: v.len(),
            });
        }
        Self::normalized(v[0], v[1])
    }

    /// Spin-up along the direction `n` (normalised internally).
    pub fn from_bloch(n: [f64; 3]) -> Result<Self, QmathError> {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if len.is_nan() || len <= 1e-300 || !len.is_finite() {
            return Err(QmathError::ZeroVector);
        }
        let (x, y, z) = (n[0] / len, n[1] / len, n[2] / len);
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        Ok(PureQubit {
            alpha: Complex64::new((theta / 2.0).cos(), 0.0),
            beta: Complex64::from_polar((theta / 2.0).sin(), phi),
        })
    }

    pub fn up_z() -> Self {
        PureQubit {
            alpha: ONE,
            beta: ZERO,
        }
    }

    pub fn down_z() -> Self {
        PureQubit {
            alpha: ZERO,
            beta: ONE,
        }
    }

    pub fn up_x() -> Self {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        PureQubit { alpha: s, beta: s }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn ket(&self) -> Vec<Complex64> {
        vec![self.alpha, self.beta]
    }

    /// Unit Bloch vector `(2 Re ᾱβ, 2 Im ᾱβ, |α|² − |β|²)`.
    pub fn bloch(&self) -> [f64; 3] {
        let ab = self.alpha.conj() * self.beta;
        [
            2.0 * ab.re,
            2.0 * ab.im,
            self.alpha.norm_sqr() - self.beta.norm_sqr(),
        ]
    }

    /// `|φ⟩⟨φ|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.ket())
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure_unchecked(&self.ket())
    }

    /// The orthogonal state `σ_y |φ*⟩ = (−i β̄, i ᾱ)`.
    pub fn orthogonal(&self) -> Self {
        let i = Complex64::new(0.0, 1.0);
        PureQubit {
            alpha: -i * self.beta.conj(),
            beta: i * self.alpha.conj(),
        }
    }

    /// `|⟨self|other⟩|²`, phase-invariant.
    pub fn fidelity(&self, other: &PureQubit) -> f64 {
        inner(&self.ket(), &other.ket()).norm_sqr().min(1.0)
    }

    /// `U|φ⟩` for a 2×2 unitary.
    pub fn transformed(&self, u: &ComplexMatrix) -> Result<Self, QmathError> {
        if u.rows() != 2 || u.cols() != 2 {
            return Err(QmathError::DimensionMismatch {
                left: (u.rows(), u.cols()),
                right: (2, 2),
            });
        }
        Self::from_ket(&u.apply(&self.ket()))
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = QmathError;

    fn try_from(m: ComplexMatrix) -> Result<Self, QmathError> {
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.matrix
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace (each within
    /// [`DENSITY_TOL`]) and stores the Hermitian part.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QmathError> {
        if !matrix.is_square() {
            return Err(QmathError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > DENSITY_TOL {
            return Err(QmathError::NotHermitian {
                deviation,
                tol: DENSITY_TOL,
            });
        }
        let matrix = matrix.hermitian_part();
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > DENSITY_TOL {
            return Err(QmathError::InvalidTrace { trace });
        }
        let min = min_eigenvalue(&matrix, DENSITY_TOL)?;
        if min < -DENSITY_TOL {
            return Err(QmathError::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(DensityMatrix { matrix })
    }

    /// Rescales a nonzero PSD operator to unit trace, then validates.
    pub fn from_unnormalized(matrix: ComplexMatrix) -> Result<Self, QmathError> {
        let trace = matrix.trace().re;
        if trace.is_nan() || trace <= 0.0 {
            return Err(QmathError::InvalidTrace { trace });
        }
        Self::new(matrix.scale_real(1.0 / trace))
    }

    /// `|v⟩⟨v|/⟨v|v⟩`.
    pub fn from_pure(v: &[Complex64]) -> Result<Self, QmathError> {
        let n = vec_norm(v);
        if n.is_nan() || n <= 1e-300 {
            return Err(QmathError::ZeroVector);
        }
        let scaled: Vec<Complex64> = v.iter().map(|z| z / n).collect();
        Ok(Self::from_pure_unchecked(&scaled))
    }

    fn from_pure_unchecked(unit: &[Complex64]) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::projector(unit).hermitian_part(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// The 1×1 state `[1]` of a trivial system.
    pub fn trivial() -> Self {
        Self::maximally_mixed(1)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `⟨v|ρ|v⟩`.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        self.matrix.expectation(v).re
    }
}
