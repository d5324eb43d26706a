//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus the
//! spectral helpers built on it.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::QmathError;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues ascending; `vectors` holds the matching orthonormal columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, j: usize) -> Vec<Complex64> {
        self.vectors.col(j)
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Projector onto the span of the eigenvectors whose eigenvalue passes `pred`.
    pub fn spectral_projector(&self, pred: impl Fn(f64) -> bool) -> ComplexMatrix {
        let n = self.dim();
        let mut p = ComplexMatrix::zeros(n, n);
        for (j, &lambda) in self.values.iter().enumerate() {
            if pred(lambda) {
                p = &p + &ComplexMatrix::projector(&self.vector(j));
            }
        }
        p
    }

    /// Rebuilds `Σ f(λ_j) |v_j⟩⟨v_j|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (j, &lambda) in self.values.iter().enumerate() {
            let v = self.vector(j);
            out = &out + &ComplexMatrix::projector(&v).scale_real(f(lambda));
        }
        out
    }
}

/// Diagonalises a Hermitian matrix.
///
/// The input is symmetrised as `(M + M†)/2` first; an entrywise Hermiticity
/// defect above `tol` is rejected instead.
pub fn hermitian_eig(m: &ComplexMatrix, tol: f64) -> Result<HermitianEigen, QmathError> {
    if !m.is_square() {
        return Err(QmathError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol {
        return Err(QmathError::NotHermitian { deviation, tol });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm();
    if scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_col(dst, &v.col(src));
    }
    Ok(HermitianEigen { values, vectors })
}

/// One Jacobi step zeroing `a[p][q]`: `a ← U† a U`, `v ← v U`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let r = g.norm();
    if r < 1e-300 {
        return;
    }
    // Phase e = g/|g| reduces the pivot block to a real symmetric one.
    let e = g / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U = diag(1, ē) · [[c, s], [-s, c]]
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -e.conj() * s;
    let u_qq = e.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

/// Hermitian PSD square root. Eigenvalues in `[-tol, 0)` are clamped to zero.
pub fn matrix_sqrt_psd(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix, QmathError> {
    let eig = hermitian_eig(m, tol)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(QmathError::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix, tol: f64) -> Result<f64, QmathError> {
    Ok(hermitian_eig(m, tol)?
        .values
        .first()
        .copied()
        .unwrap_or(0.0))
}

/// The operator `W: C² → C^dim_anc` with `(W ⊗ I)|singlet⟩ = psi`, where
/// `|singlet⟩ = (|↑↓⟩ − |↓↑⟩)/√2` and the qubit is the fast index of `psi`.
pub fn operator_from_singlet(
    psi: &[Complex64],
    dim_anc: usize,
) -> Result<ComplexMatrix, QmathError> {
    if psi.len() != 2 * dim_anc {
        return Err(QmathError::ShapeMismatch {
            expected: 2 * dim_anc,
            actual: psi.len(),
        });
    }
    let r2 = std::f64::consts::SQRT_2;
    let mut w = ComplexMatrix::zeros(dim_anc, 2);
    for a in 0..dim_anc {
        w[(a, 0)] = psi[2 * a + 1] * r2;
        w[(a, 1)] = -psi[2 * a] * r2;
    }
    Ok(w)
}

/// `(|↑↓⟩ − |↓↑⟩)/√2`.
pub fn singlet() -> Vec<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![ZERO, ONE * s, -ONE * s, ZERO]
}
