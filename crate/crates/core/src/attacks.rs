//! Constructive attacks on convincing messages.
//!
//! A fully classical message gives the state away outright: the test
//! observable has `φ` as its unique eigenvalue-1 eigenvector.
//!
//! With an ancilla the attack is an extraction measurement. Every vector
//! `Ψ_k` of the complement of `A`'s eigenvalue-1 eigenspace can be written
//! `(W_k ⊗ I)|singlet⟩`. If the message is certain to pass on `ρ ⊗ |φ⟩⟨φ|`,
//! each `W_k†ρW_k` is supported on `φ` alone, so the instrument with branches
//! `W_k† / √(Σ_j Tr W_j†W_j)` applied to the ancilla leaves behind an exact
//! copy of `φ` whenever a `W` branch fires. A final `fail` branch completes
//! the instrument.

use serde::Serialize;
use thiserror::Error;

use crate::protocol::{test_observable, ProtocolError, TestMessage};
use crate::qmath::{
    hermitian_eig, operator_from_singlet, Complex64, ComplexMatrix, DensityMatrix, PureQubit,
    QmathError, SeededRng, EIGENVALUE_ONE_TOL,
};
use crate::quantum::{
    apply_instrument, completing_branch, Branch, Instrument, QuantumError, FAIL_LABEL,
};

/// Star-condition values at or below this count as zero.
pub const STAR_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error(transparent)]
    Math(#[from] QmathError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("message carries a {ancilla_dim}-dimensional ancilla; reconstruction needs a fully classical message")]
    NotClassical { ancilla_dim: usize },
    #[error("eigenvalue-1 eigenspace of the test observable has dimension {unit_eigenspace_dim}, expected 1")]
    Degenerate { unit_eigenspace_dim: usize },
    #[error("test observable is the identity: its eigenvalue-1 eigenspace has no complement")]
    EmptyComplement,
    #[error("ancilla dimension {actual} does not match plan dimension {expected}")]
    AncillaMismatch { expected: usize, actual: usize },
}

/// Reads `φ` off a fully classical message: the unique eigenvector of
/// `X = Σ_{i∈I} V_i†V_i` at eigenvalue 1.
pub fn reconstruct_from_classical(msg: &TestMessage) -> Result<PureQubit, AttackError> {
    if !msg.is_classical() {
        return Err(AttackError::NotClassical {
            ancilla_dim: msg.ancilla_dim(),
        });
    }
    let x = test_observable(msg);
    let eig = hermitian_eig(&x, 1e-8)?;
    let unit: Vec<usize> = (0..eig.dim())
        .filter(|&j| eig.values[j] >= 1.0 - EIGENVALUE_ONE_TOL)
        .collect();
    if unit.len() != 1 {
        return Err(AttackError::Degenerate {
            unit_eigenspace_dim: unit.len(),
        });
    }
    Ok(PureQubit::from_ket(&eig.vector(unit[0]))?)
}

/// Everything needed to run the extraction measurement on an ancilla.
#[derive(Debug, Clone, Serialize)]
pub struct ExtractionPlan {
    pub ancilla_dim: usize,
    /// `P_A`, projector onto the eigenvalue-1 eigenspace of `A`.
    #[serde(skip)]
    pub projector: ComplexMatrix,
    /// Orthonormal `Ψ_k` spanning the complement of `P_A`.
    pub basis_perp: Vec<Vec<Complex64>>,
    /// `W_k` (`ancilla_dim × 2`) with `(W_k ⊗ I)|singlet⟩ = Ψ_k`.
    pub operators: Vec<ComplexMatrix>,
    /// `Σ_k Tr(W_k†W_k)`.
    pub normalization: f64,
    /// Branches `w1..wN` (ancilla → qubit) followed by `fail` (on the ancilla).
    pub instrument: Instrument,
}

impl ExtractionPlan {
    /// Builds the plan from an explicit complement basis. Any orthonormal
    /// basis of the same subspace yields the same statistics.
    pub fn from_complement_basis(
        projector: ComplexMatrix,
        basis_perp: Vec<Vec<Complex64>>,
        ancilla_dim: usize,
    ) -> Result<Self, AttackError> {
        if basis_perp.is_empty() {
            return Err(AttackError::EmptyComplement);
        }
        let operators = basis_perp
            .iter()
            .map(|psi| operator_from_singlet(psi, ancilla_dim))
            .collect::<Result<Vec<_>, _>>()?;
        let normalization: f64 = operators
            .iter()
            .map(|w| (&w.adjoint() * w).trace().re)
            .sum();
        let scale = 1.0 / normalization.sqrt();
        let branches: Vec<Branch> = operators
            .iter()
            .enumerate()
            .map(|(k, w)| Branch::new(format!("w{}", k + 1), w.adjoint().scale_real(scale)))
            .collect();
        let partial = Instrument::new(ancilla_dim, 2, branches.clone())?;
        let instrument = match completing_branch(&partial) {
            Ok(done) => done,
            // Already exact (one-dimensional ancilla): keep a null fail branch
            // so every plan has the same branch layout.
            Err(QuantumError::NotSubNormalized { .. }) => {
                let mut branches = branches;
                branches.push(Branch::new(
                    FAIL_LABEL,
                    ComplexMatrix::zeros(ancilla_dim, ancilla_dim),
                ));
                Instrument::new(ancilla_dim, 2, branches)?
            }
            Err(e) => return Err(e.into()),
        };
        Ok(ExtractionPlan {
            ancilla_dim,
            projector,
            basis_perp,
            operators,
            normalization,
            instrument,
        })
    }

    pub fn complement_dim(&self) -> usize {
        self.basis_perp.len()
    }

    fn check_ancilla(&self, ancilla: &DensityMatrix) -> Result<(), AttackError> {
        if ancilla.dim() != self.ancilla_dim {
            return Err(AttackError::AncillaMismatch {
                expected: self.ancilla_dim,
                actual: ancilla.dim(),
            });
        }
        Ok(())
    }

    /// `Tr(W_k†ρW_k)` for every `k`.
    pub fn branch_weights(&self, ancilla: &DensityMatrix) -> Result<Vec<f64>, AttackError> {
        self.check_ancilla(ancilla)?;
        Ok(self
            .operators
            .iter()
            .map(|w| {
                ancilla
                    .matrix()
                    .sandwich(&w.adjoint())
                    .map(|m| m.trace().re)
            })
            .collect::<Result<_, _>>()?)
    }
}

/// Diagonalises the test observable and splits off the complement of its
/// eigenvalue-1 eigenspace (eigenvalues below `1 − tol`).
pub fn build_extraction_plan(msg: &TestMessage, tol: f64) -> Result<ExtractionPlan, AttackError> {
    let a = test_observable(msg);
    let eig = hermitian_eig(&a, 1e-8)?;
    let n = eig.dim();
    let mut projector = ComplexMatrix::zeros(n, n);
    let mut basis_perp = Vec::new();
    for j in 0..n {
        let v = eig.vector(j);
        if eig.values[j] < 1.0 - tol {
            basis_perp.push(v);
        } else {
            projector = &projector + &ComplexMatrix::projector(&v);
        }
    }
    ExtractionPlan::from_complement_basis(projector, basis_perp, msg.ancilla_dim())
}

/// `Tr(W_k†ρW_k |φ⊥⟩⟨φ⊥|)` for every `k`, with `|φ⊥⟩ = σ_y|φ*⟩`.
pub fn star_values(
    plan: &ExtractionPlan,
    ancilla: &DensityMatrix,
    phi: &PureQubit,
) -> Result<Vec<f64>, AttackError> {
    plan.check_ancilla(ancilla)?;
    let perp = phi.orthogonal().ket();
    Ok(plan
        .operators
        .iter()
        .map(|w| ancilla.expectation(&w.apply(&perp)))
        .collect())
}

/// True iff every `Tr(W_k†ρW_k |φ⊥⟩⟨φ⊥|)` vanishes (within [`STAR_TOL`]).
pub fn verify_star_condition(
    plan: &ExtractionPlan,
    ancilla: &DensityMatrix,
    phi: &PureQubit,
) -> Result<bool, AttackError> {
    Ok(star_values(plan, ancilla, phi)?
        .into_iter()
        .all(|v| v <= STAR_TOL))
}

/// `Σ_k Tr(W_k†ρW_k) / Σ_k Tr(W_k†W_k)`: the chance that some `W` branch
/// fires.
pub fn extraction_success_probability(
    plan: &ExtractionPlan,
    ancilla: &DensityMatrix,
) -> Result<f64, AttackError> {
    let total: f64 = plan.branch_weights(ancilla)?.iter().sum();
    Ok((total / plan.normalization).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionResult {
    pub success: bool,
    pub branch: String,
    /// Born probability of the branch that fired.
    pub probability: f64,
    /// `W_k†ρW_k / Tr(W_k†ρW_k)` on success.
    pub reconstructed: Option<DensityMatrix>,
    /// Ancilla left by the `fail` branch.
    pub residual_ancilla: Option<DensityMatrix>,
}

/// Runs the extraction instrument on the ancilla once.
pub fn extract_copy(
    plan: &ExtractionPlan,
    ancilla: &DensityMatrix,
    rng: &mut SeededRng,
) -> Result<ExtractionResult, AttackError> {
    plan.check_ancilla(ancilla)?;
    let out = apply_instrument(&plan.instrument, ancilla, rng)?;
    let success = out.label != FAIL_LABEL;
    Ok(ExtractionResult {
        success,
        branch: out.label,
        probability: out.probability,
        reconstructed: success.then(|| out.post_state.clone()),
        residual_ancilla: (!success).then_some(out.post_state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::check_convincing;
    use crate::qmath::{random_orthonormal_completion, singlet, tensor, ONE};
    use crate::quantum::{
        antisymmetric_projector, symmetric_projector, validate_instrument, InstrumentClass,
    };

    fn scp(phi: &PureQubit) -> TestMessage {
        let inst = Instrument::new(
            4,
            4,
            vec![
                Branch::new("sym", symmetric_projector()),
                Branch::new("anti", antisymmetric_projector()),
            ],
        )
        .unwrap();
        TestMessage::new(inst, vec!["sym".into()], Some(phi.density()), "").unwrap()
    }

    fn classical(n: [f64; 3]) -> TestMessage {
        let up = PureQubit::from_bloch(n).unwrap();
        let down = up.orthogonal();
        let inst = Instrument::new(
            2,
            2,
            vec![
                Branch::new("up", up.projector()),
                Branch::new("down", down.projector()),
            ],
        )
        .unwrap();
        TestMessage::new(inst, vec!["up".into()], None, "").unwrap()
    }

    #[test]
    fn classical_reconstruction() {
        let n = [0.48, -0.6, 0.64];
        let got = reconstruct_from_classical(&classical(n)).unwrap();
        assert!(got.fidelity(&PureQubit::from_bloch(n).unwrap()) >= 1.0 - 1e-12);
        let z = reconstruct_from_classical(&classical([0.0, 0.0, 1.0])).unwrap();
        assert!(z.fidelity(&PureQubit::up_z()) >= 1.0 - 1e-15);
    }

    #[test]
    fn classical_reconstruction_errors() {
        let msg = classical([0.0, 0.0, 1.0]);
        let all = TestMessage::new(
            msg.instrument().clone(),
            vec!["up".into(), "down".into()],
            None,
            "",
        )
        .unwrap();
        assert!(matches!(
            reconstruct_from_classical(&all),
            Err(AttackError::Degenerate {
                unit_eigenspace_dim: 2
            })
        ));
        assert!(matches!(
            reconstruct_from_classical(&scp(&PureQubit::up_z())),
            Err(AttackError::NotClassical { ancilla_dim: 2 })
        ));
    }

    #[test]
    fn scp_plan_structure() {
        let phi = PureQubit::from_bloch([0.2, 0.3, -0.9]).unwrap();
        let plan = build_extraction_plan(&scp(&phi), EIGENVALUE_ONE_TOL).unwrap();
        assert_eq!(plan.complement_dim(), 1);
        // Ψ₁ is the singlet up to phase, so W₁ is the identity up to phase.
        let overlap = crate::qmath::inner(&plan.basis_perp[0], &singlet());
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        let w = &plan.operators[0];
        let phase = w[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!(w.approx_eq(&ComplexMatrix::identity(2).scale(phase), 1e-12));
        assert!((plan.normalization - 2.0).abs() < 1e-12);
        let fail = &plan.instrument.branches()[1].matrix;
        assert!(fail.approx_eq(
            &ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2),
            1e-12
        ));
        assert!(
            (extraction_success_probability(&plan, &phi.density()).unwrap() - 0.5).abs() < 1e-12
        );
    }

    #[test]
    fn plan_vectors_round_trip_through_singlet() {
        let phi = PureQubit::from_bloch([0.7, 0.1, 0.2]).unwrap();
        let plan = build_extraction_plan(&scp(&phi), EIGENVALUE_ONE_TOL).unwrap();
        for (w, psi) in plan.operators.iter().zip(&plan.basis_perp) {
            let rebuilt = tensor(w, &ComplexMatrix::identity(2)).apply(&singlet());
            for (a, b) in rebuilt.iter().zip(psi) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn classical_plan_is_valid_and_certain() {
        let n = [0.0, 0.6, 0.8];
        let plan = build_extraction_plan(&classical(n), EIGENVALUE_ONE_TOL).unwrap();
        assert_eq!(plan.operators[0].rows(), 1);
        let diag = validate_instrument(&plan.instrument).unwrap();
        assert_eq!(diag.class, InstrumentClass::Exact);
        let trivial = DensityMatrix::trivial();
        assert!((extraction_success_probability(&plan, &trivial).unwrap() - 1.0).abs() < 1e-12);
        let out = extract_copy(&plan, &trivial, &mut SeededRng::new(0, 0)).unwrap();
        assert!(out.success);
        let copy = out.reconstructed.unwrap();
        let target = PureQubit::from_bloch(n).unwrap();
        assert!(copy.expectation(&target.ket()) >= 1.0 - 1e-12);
    }

    #[test]
    fn empty_complement() {
        let msg = classical([0.0, 0.0, 1.0]);
        let all = TestMessage::new(
            msg.instrument().clone(),
            vec!["up".into(), "down".into()],
            None,
            "",
        )
        .unwrap();
        assert!(matches!(
            build_extraction_plan(&all, EIGENVALUE_ONE_TOL),
            Err(AttackError::EmptyComplement)
        ));
    }

    #[test]
    fn star_condition_on_scp() {
        let phi = PureQubit::from_bloch([0.1, -0.4, 0.6]).unwrap();
        let msg = scp(&phi);
        let plan = build_extraction_plan(&msg, EIGENVALUE_ONE_TOL).unwrap();
        let rho = phi.density();
        assert!(verify_star_condition(&plan, &rho, &phi).unwrap());
        // Bloch vectors at 90° give fidelity 1/2.
        let other = PureQubit::up_z();
        let half = PureQubit::up_x();
        assert!((other.fidelity(&half) - 0.5).abs() < 1e-12);
        let plan = build_extraction_plan(&scp(&other), EIGENVALUE_ONE_TOL).unwrap();
        let v = star_values(&plan, &other.density(), &half).unwrap();
        // W = phase·I, so the value is ⟨half⊥|↑⟩⟨↑|half⊥⟩ = 1/2.
        assert!((v[0] - 0.5).abs() < 1e-12);
        assert!(!verify_star_condition(&plan, &other.density(), &half).unwrap());
    }

    #[test]
    fn scp_extraction_sampling() {
        let phi = PureQubit::from_bloch([-0.3, 0.5, 0.1]).unwrap();
        let plan = build_extraction_plan(&scp(&phi), EIGENVALUE_ONE_TOL).unwrap();
        let rho = phi.density();
        let mut rng = SeededRng::new(9, 0);
        let n = 10_000;
        let mut hits = 0;
        for _ in 0..n {
            let out = extract_copy(&plan, &rho, &mut rng).unwrap();
            if out.success {
                hits += 1;
                let copy = out.reconstructed.unwrap();
                assert!(copy.expectation(&phi.ket()) >= 1.0 - 1e-8);
            } else {
                let residual = out.residual_ancilla.unwrap();
                assert!(residual.matrix().approx_eq(&phi.projector(), 1e-10));
            }
        }
        assert!((hits as f64 / n as f64 - 0.5).abs() <= 0.015);
    }

    #[test]
    fn rotated_complement_basis_gives_same_statistics() {
        // Random mixed ancilla with a two-dimensional complement.
        let mut rng = SeededRng::new(21, 0);
        let phi = PureQubit::from_bloch([0.4, 0.4, -0.2]).unwrap();
        let rho = DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.7, 0.3])).unwrap();
        let perp = phi.orthogonal().ket();
        let basis = vec![
            crate::qmath::tensor_vec(&[ONE, crate::qmath::ZERO], &perp),
            crate::qmath::tensor_vec(&[crate::qmath::ZERO, ONE], &perp),
        ];
        let projector = &ComplexMatrix::identity(4)
            - &(&ComplexMatrix::projector(&basis[0]) + &ComplexMatrix::projector(&basis[1]));
        let plan =
            ExtractionPlan::from_complement_basis(projector.clone(), basis.clone(), 2).unwrap();
        let u = random_orthonormal_completion(&[], 2, 2, &mut rng);
        let rotated: Vec<Vec<Complex64>> = (0..2)
            .map(|k| {
                (0..4)
                    .map(|i| u[k][0] * basis[0][i] + u[k][1] * basis[1][i])
                    .collect()
            })
            .collect();
        let plan2 = ExtractionPlan::from_complement_basis(projector, rotated, 2).unwrap();
        let p1 = extraction_success_probability(&plan, &rho).unwrap();
        let p2 = extraction_success_probability(&plan2, &rho).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
        assert!((p1 - 0.5).abs() < 1e-12);
        assert!(verify_star_condition(&plan2, &rho, &phi).unwrap());
        for _ in 0..200 {
            let out = extract_copy(&plan2, &rho, &mut rng).unwrap();
            if let Some(copy) = out.reconstructed {
                assert!(copy.expectation(&phi.ket()) >= 1.0 - 1e-8);
            }
        }
    }

    #[test]
    fn star_matches_condition_one_on_scp_family() {
        let mut rng = SeededRng::new(4, 0);
        for _ in 0..50 {
            let phi = crate::qmath::sample_haar_qubit(&mut rng);
            let other = crate::qmath::sample_haar_qubit(&mut rng);
            let msg = scp(&phi);
            let plan = build_extraction_plan(&msg, EIGENVALUE_ONE_TOL).unwrap();
            for state in [phi, other] {
                let c1 = check_convincing(&msg, &state).unwrap().condition1;
                let star = verify_star_condition(&plan, &phi.density(), &state).unwrap();
                assert_eq!(c1, star);
            }
        }
    }
}
