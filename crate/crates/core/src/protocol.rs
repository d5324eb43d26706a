//! Alice's test messages and the checker for whether a message is
//! convincing.
//!
//! A message bundles a classical description (an exact instrument on
//! `ancilla ⊗ qubit` plus the set of labels Alice predicts), an optional
//! ancilla state `ρ`, and free-text commentary. Without an ancilla the
//! message is fully classical and the ancilla space is one-dimensional.
//!
//! Everything the checker needs is contained in the 2×2 response operator
//! `M = Tr_anc[(ρ ⊗ I) A]`, where `A` is the test observable: for every
//! qubit state `φ'` the predicted outcome occurs with probability
//! `⟨φ'|M|φ'⟩ = Tr(A ρ⊗|φ'⟩⟨φ'|)`.
//!
//! * Condition 1 (certainty for the true state): `⟨φ|M|φ⟩ ≥ 1 − 1e-9`.
//! * Condition 2 (verifiable from the description): the eigenvalue-1
//!   eigenspace of `M` is one-dimensional, its second eigenvalue is at most
//!   `1 − 1e-6`, and its eigenvector is `φ`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{
    fibonacci_sphere, hermitian_eig, partial_trace, tensor, ComplexMatrix, DensityMatrix, Keep,
    PureQubit, QmathError, SeededRng, EIGENVALUE_ONE_TOL,
};
use crate::quantum::{apply_instrument, Branch, Completeness, Instrument, QuantumError};

/// `⟨φ|M|φ⟩` at or above `1 − CONDITION_ONE_TOL` counts as certainty.
pub const CONDITION_ONE_TOL: f64 = EIGENVALUE_ONE_TOL;
/// The second eigenvalue of `M` must not exceed `1 − CONDITION_TWO_GAP`.
pub const CONDITION_TWO_GAP: f64 = 1e-6;
/// Grid points with at least this fidelity to `φ` are exempt from the
/// oracle's uniqueness check.
pub const ORACLE_CAP_FIDELITY: f64 = 0.999;
/// Grid points outside the cap reaching `1 − ORACLE_PASS_TOL` refute
/// uniqueness.
pub const ORACLE_PASS_TOL: f64 = 1e-6;
pub const MIN_GRID_RESOLUTION: usize = 16;

/// Smallest spectral gap `1 − λ₂(M)` at which the brute-force oracle is
/// guaranteed to reproduce the spectral verdict: outside the cap the
/// acceptance probability is at most `1 − gap·(1 − cap)`.
pub fn oracle_resolution_bound() -> f64 {
    ORACLE_PASS_TOL / (1.0 - ORACLE_CAP_FIDELITY)
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Math(#[from] QmathError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("invalid test message: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("cannot parse test message: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("grid resolution {0} is below the minimum of {MIN_GRID_RESOLUTION}")]
    GridTooCoarse(usize),
}

/// Alice's one-shot test message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestMessage {
    ancilla: Option<DensityMatrix>,
    instrument: Instrument,
    accepted: Vec<String>,
    note: String,
}

#[derive(Deserialize)]
struct MessageRepr {
    ancilla: Option<ComplexMatrix>,
    instrument: RawInstrument,
    accepted: Vec<String>,
    #[serde(default)]
    note: String,
}

#[derive(Deserialize)]
struct RawInstrument {
    input_dim: usize,
    output_dim: usize,
    branches: Vec<Branch>,
    completeness: Completeness,
}

impl TestMessage {
    /// Validates the message invariants and collects every violation.
    ///
    /// Accepting every label is allowed; such a message can never satisfy
    /// condition 2 and the checker reports that.
    pub fn new(
        instrument: Instrument,
        accepted: Vec<String>,
        ancilla: Option<DensityMatrix>,
        note: impl Into<String>,
    ) -> Result<Self, ProtocolError> {
        let mut violations = Vec::new();
        if instrument.completeness() != Completeness::Exact {
            let diag = crate::quantum::validate_instrument(&instrument)?;
            violations.push(format!(
                "instrument is not complete: ‖ΣK†K − I‖ = {:e}",
                diag.deviation
            ));
        }
        let anc_dim = ancilla.as_ref().map_or(1, DensityMatrix::dim);
        if instrument.input_dim() != 2 * anc_dim {
            violations.push(format!(
                "instrument input dimension {} must equal ancilla dimension {} times 2",
                instrument.input_dim(),
                anc_dim
            ));
        }
        if accepted.is_empty() {
            violations.push("accepted label set is empty".to_string());
        }
        let labels = instrument.labels();
        for a in &accepted {
            if !labels.contains(&a.as_str()) {
                violations.push(format!("accepted label `{a}` is not a branch label"));
            }
        }
        if !violations.is_empty() {
            return Err(ProtocolError::Validation(violations));
        }
        let mut accepted = accepted;
        accepted.dedup();
        Ok(TestMessage {
            ancilla,
            instrument,
            accepted,
            note: note.into(),
        })
    }

    pub fn instrument(&self) -> &Instrument {
        &self.instrument
    }

    pub fn accepted(&self) -> &[String] {
        &self.accepted
    }

    pub fn ancilla(&self) -> Option<&DensityMatrix> {
        self.ancilla.as_ref()
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla.as_ref().map_or(1, DensityMatrix::dim)
    }

    /// No quantum part: the ancilla space is trivial.
    pub fn is_classical(&self) -> bool {
        self.ancilla_dim() == 1
    }

    /// The ancilla state, `[1]` for classical messages.
    pub fn ancilla_state(&self) -> DensityMatrix {
        self.ancilla.clone().unwrap_or_else(DensityMatrix::trivial)
    }

    pub fn accepts(&self, label: &str) -> bool {
        self.accepted.iter().any(|a| a == label)
    }

    /// `ρ ⊗ |φ⟩⟨φ|`, the state Bob's test acts on.
    pub fn joint_state(&self, phi: &PureQubit) -> Result<DensityMatrix, ProtocolError> {
        let joint = tensor(self.ancilla_state().matrix(), &phi.projector());
        Ok(DensityMatrix::new(joint)?)
    }

    /// Same message with a different ancilla (used to model cheating).
    pub fn with_ancilla(&self, ancilla: Option<DensityMatrix>) -> Result<Self, ProtocolError> {
        TestMessage::new(
            self.instrument.clone(),
            self.accepted.clone(),
            ancilla,
            self.note.clone(),
        )
    }
}

/// `A = Σ_{i ∈ I} K_i†K_i` on `ancilla ⊗ qubit`.
pub fn test_observable(msg: &TestMessage) -> ComplexMatrix {
    msg.instrument.effect(|b| msg.accepts(&b.label))
}

/// `M = Tr_anc[(ρ ⊗ I₂) A]`, so that `⟨φ'|M|φ'⟩ = Tr(A ρ⊗|φ'⟩⟨φ'|)`.
pub fn response_operator(msg: &TestMessage) -> ComplexMatrix {
    let a = test_observable(msg);
    let d = msg.ancilla_dim();
    let rho_i = tensor(msg.ancilla_state().matrix(), &ComplexMatrix::identity(2));
    partial_trace(&(&rho_i * &a), d, 2, Keep::Second)
        .expect("shapes fixed by message invariants")
        .hermitian_part()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvincingVerdict {
    pub condition1: bool,
    pub condition2: bool,
    /// `⟨φ|M|φ⟩`, the probability that Alice's prediction comes true.
    pub acceptance_probability: f64,
    pub response_operator: ComplexMatrix,
    pub top_eigenvalue: f64,
    pub second_eigenvalue: f64,
    pub certified_state: Option<PureQubit>,
}

impl ConvincingVerdict {
    pub fn is_convincing(&self) -> bool {
        self.condition1 && self.condition2
    }
}

/// Spectral check of both conditions against the state `phi`.
pub fn check_convincing(
    msg: &TestMessage,
    phi: &PureQubit,
) -> Result<ConvincingVerdict, ProtocolError> {
    let m = response_operator(msg);
    let eig = hermitian_eig(&m, 1e-9)?;
    let second_eigenvalue = eig.values[0];
    let top_eigenvalue = eig.values[1];
    let acceptance_probability = m.expectation(&phi.ket()).re;
    let condition1 = acceptance_probability >= 1.0 - CONDITION_ONE_TOL;

    let top = PureQubit::from_ket(&eig.vector(1))?;
    let unique_top =
        top_eigenvalue >= 1.0 - EIGENVALUE_ONE_TOL && second_eigenvalue <= 1.0 - CONDITION_TWO_GAP;
    let condition2 = unique_top && top.fidelity(phi) >= 1.0 - EIGENVALUE_ONE_TOL;

    Ok(ConvincingVerdict {
        condition1,
        condition2,
        acceptance_probability,
        response_operator: m,
        top_eigenvalue,
        second_eigenvalue,
        certified_state: condition2.then_some(top),
    })
}

/// Verdict of [`brute_force_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub condition1: bool,
    pub condition2: bool,
    pub acceptance_probability: f64,
    /// Largest acceptance probability among grid states outside the cap.
    pub max_outside_cap: f64,
    pub grid_points: usize,
}

impl OracleVerdict {
    pub fn agrees_with(&self, spectral: &ConvincingVerdict) -> bool {
        self.condition1 == spectral.condition1 && self.condition2 == spectral.condition2
    }
}

/// `Tr(A · ρ⊗|φ'⟩⟨φ'|)` over the full space.
fn full_space_acceptance(a: &ComplexMatrix, msg: &TestMessage, phi: &PureQubit) -> f64 {
    let joint = tensor(msg.ancilla_state().matrix(), &phi.projector());
    (a * &joint).trace().re
}

/// Direct quantification over a Fibonacci-sphere grid of trial states,
/// without the response-operator reduction or any eigendecomposition.
///
/// Condition 2 holds when condition 1 holds and no grid state outside the
/// fidelity-0.999 cap around `phi` is accepted with probability
/// `≥ 1 − 1e-6`.
pub fn brute_force_check(
    msg: &TestMessage,
    phi: &PureQubit,
    grid_resolution: usize,
) -> Result<OracleVerdict, ProtocolError> {
    if grid_resolution < MIN_GRID_RESOLUTION {
        return Err(ProtocolError::GridTooCoarse(grid_resolution));
    }
    let a = test_observable(msg);
    let acceptance_probability = full_space_acceptance(&a, msg, phi);
    let condition1 = acceptance_probability >= 1.0 - CONDITION_ONE_TOL;
    let mut max_outside_cap = f64::NEG_INFINITY;
    for n in fibonacci_sphere(grid_resolution) {
        let trial = PureQubit::from_bloch(n)?;
        if trial.fidelity(phi) >= ORACLE_CAP_FIDELITY {
            continue;
        }
        max_outside_cap = max_outside_cap.max(full_space_acceptance(&a, msg, &trial));
    }
    let condition2 = condition1 && max_outside_cap < 1.0 - ORACLE_PASS_TOL;
    Ok(OracleVerdict {
        condition1,
        condition2,
        acceptance_probability,
        max_outside_cap,
        grid_points: grid_resolution,
    })
}

/// Outcome of Bob running Alice's test on `ρ ⊗ |φ⟩⟨φ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestRun {
    pub passed: bool,
    pub label: String,
    pub probability: f64,
    /// Joint post-measurement state (on the branch's output space).
    pub post_state: DensityMatrix,
}

impl TestRun {
    /// Ancilla part of the post-state, when the branch kept the
    /// `ancilla ⊗ qubit` layout.
    pub fn ancilla_post_state(&self, ancilla_dim: usize) -> Result<DensityMatrix, ProtocolError> {
        let m = partial_trace(self.post_state.matrix(), ancilla_dim, 2, Keep::First)?;
        Ok(DensityMatrix::new(m)?)
    }

    pub fn qubit_post_state(&self, ancilla_dim: usize) -> Result<DensityMatrix, ProtocolError> {
        let m = partial_trace(self.post_state.matrix(), ancilla_dim, 2, Keep::Second)?;
        Ok(DensityMatrix::new(m)?)
    }
}

/// Performs Alice's measurement and reports whether her prediction came true.
pub fn run_test(
    msg: &TestMessage,
    bob_qubit: &PureQubit,
    rng: &mut SeededRng,
) -> Result<TestRun, ProtocolError> {
    let joint = msg.joint_state(bob_qubit)?;
    let out = apply_instrument(&msg.instrument, &joint, rng)?;
    Ok(TestRun {
        passed: msg.accepts(&out.label),
        label: out.label,
        probability: out.probability,
        post_state: out.post_state,
    })
}

/// Parses and validates a message from JSON text.
pub fn load_message(text: &str) -> Result<TestMessage, ProtocolError> {
    let repr: MessageRepr =
        serde_json::from_str(text).map_err(|e| ProtocolError::Parse(e.to_string()))?;
    let mut violations = Vec::new();
    let ancilla = match repr.ancilla.map(DensityMatrix::new).transpose() {
        Ok(a) => a,
        Err(e) => {
            violations.push(format!("ancilla is not a density matrix: {e}"));
            None
        }
    };
    let raw = repr.instrument;
    let instrument = match Instrument::new(raw.input_dim, raw.output_dim, raw.branches) {
        Ok(inst) => {
            if inst.completeness() != raw.completeness {
                violations.push(format!(
                    "instrument declared {:?} but its Kraus set is {:?}",
                    raw.completeness,
                    inst.completeness()
                ));
            }
            Some(inst)
        }
        Err(e) => {
            violations.push(e.to_string());
            None
        }
    };
    let Some(instrument) = instrument else {
        return Err(ProtocolError::Validation(violations));
    };
    match TestMessage::new(instrument, repr.accepted, ancilla, repr.note) {
        Ok(msg) if violations.is_empty() => Ok(msg),
        Ok(_) => Err(ProtocolError::Validation(violations)),
        Err(ProtocolError::Validation(more)) => {
            violations.extend(more);
            Err(ProtocolError::Validation(violations))
        }
        Err(e) => Err(e),
    }
}

/// Canonical JSON form (pretty-printed, shortest round-trip floats).
pub fn save_message(msg: &TestMessage) -> String {
    serde_json::to_string_pretty(msg).expect("message serialises")
}

pub fn load_message_file(path: impl AsRef<Path>) -> Result<TestMessage, ProtocolError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ProtocolError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_message(&text)
}

pub fn save_message_file(msg: &TestMessage, path: impl AsRef<Path>) -> Result<(), ProtocolError> {
    let path = path.as_ref();
    std::fs::write(path, save_message(msg) + "\n").map_err(|e| ProtocolError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{sample_haar_qubit, Complex64};
    use crate::quantum::{antisymmetric_projector, symmetric_projector};

    fn z_message() -> TestMessage {
        let inst = Instrument::new(
            2,
            2,
            vec![
                Branch::new("up", ComplexMatrix::from_real_diag(&[1.0, 0.0])),
                Branch::new("down", ComplexMatrix::from_real_diag(&[0.0, 1.0])),
            ],
        )
        .unwrap();
        TestMessage::new(inst, vec!["up".into()], None, "measure z").unwrap()
    }

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

    /// State at fidelity `f` with |↑_z⟩.
    fn at_fidelity(f: f64) -> PureQubit {
        PureQubit::new(
            Complex64::new(f.sqrt(), 0.0),
            Complex64::new((1.0 - f).sqrt(), 0.0),
        )
        .unwrap()
    }

    #[test]
    fn classical_z_observable() {
        let msg = z_message();
        assert!(test_observable(&msg).approx_eq(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), 1e-15));
        assert!(
            response_operator(&msg).approx_eq(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), 1e-15)
        );
    }

    #[test]
    fn scp_observable_and_response() {
        let phi = PureQubit::from_bloch([0.1, 0.5, -0.3]).unwrap();
        let msg = scp(&phi);
        assert!(test_observable(&msg).approx_eq(&symmetric_projector(), 1e-15));
        let expected = (&ComplexMatrix::identity(2) + &phi.projector()).scale_real(0.5);
        assert!(response_operator(&msg).approx_eq(&expected, 1e-14));
    }

    #[test]
    fn accepting_everything_gives_identity() {
        let msg = z_message();
        let all = TestMessage::new(
            msg.instrument().clone(),
            vec!["up".into(), "down".into()],
            None,
            "",
        )
        .unwrap();
        assert!(test_observable(&all).approx_eq(&ComplexMatrix::identity(2), 1e-10));
        let v = check_convincing(&all, &PureQubit::up_z()).unwrap();
        assert!(v.condition1 && !v.condition2);
        let o = brute_force_check(&all, &PureQubit::up_z(), 64).unwrap();
        assert!(o.condition1 && !o.condition2);
    }

    #[test]
    fn response_matches_full_space_trace() {
        // Random ancilla and random pass/fail split of a random Kraus set.
        let mut rng = SeededRng::new(11, 0);
        let g: Vec<Complex64> = (0..9).map(|_| rng.complex_normal()).collect();
        let g = ComplexMatrix::from_vec(3, 3, g).unwrap();
        let rho = DensityMatrix::from_unnormalized(&g * &g.adjoint()).unwrap();
        let h: Vec<Complex64> = (0..36).map(|_| rng.complex_normal()).collect();
        let h = ComplexMatrix::from_vec(6, 6, h).unwrap();
        let herm = (&h + &h.adjoint()).scale_real(0.5);
        let eig = hermitian_eig(&herm, 1e-9).unwrap();
        let a = eig.map_spectrum(|l| 1.0 / (1.0 + (-l).exp()));
        let pass = crate::qmath::matrix_sqrt_psd(&a, 1e-9).unwrap();
        let fail =
            crate::qmath::matrix_sqrt_psd(&(&ComplexMatrix::identity(6) - &a), 1e-9).unwrap();
        let inst = Instrument::new(
            6,
            6,
            vec![Branch::new("pass", pass), Branch::new("fail", fail)],
        )
        .unwrap();
        let msg = TestMessage::new(inst, vec!["pass".into()], Some(rho), "").unwrap();
        let m = response_operator(&msg);
        let a = test_observable(&msg);
        for _ in 0..100 {
            let q = sample_haar_qubit(&mut rng);
            let direct = full_space_acceptance(&a, &msg, &q);
            assert!((m.expectation(&q.ket()).re - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn classical_direction_verdicts() {
        let msg = z_message();
        let v = check_convincing(&msg, &PureQubit::up_z()).unwrap();
        assert!(v.condition1 && v.condition2);
        assert!(v.certified_state.unwrap().fidelity(&PureQubit::up_z()) > 1.0 - 1e-12);
        let v = check_convincing(&msg, &PureQubit::down_z()).unwrap();
        assert!(!v.condition1 && !v.condition2);
        assert!(v.acceptance_probability.abs() < 1e-15);
    }

    #[test]
    fn scp_verdicts() {
        let phi = PureQubit::up_z();
        let msg = scp(&phi);
        let v = check_convincing(&msg, &phi).unwrap();
        assert!(v.is_convincing());
        assert!(v.certified_state.unwrap().fidelity(&phi) > 1.0 - 1e-12);
        let v = check_convincing(&msg, &at_fidelity(0.9)).unwrap();
        assert!(!v.condition1);
        assert!((v.acceptance_probability - 0.95).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_on_examples() {
        let phi = PureQubit::from_bloch([0.3, 0.3, 0.9]).unwrap();
        for (msg, state) in [
            (z_message(), PureQubit::up_z()),
            (z_message(), PureQubit::down_z()),
            (scp(&phi), phi),
            (scp(&phi), at_fidelity(0.9)),
        ] {
            let s = check_convincing(&msg, &state).unwrap();
            let o = brute_force_check(&msg, &state, 2000).unwrap();
            assert!(o.agrees_with(&s), "{s:?} vs {o:?}");
        }
        assert!(matches!(
            brute_force_check(&z_message(), &PureQubit::up_z(), 8),
            Err(ProtocolError::GridTooCoarse(8))
        ));
    }

    #[test]
    fn run_test_frequencies() {
        let mut rng = SeededRng::new(2, 0);
        let phi = PureQubit::from_bloch([-0.2, 0.9, 0.1]).unwrap();
        let honest = scp(&phi);
        assert!((0..2000).all(|_| run_test(&honest, &phi, &mut rng).unwrap().passed));

        let cheat = scp(&phi.orthogonal());
        let n = 10_000;
        let passes = (0..n)
            .filter(|_| run_test(&cheat, &phi, &mut rng).unwrap().passed)
            .count();
        assert!((passes as f64 / n as f64 - 0.5).abs() <= 0.015);

        let passes = (0..n)
            .filter(|_| {
                run_test(&z_message(), &PureQubit::up_x(), &mut rng)
                    .unwrap()
                    .passed
            })
            .count();
        assert!((passes as f64 / n as f64 - 0.5).abs() <= 0.015);
    }

    #[test]
    fn honest_scp_post_state_is_product() {
        let phi = PureQubit::from_bloch([0.5, -0.5, 0.2]).unwrap();
        let msg = scp(&phi);
        let run = run_test(&msg, &phi, &mut SeededRng::new(0, 0)).unwrap();
        assert!(run.passed);
        assert!(run
            .ancilla_post_state(2)
            .unwrap()
            .matrix()
            .approx_eq(&phi.projector(), 1e-10));
        assert!(run
            .qubit_post_state(2)
            .unwrap()
            .matrix()
            .approx_eq(&phi.projector(), 1e-10));
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let msg = scp(&PureQubit::from_bloch([0.2, 0.4, 0.6]).unwrap());
        let text = save_message(&msg);
        let back = load_message(&text).unwrap();
        assert_eq!(back, msg);
        assert_eq!(save_message(&back), text);
    }

    #[test]
    fn missing_accepted_field_is_named() {
        let text = save_message(&z_message());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("accepted");
        let err = load_message(&v.to_string()).unwrap_err();
        assert!(matches!(err, ProtocolError::Parse(_)));
        assert!(err.to_string().contains("accepted"), "{err}");
    }

    #[test]
    fn incomplete_kraus_set_is_a_validation_error() {
        let text = save_message(&z_message());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        // Drop the "down" branch: ΣK†K = diag(1, 0).
        v["instrument"]["branches"].as_array_mut().unwrap().pop();
        v["instrument"]["completeness"] = "sub".into();
        let err = load_message(&v.to_string()).unwrap_err();
        match &err {
            ProtocolError::Validation(list) => {
                assert!(list.iter().any(|s| s.contains("ΣK†K")), "{list:?}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_labels_and_dims() {
        let inst = z_message().instrument().clone();
        let err = TestMessage::new(inst.clone(), vec![], None, "").unwrap_err();
        assert!(err.to_string().contains("empty"));
        let err = TestMessage::new(inst.clone(), vec!["left".into()], None, "").unwrap_err();
        assert!(err.to_string().contains("left"));
        let err = TestMessage::new(
            inst,
            vec!["up".into()],
            Some(DensityMatrix::maximally_mixed(2)),
            "",
        )
        .unwrap_err();
        assert!(err.to_string().contains("dimension"));
    }
}
