//! Instruments (labelled Kraus sets), their validity diagnostics and Born-rule
//! sampling.
//!
//! A branch is one Kraus operator. Several branches may share a label: the
//! label names an observable outcome and the branches under it are its
//! elementary results. A branch may map the input space to a different output
//! space, so every outcome carries its own output dimension.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qmath::{
    hermitian_eig, matrix_sqrt_psd, tensor, ComplexMatrix, DensityMatrix, QmathError, SeededRng,
};

/// Completeness tolerance `‖Σ K†K − I‖_max`, also used as the PSD margin for
/// sub-normalised instruments.
pub const COMPLETENESS_TOL: f64 = 1e-9;
/// Born probabilities within this window outside `[0, 1]` are clamped.
pub const PROBABILITY_CLAMP: f64 = 1e-12;
/// Branches at or below this probability count as null.
pub const NULL_BRANCH_PROBABILITY: f64 = 1e-12;

pub const FAIL_LABEL: &str = "fail";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error(transparent)]
    Math(#[from] QmathError),
    #[error("instrument has no branches")]
    Empty,
    #[error("branch `{label}` is {rows}x{cols}, expected {expected_cols} columns and {expected_rows} rows")]
    BranchShape {
        label: String,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("Kraus set is invalid: ‖ΣK†K − I‖ = {deviation:e}, PSD margin {psd_margin:e}")]
    Invalid { deviation: f64, psd_margin: f64 },
    #[error("declared completeness {declared:?} but Kraus set is {actual:?}")]
    CompletenessMismatch {
        declared: Completeness,
        actual: Completeness,
    },
    #[error("state dimension {state} does not match instrument input dimension {input}")]
    DimensionMismatch { input: usize, state: usize },
    #[error("branch `{label}` has probability {probability:e}, outside [0, 1]")]
    ProbabilityOutOfRange { label: String, probability: f64 },
    #[error("every branch has null probability on this state")]
    AllBranchesNull,
    #[error("instrument is not sub-normalised (defect ‖I − ΣK†K‖ = {defect:e})")]
    NotSubNormalized { defect: f64 },
    #[error("label `{0}` is already used")]
    DuplicateLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "sub")]
    SubNormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentClass {
    Exact,
    SubNormalized,
    Invalid,
}

/// Result of [`validate_instrument`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstrumentDiagnostic {
    /// `‖Σ K†K − I‖_max`.
    pub deviation: f64,
    /// Smallest eigenvalue of `I − Σ K†K`.
    pub psd_margin: f64,
    pub class: InstrumentClass,
    /// `I − Σ K†K`.
    #[serde(skip)]
    pub defect: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    pub matrix: ComplexMatrix,
}

impl Branch {
    pub fn new(label: impl Into<String>, matrix: ComplexMatrix) -> Self {
        Branch {
            label: label.into(),
            matrix,
        }
    }
}

/// A generalised measurement with labelled Kraus branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentRepr", into = "InstrumentRepr")]
pub struct Instrument {
    input_dim: usize,
    output_dim: usize,
    branches: Vec<Branch>,
    completeness: Completeness,
}

#[derive(Serialize, Deserialize)]
struct InstrumentRepr {
    input_dim: usize,
    output_dim: usize,
    branches: Vec<Branch>,
    completeness: Completeness,
}

impl TryFrom<InstrumentRepr> for Instrument {
    type Error = QuantumError;

    fn try_from(r: InstrumentRepr) -> Result<Self, QuantumError> {
        let inst = Instrument::new(r.input_dim, r.output_dim, r.branches)?;
        if inst.completeness != r.completeness {
            return Err(QuantumError::CompletenessMismatch {
                declared: r.completeness,
                actual: inst.completeness,
            });
        }
        Ok(inst)
    }
}

impl From<Instrument> for InstrumentRepr {
    fn from(i: Instrument) -> Self {
        InstrumentRepr {
            input_dim: i.input_dim,
            output_dim: i.output_dim,
            branches: i.branches,
            completeness: i.completeness,
        }
    }
}

impl Instrument {
    /// Builds and classifies an instrument; invalid (over-complete) Kraus sets
    /// are rejected.
    ///
    /// Every branch must take `input_dim` columns. Its rows must be
    /// `output_dim`, or `input_dim` for branches that leave the system on the
    /// input space (failure branches).
    pub fn new(
        input_dim: usize,
        output_dim: usize,
        branches: Vec<Branch>,
    ) -> Result<Self, QuantumError> {
        if branches.is_empty() {
            return Err(QuantumError::Empty);
        }
        for b in &branches {
            let (r, c) = (b.matrix.rows(), b.matrix.cols());
            if c != input_dim || (r != output_dim && r != input_dim) {
                return Err(QuantumError::BranchShape {
                    label: b.label.clone(),
                    rows: r,
                    cols: c,
                    expected_rows: output_dim,
                    expected_cols: input_dim,
                });
            }
        }
        let mut inst = Instrument {
            input_dim,
            output_dim,
            branches,
            completeness: Completeness::Exact,
        };
        let diag = validate_instrument(&inst)?;
        inst.completeness = match diag.class {
            InstrumentClass::Exact => Completeness::Exact,
            InstrumentClass::SubNormalized => Completeness::SubNormalized,
            InstrumentClass::Invalid => {
                return Err(QuantumError::Invalid {
                    deviation: diag.deviation,
                    psd_margin: diag.psd_margin,
                })
            }
        };
        Ok(inst)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn completeness(&self) -> Completeness {
        self.completeness
    }

    /// Distinct labels in order of first appearance.
    pub fn labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for b in &self.branches {
            if !out.contains(&b.label.as_str()) {
                out.push(&b.label);
            }
        }
        out
    }

    /// `Σ K†K` over the branches selected by `pred`.
    pub fn effect(&self, pred: impl Fn(&Branch) -> bool) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.input_dim, self.input_dim);
        for b in self.branches.iter().filter(|b| pred(b)) {
            acc = &acc + &(&b.matrix.adjoint() * &b.matrix);
        }
        acc.hermitian_part()
    }

    /// The same instrument acting on `ancilla ⊗ system`, identity on the ancilla.
    pub fn lifted_after(&self, ancilla_dim: usize) -> Result<Self, QuantumError> {
        let id = ComplexMatrix::identity(ancilla_dim);
        let branches = self
            .branches
            .iter()
            .map(|b| Branch::new(b.label.clone(), tensor(&id, &b.matrix)))
            .collect();
        Instrument::new(
            self.input_dim * ancilla_dim,
            self.output_dim * ancilla_dim,
            branches,
        )
    }
}

/// Reports `‖Σ K†K − I‖_max`, the PSD margin of `I − Σ K†K` and the resulting
/// class. Fails only on shape problems.
pub fn validate_instrument(inst: &Instrument) -> Result<InstrumentDiagnostic, QuantumError> {
    let sum = inst.effect(|_| true);
    let defect = &ComplexMatrix::identity(inst.input_dim) - &sum;
    let deviation = defect.max_abs();
    let psd_margin = hermitian_eig(&defect, 1e-8)?.values[0];
    let class = if deviation <= COMPLETENESS_TOL {
        InstrumentClass::Exact
    } else if psd_margin >= -COMPLETENESS_TOL {
        InstrumentClass::SubNormalized
    } else {
        InstrumentClass::Invalid
    };
    Ok(InstrumentDiagnostic {
        deviation,
        psd_margin,
        class,
        defect,
    })
}

fn check_dims(inst: &Instrument, state: &DensityMatrix) -> Result<(), QuantumError> {
    if inst.input_dim != state.dim() {
        return Err(QuantumError::DimensionMismatch {
            input: inst.input_dim,
            state: state.dim(),
        });
    }
    Ok(())
}

/// Born probability `Tr(K ρ K†)` of every branch, in branch order.
pub fn branch_probabilities(
    inst: &Instrument,
    state: &DensityMatrix,
) -> Result<Vec<f64>, QuantumError> {
    check_dims(inst, state)?;
    inst.branches
        .iter()
        .map(|b| {
            let raw = state.matrix().sandwich(&b.matrix)?.trace().re;
            if !(-PROBABILITY_CLAMP..=1.0 + PROBABILITY_CLAMP).contains(&raw) {
                return Err(QuantumError::ProbabilityOutOfRange {
                    label: b.label.clone(),
                    probability: raw,
                });
            }
            Ok(raw.clamp(0.0, 1.0))
        })
        .collect()
}

/// `(label, p)` per branch. Branches sharing a label are listed separately.
pub fn outcome_probabilities(
    inst: &Instrument,
    state: &DensityMatrix,
) -> Result<Vec<(String, f64)>, QuantumError> {
    let probs = branch_probabilities(inst, state)?;
    Ok(inst
        .branches
        .iter()
        .zip(probs)
        .map(|(b, p)| (b.label.clone(), p))
        .collect())
}

/// Probability of each distinct label, summed over its branches.
pub fn label_probabilities(
    inst: &Instrument,
    state: &DensityMatrix,
) -> Result<Vec<(String, f64)>, QuantumError> {
    let probs = branch_probabilities(inst, state)?;
    let mut out: Vec<(String, f64)> = Vec::new();
    for (b, p) in inst.branches.iter().zip(probs) {
        match out.iter_mut().find(|(l, _)| *l == b.label) {
            Some((_, acc)) => *acc += p,
            None => out.push((b.label.clone(), p)),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub label: String,
    pub branch: usize,
    /// Unconditional Born probability of the sampled branch.
    pub probability: f64,
    pub post_state: DensityMatrix,
}

/// Samples one branch by its Born probability and returns the normalised
/// post-measurement state `KρK†/p`.
///
/// For a sub-normalised instrument the draw is conditioned on one of the
/// listed branches occurring.
pub fn apply_instrument(
    inst: &Instrument,
    state: &DensityMatrix,
    rng: &mut SeededRng,
) -> Result<MeasurementOutcome, QuantumError> {
    let probs = branch_probabilities(inst, state)?;
    let total: f64 = probs.iter().sum();
    if probs.iter().all(|&p| p <= NULL_BRANCH_PROBABILITY) {
        return Err(QuantumError::AllBranchesNull);
    }
    let u = rng.uniform() * total;
    let mut cum = 0.0;
    let mut chosen = None;
    for (i, &p) in probs.iter().enumerate() {
        if p <= NULL_BRANCH_PROBABILITY {
            continue;
        }
        cum += p;
        chosen = Some(i);
        if u < cum {
            break;
        }
    }
    let branch = chosen.expect("at least one non-null branch");
    let kraus = &inst.branches[branch].matrix;
    let post = state.matrix().sandwich(kraus)?.hermitian_part();
    let post_state = DensityMatrix::from_unnormalized(post)?;
    Ok(MeasurementOutcome {
        label: inst.branches[branch].label.clone(),
        branch,
        probability: probs[branch],
        post_state,
    })
}

/// Appends the branch `√(I − Σ K†K)` labelled `fail`, on the input space,
/// turning a sub-normalised instrument into an exact one.
pub fn completing_branch(inst: &Instrument) -> Result<Instrument, QuantumError> {
    let diag = validate_instrument(inst)?;
    if diag.class != InstrumentClass::SubNormalized {
        return Err(QuantumError::NotSubNormalized {
            defect: diag.deviation,
        });
    }
    if inst.branches.iter().any(|b| b.label == FAIL_LABEL) {
        return Err(QuantumError::DuplicateLabel(FAIL_LABEL.to_string()));
    }
    let fail = matrix_sqrt_psd(&diag.defect, 1e-8)?;
    let mut branches = inst.branches.clone();
    branches.push(Branch::new(FAIL_LABEL, fail));
    Instrument::new(inst.input_dim, inst.output_dim, branches)
}

/// Two-qubit SWAP.
pub fn swap() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            m[(b * 2 + a, a * 2 + b)] = crate::qmath::ONE;
        }
    }
    m
}

/// `(I + SWAP)/2`, the projector onto the symmetric two-qubit subspace.
pub fn symmetric_projector() -> ComplexMatrix {
    (&ComplexMatrix::identity(4) + &swap()).scale_real(0.5)
}

/// `(I − SWAP)/2 = |singlet⟩⟨singlet|`.
pub fn antisymmetric_projector() -> ComplexMatrix {
    (&ComplexMatrix::identity(4) - &swap()).scale_real(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{singlet, tensor_vec, PureQubit};

    fn z_measurement() -> Instrument {
        Instrument::new(
            2,
            2,
            vec![
                Branch::new("up", ComplexMatrix::from_real_diag(&[1.0, 0.0])),
                Branch::new("down", ComplexMatrix::from_real_diag(&[0.0, 1.0])),
            ],
        )
        .unwrap()
    }

    #[test]
    fn classifies_projective_pair_as_exact() {
        let diag = validate_instrument(&z_measurement()).unwrap();
        assert_eq!(diag.class, InstrumentClass::Exact);
        assert!(diag.deviation < 1e-15);
    }

    #[test]
    fn classifies_scaled_identity_as_sub() {
        let half = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let inst = Instrument::new(2, 2, vec![Branch::new("k", half)]).unwrap();
        let diag = validate_instrument(&inst).unwrap();
        assert_eq!(diag.class, InstrumentClass::SubNormalized);
        assert!(diag
            .defect
            .approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
        assert_eq!(inst.completeness(), Completeness::SubNormalized);
    }

    #[test]
    fn rejects_over_complete() {
        let id = ComplexMatrix::identity(2);
        let err = Instrument::new(
            2,
            2,
            vec![Branch::new("a", id.clone()), Branch::new("b", id)],
        );
        match err {
            Err(QuantumError::Invalid { deviation, .. }) => {
                assert!((deviation - 1.0).abs() < 1e-15)
            }
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn born_rule_on_tilted_state() {
        // Oracle: explicit 2x2 trace Tr(P ρ) with P diagonal.
        for &theta in &[0.0, 0.3, 1.2, 2.5, std::f64::consts::PI] {
            let q = PureQubit::from_bloch([theta.sin(), 0.0, theta.cos()]).unwrap();
            let rho = q.density();
            let probs = outcome_probabilities(&z_measurement(), &rho).unwrap();
            let p_up = rho.matrix()[(0, 0)].re;
            let p_down = rho.matrix()[(1, 1)].re;
            assert!((probs[0].1 - p_up).abs() < 1e-15);
            assert!((probs[1].1 - p_down).abs() < 1e-15);
            assert!((probs[0].1 - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
            assert!((probs[1].1 - (theta / 2.0).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_branch_always_selected() {
        let rho = PureQubit::up_z().density();
        let mut rng = SeededRng::new(1, 0);
        for _ in 0..200 {
            let out = apply_instrument(&z_measurement(), &rho, &mut rng).unwrap();
            assert_eq!(out.label, "up");
            assert_eq!(out.probability, 1.0);
        }
    }

    #[test]
    fn z_measurement_on_x_state_frequencies() {
        let rho = PureQubit::up_x().density();
        let mut rng = SeededRng::new(7, 0);
        let n = 10_000;
        let ups = (0..n)
            .filter(|_| {
                apply_instrument(&z_measurement(), &rho, &mut rng)
                    .unwrap()
                    .label
                    == "up"
            })
            .count();
        let freq = ups as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.015, "{freq}");
    }

    #[test]
    fn symmetric_projector_properties() {
        let p = symmetric_projector();
        assert!((&p * &p).approx_eq(&p, 1e-12));
        assert!((p.trace().re - 3.0).abs() < 1e-12);
        assert!(p.apply(&singlet()).iter().all(|z| z.norm() < 1e-12));
        assert!(antisymmetric_projector().approx_eq(&ComplexMatrix::projector(&singlet()), 1e-15));
    }

    #[test]
    fn symmetric_projection_fixes_product_states() {
        let inst = Instrument::new(
            4,
            4,
            vec![
                Branch::new("sym", symmetric_projector()),
                Branch::new("anti", antisymmetric_projector()),
            ],
        )
        .unwrap();
        let phi = PureQubit::from_bloch([0.2, -0.7, 0.4]).unwrap();
        let joint = DensityMatrix::from_pure(&tensor_vec(&phi.ket(), &phi.ket())).unwrap();
        let probs = outcome_probabilities(&inst, &joint).unwrap();
        assert!((probs[0].1 - 1.0).abs() < 1e-12 && probs[1].1 < 1e-12);
        let out = apply_instrument(&inst, &joint, &mut SeededRng::new(0, 0)).unwrap();
        assert_eq!(out.label, "sym");
        assert!(out.post_state.matrix().approx_eq(joint.matrix(), 1e-10));
    }

    #[test]
    fn completion_of_scaled_identity() {
        let half = ComplexMatrix::identity(2).scale_real(std::f64::consts::FRAC_1_SQRT_2);
        let inst = Instrument::new(2, 2, vec![Branch::new("k", half.clone())]).unwrap();
        let done = completing_branch(&inst).unwrap();
        assert_eq!(done.completeness(), Completeness::Exact);
        assert_eq!(done.branches()[1].label, FAIL_LABEL);
        assert!(done.branches()[1].matrix.approx_eq(&half, 1e-12));
    }

    #[test]
    fn completion_rejects_exact() {
        match completing_branch(&z_measurement()) {
            Err(QuantumError::NotSubNormalized { defect }) => assert!(defect < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn completion_of_dimension_changing_instrument() {
        // 3 -> 2 map, failure branch stays on the 3-dim input.
        let mut k = ComplexMatrix::zeros(2, 3);
        k[(0, 0)] = crate::qmath::ONE.scale(0.5);
        k[(1, 2)] = crate::qmath::ONE.scale(0.5);
        let inst = Instrument::new(3, 2, vec![Branch::new("w", k)]).unwrap();
        let done = completing_branch(&inst).unwrap();
        assert_eq!(done.branches()[1].matrix.rows(), 3);
        let rho = DensityMatrix::maximally_mixed(3);
        let probs = outcome_probabilities(&done, &rho).unwrap();
        let total: f64 = probs.iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let out = apply_instrument(&done, &rho, &mut SeededRng::new(5, 0)).unwrap();
        assert_eq!(out.post_state.dim(), if out.label == "w" { 2 } else { 3 });
    }

    #[test]
    fn all_null_branches_error() {
        let k = ComplexMatrix::from_real_diag(&[0.0, 0.5]);
        let inst = Instrument::new(2, 2, vec![Branch::new("k", k)]).unwrap();
        let rho = PureQubit::up_z().density();
        assert_eq!(
            apply_instrument(&inst, &rho, &mut SeededRng::new(0, 0)),
            Err(QuantumError::AllBranchesNull)
        );
    }

    #[test]
    fn dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            outcome_probabilities(&z_measurement(), &rho),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_declared_completeness() {
        let inst = z_measurement();
        let s = serde_json::to_string(&inst).unwrap();
        assert!(s.contains("\"completeness\":\"exact\""));
        let back: Instrument = serde_json::from_str(&s).unwrap();
        assert_eq!(back, inst);
        let lying = s.replace("\"exact\"", "\"sub\"");
        assert!(serde_json::from_str::<Instrument>(&lying).is_err());
    }
}
