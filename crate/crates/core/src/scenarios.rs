//! Concrete test messages and a generator of random convincing ones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimation::{
    bob_receive, eve_intercept, AliceStrategy, BobOutcome, EstimationError, EveOutcome, Policy,
};
use crate::protocol::{check_convincing, ProtocolError, TestMessage};
use crate::qmath::{
    hermitian_eig, random_orthonormal_completion, tensor_vec, ComplexMatrix, DensityMatrix,
    PureQubit, QmathError, SeededRng,
};
use crate::quantum::{
    antisymmetric_projector, symmetric_projector, Branch, Instrument, QuantumError, FAIL_LABEL,
};

/// Tolerance on `‖n‖ = 1` for measurement directions.
pub const DIRECTION_TOL: f64 = 1e-9;
/// Largest eigenvalue drawn for `A` off its eigenvalue-1 eigenspace.
pub const MAX_COMPLEMENT_EIGENVALUE: f64 = 1.0 - 1e-3;
/// Smallest accepted gap `1 − λ₂(M)` for generated messages.
pub const MIN_GENERATED_GAP: f64 = 2e-3;
pub const MAX_GENERATION_ATTEMPTS: usize = 1000;
pub const MAX_ANCILLA_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Math(#[from] QmathError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("direction has norm {norm}, expected 1")]
    NonUnitDirection { norm: f64 },
    #[error("ancilla dimension {0} outside 1..={MAX_ANCILLA_DIM}")]
    InvalidAncillaDim(usize),
    #[error("no convincing message with gap ≥ {min_gap:e} after {attempts} attempts (ancilla_dim = {ancilla_dim})")]
    GenerationFailed {
        ancilla_dim: usize,
        attempts: usize,
        min_gap: f64,
    },
    #[error("scenario `{family}` needs parameter `{parameter}`")]
    MissingParameter {
        family: &'static str,
        parameter: &'static str,
    },
}

fn unit_direction(n: [f64; 3]) -> Result<PureQubit, ScenarioError> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > DIRECTION_TOL {
        return Err(ScenarioError::NonUnitDirection { norm });
    }
    Ok(PureQubit::from_bloch(n)?)
}

/// Reset to `↑_z`, then measure `z`. Passes on every state, proving nothing.
pub fn trivial_cheat_message() -> TestMessage {
    let up = PureQubit::up_z().ket();
    let down = PureQubit::down_z().ket();
    let branches = vec![
        Branch::new("up", ComplexMatrix::outer(&up, &up)),
        Branch::new("up", ComplexMatrix::outer(&up, &down)),
        Branch::new("down", ComplexMatrix::zeros(2, 2)),
    ];
    let inst = Instrument::new(2, 2, branches).expect("reset channel is complete");
    TestMessage::new(inst, vec!["up".into()], None, "reset to up, then measure z")
        .expect("valid message")
}

/// "Measure the spin along `n`; you will get up."
pub fn classical_direction_message(n: [f64; 3]) -> Result<TestMessage, ScenarioError> {
    let up = unit_direction(n)?;
    let down = up.orthogonal();
    let inst = Instrument::new(
        2,
        2,
        vec![
            Branch::new("up", up.projector()),
            Branch::new("down", down.projector()),
        ],
    )?;
    Ok(TestMessage::new(
        inst,
        vec!["up".into()],
        None,
        format!("measure the spin along {n:?}"),
    )?)
}

/// "Rotate `↑_n` onto `↑_m`, then measure along `m`; you will get up."
///
/// The test observable is `|↑_n⟩⟨↑_n|` whatever `m` is, so the axis `m` is
/// free for Alice to randomise.
pub fn rotated_classical_message(n: [f64; 3], m: [f64; 3]) -> Result<TestMessage, ScenarioError> {
    let (up_n, up_m) = (unit_direction(n)?, unit_direction(m)?);
    let (down_n, down_m) = (up_n.orthogonal(), up_m.orthogonal());
    let inst = Instrument::new(
        2,
        2,
        vec![
            Branch::new("up", ComplexMatrix::outer(&up_m.ket(), &up_n.ket())),
            Branch::new("down", ComplexMatrix::outer(&down_m.ket(), &down_n.ket())),
        ],
    )?;
    Ok(TestMessage::new(
        inst,
        vec!["up".into()],
        None,
        format!("rotate {n:?} onto {m:?}, then measure along {m:?}"),
    )?)
}

/// Symmetric-subspace projection with a copy of `phi` as the ancilla.
pub fn scp_message(phi: &PureQubit) -> TestMessage {
    let inst = Instrument::new(
        4,
        4,
        vec![
            Branch::new("sym", symmetric_projector()),
            Branch::new("anti", antisymmetric_projector()),
        ],
    )
    .expect("projectors sum to identity");
    TestMessage::new(
        inst,
        vec!["sym".into()],
        Some(phi.density()),
        "project ancilla and qubit onto the symmetric subspace",
    )
    .expect("valid message")
}

/// Hilbert-Schmidt density matrix of random rank `1..=dim`, returned with its
/// support vectors.
fn random_mixed_state(
    dim: usize,
    rng: &mut SeededRng,
) -> Result<(DensityMatrix, Vec<Vec<crate::qmath::Complex64>>), ScenarioError> {
    let rank = rng.int_inclusive(1, dim);
    let mut g = ComplexMatrix::zeros(dim, rank);
    for i in 0..dim {
        for j in 0..rank {
            g[(i, j)] = rng.complex_normal();
        }
    }
    let gg = &g * &g.adjoint();
    let eig = hermitian_eig(&gg.hermitian_part(), 1e-8)?;
    // Rebuild from the top `rank` eigenpairs so the support is exact.
    let top: Vec<usize> = (dim - rank..dim).collect();
    let total: f64 = top.iter().map(|&j| eig.values[j]).sum();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    let mut support = Vec::with_capacity(rank);
    for &j in &top {
        let v = eig.vector(j);
        rho = &rho + &ComplexMatrix::projector(&v).scale_real(eig.values[j] / total);
        support.push(v);
    }
    Ok((DensityMatrix::new(rho)?, support))
}

/// Draws a random message that is convincing for `phi` with a resolvable
/// gap: `A` fixes the support of `ρ ⊗ |φ⟩⟨φ|` and has eigenvalues in
/// `[0, 1 − 1e-3]` elsewhere. Kraus pair `√A` (`pass`), `√(I − A)` (`fail`).
///
/// With `ancilla_dim = 1` the message is fully classical.
pub fn random_convincing_message(
    phi: &PureQubit,
    ancilla_dim: usize,
    rng: &mut SeededRng,
) -> Result<TestMessage, ScenarioError> {
    if ancilla_dim == 0 || ancilla_dim > MAX_ANCILLA_DIM {
        return Err(ScenarioError::InvalidAncillaDim(ancilla_dim));
    }
    let n = 2 * ancilla_dim;
    let phi_ket = phi.ket();
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let (rho, support) = random_mixed_state(ancilla_dim, rng)?;
        let fixed: Vec<_> = support.iter().map(|u| tensor_vec(u, &phi_ket)).collect();
        let basis = random_orthonormal_completion(&fixed, n, n, rng);
        let mut pass = ComplexMatrix::zeros(n, n);
        let mut fail = ComplexMatrix::zeros(n, n);
        for (k, b) in basis.iter().enumerate() {
            let lambda = if k < fixed.len() {
                1.0
            } else {
                rng.uniform_range(0.0, MAX_COMPLEMENT_EIGENVALUE)
            };
            let p = ComplexMatrix::projector(b);
            pass = &pass + &p.scale_real(lambda.sqrt());
            fail = &fail + &p.scale_real((1.0 - lambda).sqrt());
        }
        let inst = Instrument::new(
            n,
            n,
            vec![
                Branch::new("pass", pass.hermitian_part()),
                Branch::new(FAIL_LABEL, fail.hermitian_part()),
            ],
        )?;
        let ancilla = (ancilla_dim > 1).then_some(rho);
        let msg = TestMessage::new(
            inst,
            vec!["pass".into()],
            ancilla,
            format!("random convincing message, ancilla dimension {ancilla_dim}"),
        )?;
        let verdict = check_convincing(&msg, phi)?;
        if verdict.is_convincing() && 1.0 - verdict.second_eigenvalue >= MIN_GENERATED_GAP {
            return Ok(msg);
        }
    }
    Err(ScenarioError::GenerationFailed {
        ancilla_dim,
        attempts: MAX_GENERATION_ATTEMPTS,
        min_gap: MIN_GENERATED_GAP,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    TrivialCheat,
    ClassicalDirection,
    Scp,
    RandomConvincing,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::TrivialCheat => "trivial-cheat",
            Family::ClassicalDirection => "classical-direction",
            Family::Scp => "scp",
            Family::RandomConvincing => "random-convincing",
        }
    }
}

/// JSON recipe for a message. `direction` is the measurement axis for the
/// classical family and the Bloch vector of `φ` for `scp` and
/// `random-convincing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDescriptor {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioDescriptor {
    pub fn instantiate(&self) -> Result<TestMessage, ScenarioError> {
        let family = self.family.name();
        let direction = || {
            self.direction.ok_or(ScenarioError::MissingParameter {
                family,
                parameter: "direction",
            })
        };
        match self.family {
            Family::TrivialCheat => Ok(trivial_cheat_message()),
            Family::ClassicalDirection => classical_direction_message(direction()?),
            Family::Scp => Ok(scp_message(&unit_direction(direction()?)?)),
            Family::RandomConvincing => {
                let phi = unit_direction(direction()?)?;
                let mut rng = SeededRng::new(self.seed.unwrap_or(0), 0);
                random_convincing_message(&phi, self.ancilla_dim.unwrap_or(2), &mut rng)
            }
        }
    }
}

/// Full record of one round: Alice's message, Eve's optional interception,
/// Bob's test and estimate.
#[derive(Debug, Clone, Serialize)]
pub struct GameTranscript {
    pub family: &'static str,
    pub honest: bool,
    pub phi: PureQubit,
    /// State Alice built her message for.
    pub alice_state: PureQubit,
    pub alice_fidelity: f64,
    pub message: TestMessage,
    pub eve: Option<EveOutcome>,
    pub eve_fidelity: Option<f64>,
    /// Message as Bob receives it (after any interception).
    pub delivered: TestMessage,
    pub bob: BobOutcome,
    pub bob_fidelity: f64,
}

/// Plays one round of the story. When Eve intercepts, she forwards her
/// post-measurement system as the ancilla if its dimension fits, otherwise
/// the maximally mixed state.
pub fn simulate_game(
    strategy: &AliceStrategy,
    phi: &PureQubit,
    eavesdrop: bool,
    policy: Policy,
    rng: &mut SeededRng,
) -> Result<GameTranscript, EstimationError> {
    let (message, alice_state) = strategy.message(phi, rng)?;
    let (eve, delivered) = if eavesdrop {
        let outcome = eve_intercept(&message, policy, rng)?;
        let delivered = match message.ancilla() {
            None => message.clone(),
            Some(_) => {
                let d = message.ancilla_dim();
                let forwarded = outcome
                    .forwarded
                    .clone()
                    .filter(|s| s.dim() == d)
                    .unwrap_or_else(|| DensityMatrix::maximally_mixed(d));
                message
                    .with_ancilla(Some(forwarded))
                    .map_err(ScenarioError::from)?
            }
        };
        (Some(outcome), delivered)
    } else {
        (None, message.clone())
    };
    let bob = bob_receive(&delivered, phi, policy, rng)?;
    Ok(GameTranscript {
        family: strategy.family.name(),
        honest: strategy.is_honest(),
        phi: *phi,
        alice_fidelity: phi.fidelity(&alice_state),
        alice_state,
        eve_fidelity: eve.as_ref().map(|e| phi.fidelity(&e.estimate)),
        eve,
        message,
        delivered,
        bob_fidelity: phi.fidelity(&bob.estimate),
        bob,
    })
}
