//! Covariant state estimation and the Monte Carlo fidelity experiments.
//!
//! The `N`-copy estimator draws a direction `m̂` with density proportional to
//! `∏_j ⟨m̂|ρ_j|m̂⟩` over the sphere and guesses spin-up along `m̂`. For `N`
//! copies of a pure state its mean fidelity is `(N+1)/(N+2)`.
//!
//! Experiments split their trials into fixed chunks of [`CHUNK_SIZE`]; chunk
//! `c` draws from stream `c` of the seed and chunk sums are folded in order,
//! so reports do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{
    build_extraction_plan, extract_copy, reconstruct_from_classical, AttackError, ExtractionResult,
};
use crate::protocol::{run_test, ProtocolError, TestMessage};
use crate::qmath::{
    sample_haar_qubit, sample_sphere_direction, DensityMatrix, PureQubit, QmathError, SeededRng,
    EIGENVALUE_ONE_TOL,
};
use crate::scenarios::{
    classical_direction_message, random_convincing_message, rotated_classical_message, scp_message,
    trivial_cheat_message, Family, ScenarioError,
};

pub const MAX_PROPOSALS: usize = 10_000;
pub const MAX_COPIES: usize = 8;
pub const MIN_SAMPLES: usize = 1000;
pub const CHUNK_SIZE: usize = 1024;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Math(#[from] QmathError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("estimator needs qubit states, got dimension {0}")]
    NotQubit(usize),
    #[error("{0} copies requested; at most {MAX_COPIES} supported")]
    TooManyCopies(usize),
    #[error("rejection sampling gave up after {MAX_PROPOSALS} proposals")]
    RejectionCap,
    #[error("{samples} samples requested; at least {minimum} needed")]
    TooFewSamples { samples: usize, minimum: usize },
    #[error("experiment needs an honest strategy")]
    NotHonest,
    #[error("post-measurement state of dimension {0} has no qubit to estimate from")]
    NoQubit(usize),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &PureQubit, b: &PureQubit) -> f64 {
    a.fidelity(b)
}

fn bloch_vector(state: &DensityMatrix) -> Result<[f64; 3], EstimationError> {
    if state.dim() != 2 {
        return Err(EstimationError::NotQubit(state.dim()));
    }
    let m = state.matrix();
    let off = m[(0, 1)];
    Ok([2.0 * off.re, -2.0 * off.im, m[(0, 0)].re - m[(1, 1)].re])
}

/// Covariant estimate from one copy of each state in `copies`: `m̂` is
/// drawn with density `∝ ∏_j ⟨m̂|ρ_j|m̂⟩`. With no copies it is uniform.
pub fn covariant_estimate_product(
    copies: &[&DensityMatrix],
    rng: &mut SeededRng,
) -> Result<PureQubit, EstimationError> {
    if copies.len() > MAX_COPIES {
        return Err(EstimationError::TooManyCopies(copies.len()));
    }
    let blochs = copies
        .iter()
        .map(|s| bloch_vector(s))
        .collect::<Result<Vec<_>, _>>()?;
    for _ in 0..MAX_PROPOSALS {
        let m = sample_sphere_direction(rng);
        let weight: f64 = blochs
            .iter()
            .map(|r| 0.5 * (1.0 + m[0] * r[0] + m[1] * r[1] + m[2] * r[2]))
            .product();
        if rng.uniform() < weight {
            return Ok(PureQubit::from_bloch(m)?);
        }
    }
    Err(EstimationError::RejectionCap)
}

/// Covariant estimate from `n_copies` i.i.d. copies of `state`.
pub fn covariant_estimate(
    state: &DensityMatrix,
    n_copies: usize,
    rng: &mut SeededRng,
) -> Result<PureQubit, EstimationError> {
    let copies = vec![state; n_copies];
    covariant_estimate_product(&copies, rng)
}

/// Monte Carlo budget. `workers = None` uses every available core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSettings {
    pub samples: usize,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl RunSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        RunSettings {
            samples,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }
}

/// Sample mean and standard error of `trial` over `settings.samples` draws.
pub fn monte_carlo<F>(settings: &RunSettings, trial: F) -> Result<(f64, f64), EstimationError>
where
    F: Fn(&mut SeededRng) -> Result<f64, EstimationError> + Sync,
{
    let samples = settings.samples;
    if samples == 0 {
        return Err(EstimationError::TooFewSamples {
            samples,
            minimum: 1,
        });
    }
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let run_chunk = |c: usize| -> Result<(f64, f64), EstimationError> {
        let mut rng = SeededRng::new(settings.seed, c as u64);
        let n = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
        let (mut s, mut ss) = (0.0, 0.0);
        for _ in 0..n {
            let f = trial(&mut rng)?;
            s += f;
            ss += f * f;
        }
        Ok((s, ss))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers.unwrap_or(0))
        .build()
        .map_err(|e| EstimationError::ThreadPool(e.to_string()))?;
    let partials: Vec<_> = pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect());
    let (mut s, mut ss) = (0.0, 0.0);
    for p in partials {
        let (a, b) = p?;
        s += a;
        ss += b;
    }
    let n = samples as f64;
    let mean = s / n;
    let var = if samples > 1 {
        ((ss - s * s / n) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((mean, (var / n).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Guess at random when extraction fails.
    Discard,
    /// Estimate from whatever the failed extraction left behind.
    #[serde(alias = "estimate-remaining")]
    Remaining,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Discard => "discard",
            Policy::Remaining => "remaining",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub baseline: f64,
    pub delta: f64,
    pub seed: u64,
    pub policy: String,
    pub family: String,
}

impl FidelityReport {
    fn new(
        mean: f64,
        stderr: f64,
        settings: &RunSettings,
        baseline: f64,
        policy: &str,
        family: &str,
    ) -> Self {
        FidelityReport {
            mean,
            stderr,
            samples: settings.samples,
            baseline,
            delta: mean - baseline,
            seed: settings.seed,
            policy: policy.to_string(),
            family: family.to_string(),
        }
    }

    /// `delta / stderr`; infinite when the estimate has no spread.
    pub fn significance(&self) -> f64 {
        if self.stderr > 0.0 {
            self.delta / self.stderr
        } else if self.delta > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

pub const CSV_HEADER: &str = "mean,stderr,samples,baseline,delta,seed,policy,family";

/// One header line and one row per report, floats at 12 significant digits.
pub fn reports_to_csv(reports: &[FidelityReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            round_sig(r.mean, 12),
            round_sig(r.stderr, 12),
            r.samples,
            round_sig(r.baseline, 12),
            round_sig(r.delta, 12),
            r.seed,
            r.policy,
            r.family
        ));
    }
    out
}

/// Mean fidelity of the covariant `n_copies` estimator over Haar-random
/// states. The baseline is `N/(N+1)`.
pub fn mean_estimation_fidelity(
    n_copies: usize,
    settings: &RunSettings,
) -> Result<FidelityReport, EstimationError> {
    if settings.samples < MIN_SAMPLES {
        return Err(EstimationError::TooFewSamples {
            samples: settings.samples,
            minimum: MIN_SAMPLES,
        });
    }
    if n_copies > MAX_COPIES {
        return Err(EstimationError::TooManyCopies(n_copies));
    }
    let (mean, stderr) = monte_carlo(settings, |rng| {
        let phi = sample_haar_qubit(rng);
        let est = covariant_estimate(&phi.density(), n_copies, rng)?;
        Ok(phi.fidelity(&est))
    })?;
    let baseline = n_copies as f64 / (n_copies as f64 + 1.0);
    Ok(FidelityReport::new(
        mean,
        stderr,
        settings,
        baseline,
        "none",
        &format!("covariant-{n_copies}"),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Honesty {
    Honest,
    CheatFixedState { state: PureQubit },
    CheatRandom,
}

/// How Alice's hidden variable `η` relates to `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaMode {
    /// Drawn independently of `φ`: a uniform measurement axis for the
    /// classical family.
    Independent,
    /// The classical axis equals the Bloch direction of `φ`.
    Correlated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliceStrategy {
    pub honesty: Honesty,
    pub family: Family,
    /// Ancilla dimension for the random-convincing family.
    pub ancilla_dim: usize,
    pub eta: EtaMode,
}

impl AliceStrategy {
    pub fn honest(family: Family) -> Self {
        AliceStrategy {
            honesty: Honesty::Honest,
            family,
            ancilla_dim: 2,
            eta: EtaMode::Independent,
        }
    }

    pub fn is_honest(&self) -> bool {
        self.honesty == Honesty::Honest
    }

    /// Alice's message for Bob's state `phi`, and the state she actually
    /// built it for.
    pub fn message(
        &self,
        phi: &PureQubit,
        rng: &mut SeededRng,
    ) -> Result<(TestMessage, PureQubit), EstimationError> {
        let state = match &self.honesty {
            Honesty::Honest => *phi,
            Honesty::CheatFixedState { state } => *state,
            Honesty::CheatRandom => sample_haar_qubit(rng),
        };
        let msg = match self.family {
            Family::TrivialCheat => trivial_cheat_message(),
            Family::ClassicalDirection => match self.eta {
                EtaMode::Independent => {
                    let axis = sample_sphere_direction(rng);
                    rotated_classical_message(state.bloch(), axis)?
                }
                EtaMode::Correlated => classical_direction_message(state.bloch())?,
            },
            Family::Scp => scp_message(&state),
            Family::RandomConvincing => random_convincing_message(&state, self.ancilla_dim, rng)?,
        };
        Ok((msg, state))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Eigenvector of a fully classical test observable.
    Classical,
    /// Extraction measurement on the ancilla, then covariant estimation.
    Extraction,
    /// Covariant estimation from the available copies only.
    Estimate,
}

/// What Eve learns from the intercepted message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EveOutcome {
    pub method: Method,
    pub extraction: Option<ExtractionResult>,
    /// Copies fed to the covariant estimator.
    pub copies_used: usize,
    pub estimate: PureQubit,
    /// System left in Eve's hands after her measurement.
    #[serde(skip)]
    pub forwarded: Option<DensityMatrix>,
}

/// Eve holds the message (instrument and ancilla) but not Bob's qubit.
pub fn eve_intercept(
    msg: &TestMessage,
    policy: Policy,
    rng: &mut SeededRng,
) -> Result<EveOutcome, EstimationError> {
    if msg.is_classical() {
        if let Ok(estimate) = reconstruct_from_classical(msg) {
            return Ok(EveOutcome {
                method: Method::Classical,
                extraction: None,
                copies_used: 0,
                estimate,
                forwarded: None,
            });
        }
    }
    let plan = match build_extraction_plan(msg, EIGENVALUE_ONE_TOL) {
        Ok(plan) => plan,
        Err(AttackError::EmptyComplement) => {
            return Ok(EveOutcome {
                method: Method::Estimate,
                extraction: None,
                copies_used: 0,
                estimate: covariant_estimate_product(&[], rng)?,
                forwarded: msg.ancilla().cloned(),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let result = extract_copy(&plan, &msg.ancilla_state(), rng)?;
    let (used, forwarded): (Vec<&DensityMatrix>, DensityMatrix) =
        match (&result.reconstructed, &result.residual_ancilla) {
            (Some(copy), _) => (vec![copy], copy.clone()),
            (None, Some(residual)) => {
                let used = match policy {
                    Policy::Remaining if residual.dim() == 2 => vec![residual],
                    _ => vec![],
                };
                (used, residual.clone())
            }
            (None, None) => unreachable!("extraction yields a copy or a residual"),
        };
    let estimate = covariant_estimate_product(&used, rng)?;
    let copies_used = used.len();
    Ok(EveOutcome {
        method: Method::Extraction,
        copies_used,
        estimate,
        forwarded: Some(forwarded),
        extraction: Some(result),
    })
}

/// Bob's side: run the test on his qubit, then try to extract a second copy
/// from the ancilla left behind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BobOutcome {
    pub passed: bool,
    pub label: String,
    pub test_probability: f64,
    pub method: Method,
    pub extraction: Option<ExtractionResult>,
    pub copies_used: usize,
    pub estimate: PureQubit,
}

pub fn bob_receive(
    msg: &TestMessage,
    phi: &PureQubit,
    policy: Policy,
    rng: &mut SeededRng,
) -> Result<BobOutcome, EstimationError> {
    let run = run_test(msg, phi, rng)?;
    let d = msg.ancilla_dim();
    let outcome = |method, extraction, copies: &[&DensityMatrix], estimate| BobOutcome {
        passed: run.passed,
        label: run.label.clone(),
        test_probability: run.probability,
        method,
        extraction,
        copies_used: copies.len(),
        estimate,
    };
    if msg.is_classical() {
        if let Ok(estimate) = reconstruct_from_classical(msg) {
            return Ok(outcome(Method::Classical, None, &[], estimate));
        }
    }
    let post_dim = run.post_state.dim();
    let (qubit, ancilla) = if post_dim == 2 * d {
        let ancilla = if d > 1 {
            Some(run.ancilla_post_state(d)?)
        } else {
            None
        };
        (run.qubit_post_state(d)?, ancilla)
    } else if post_dim == 2 {
        (run.post_state.clone(), None)
    } else {
        return Err(EstimationError::NoQubit(post_dim));
    };
    let plan = match (&ancilla, build_extraction_plan(msg, EIGENVALUE_ONE_TOL)) {
        (Some(_), Ok(plan)) => plan,
        (_, Err(e)) if !matches!(e, AttackError::EmptyComplement) => return Err(e.into()),
        _ => {
            let estimate = covariant_estimate_product(&[&qubit], rng)?;
            return Ok(outcome(Method::Estimate, None, &[&qubit], estimate));
        }
    };
    let ancilla = ancilla.expect("matched above");
    let result = extract_copy(&plan, &ancilla, rng)?;
    let mut copies = vec![&qubit];
    match (&result.reconstructed, &result.residual_ancilla) {
        (Some(copy), _) => copies.push(copy),
        (None, Some(residual)) if policy == Policy::Remaining && residual.dim() == 2 => {
            copies.push(residual)
        }
        _ => {}
    }
    let estimate = covariant_estimate_product(&copies, rng)?;
    Ok(outcome(
        Method::Extraction,
        Some(result.clone()),
        &copies,
        estimate,
    ))
}

fn require_honest(strategy: &AliceStrategy) -> Result<(), EstimationError> {
    if strategy.is_honest() {
        Ok(())
    } else {
        Err(EstimationError::NotHonest)
    }
}

/// Eve's mean fidelity against the no-information baseline `1/2`.
pub fn eve_experiment(
    strategy: &AliceStrategy,
    policy: Policy,
    settings: &RunSettings,
) -> Result<FidelityReport, EstimationError> {
    require_honest(strategy)?;
    let (mean, stderr) = monte_carlo(settings, |rng| {
        let phi = sample_haar_qubit(rng);
        let (msg, _) = strategy.message(&phi, rng)?;
        let eve = eve_intercept(&msg, policy, rng)?;
        Ok(phi.fidelity(&eve.estimate))
    })?;
    Ok(FidelityReport::new(
        mean,
        stderr,
        settings,
        0.5,
        policy.name(),
        strategy.family.name(),
    ))
}

/// Bob's mean fidelity against the one-copy baseline `2/3`.
pub fn bob_experiment(
    strategy: &AliceStrategy,
    policy: Policy,
    settings: &RunSettings,
) -> Result<FidelityReport, EstimationError> {
    require_honest(strategy)?;
    let (mean, stderr) = monte_carlo(settings, |rng| {
        let phi = sample_haar_qubit(rng);
        let (msg, _) = strategy.message(&phi, rng)?;
        let bob = bob_receive(&msg, &phi, policy, rng)?;
        Ok(phi.fidelity(&bob.estimate))
    })?;
    Ok(FidelityReport::new(
        mean,
        stderr,
        settings,
        2.0 / 3.0,
        policy.name(),
        strategy.family.name(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_examples() {
        let (up, down, x) = (PureQubit::up_z(), PureQubit::down_z(), PureQubit::up_x());
        assert!((fidelity(&up, &up) - 1.0).abs() < 1e-15);
        assert!(fidelity(&up, &down).abs() < 1e-15);
        assert!((fidelity(&up, &x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn round_sig_examples() {
        assert_eq!(round_sig(2.0 / 3.0, 12), 0.666666666667);
        assert_eq!(round_sig(0.0, 12), 0.0);
        assert_eq!(round_sig(123456.7891, 4), 123500.0);
    }

    #[test]
    fn estimator_rejects_bad_input() {
        let mut rng = SeededRng::new(0, 0);
        let big = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            covariant_estimate(&big, 1, &mut rng),
            Err(EstimationError::NotQubit(3))
        ));
        let q = PureQubit::up_z().density();
        assert!(matches!(
            covariant_estimate(&q, 9, &mut rng),
            Err(EstimationError::TooManyCopies(9))
        ));
        assert!(matches!(
            mean_estimation_fidelity(1, &RunSettings::new(10, 0)),
            Err(EstimationError::TooFewSamples { .. })
        ));
    }

    #[test]
    fn workers_do_not_change_reports() {
        let base = RunSettings::new(5000, 17);
        let a = mean_estimation_fidelity(2, &base.with_workers(Some(1))).unwrap();
        let b = mean_estimation_fidelity(2, &base.with_workers(Some(4))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dishonest_experiments_rejected() {
        let mut s = AliceStrategy::honest(Family::Scp);
        s.honesty = Honesty::CheatRandom;
        assert!(matches!(
            eve_experiment(&s, Policy::Discard, &RunSettings::new(10, 0)),
            Err(EstimationError::NotHonest)
        ));
    }

    #[test]
    fn csv_layout() {
        let r = mean_estimation_fidelity(0, &RunSettings::new(1000, 1)).unwrap();
        let csv = reports_to_csv(&[r]);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 8);
        assert!(lines[1].ends_with(",none,covariant-0"));
    }

    #[test]
    fn scp_single_rounds() {
        let phi = PureQubit::from_bloch([0.3, -0.2, 0.9]).unwrap();
        let msg = scp_message(&phi);
        let mut rng = SeededRng::new(2, 0);
        for _ in 0..50 {
            let eve = eve_intercept(&msg, Policy::Remaining, &mut rng).unwrap();
            assert_eq!(eve.copies_used, 1);
            let bob = bob_receive(&msg, &phi, Policy::Remaining, &mut rng).unwrap();
            assert!(bob.passed);
            assert_eq!(bob.copies_used, 2);
            let bob = bob_receive(&msg, &phi, Policy::Discard, &mut rng).unwrap();
            let success = bob.extraction.as_ref().unwrap().success;
            assert_eq!(bob.copies_used, if success { 2 } else { 1 });
        }
    }
}
