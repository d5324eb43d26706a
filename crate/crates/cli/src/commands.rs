use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde_json::json;
use zkqubit::attacks::{
    build_extraction_plan, extract_copy, extraction_success_probability,
    reconstruct_from_classical, star_values, verify_star_condition, AttackError,
};
use zkqubit::estimation::{
    bob_experiment, eve_experiment, mean_estimation_fidelity, AliceStrategy, EtaMode, Honesty,
    Policy, RunSettings,
};
use zkqubit::protocol::{brute_force_check, check_convincing, load_message_file, save_message};
use zkqubit::qmath::{sample_haar_qubit, Complex64, PureQubit, SeededRng, EIGENVALUE_ONE_TOL};
use zkqubit::quantum::branch_probabilities;
use zkqubit::scenarios::{
    classical_direction_message, random_convincing_message, scp_message, simulate_game,
    trivial_cheat_message, Family,
};

use crate::output::{emit, Report};
use crate::{CheatArg, Cli, Command, EtaArg, FamilyArg, PolicyArg, RoleArg};

const DOMAIN_NEGATIVE: u8 = 2;
/// Bloch vectors further than this from the unit sphere are rejected.
const BLOCH_TOL: f64 = 1e-6;

/// Parses `bloch:x,y,z` or `amp:re,im,re,im`.
pub fn parse_phi(spec: &str) -> anyhow::Result<PureQubit> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("state `{spec}` must start with `bloch:` or `amp:`"))?;
    let nums = rest
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("bad number in `{spec}`"))?;
    match (kind, nums.as_slice()) {
        ("bloch", &[x, y, z]) => {
            let norm = (x * x + y * y + z * z).sqrt();
            if (norm - 1.0).abs() > BLOCH_TOL {
                bail!("Bloch vector has length {norm}; a pure state needs length 1");
            }
            Ok(PureQubit::from_bloch([x, y, z])?)
        }
        ("amp", &[ar, ai, br, bi]) => Ok(PureQubit::normalized(
            Complex64::new(ar, ai),
            Complex64::new(br, bi),
        )?),
        ("bloch", _) => bail!("`bloch:` takes 3 numbers"),
        ("amp", _) => bail!("`amp:` takes 4 numbers"),
        _ => bail!("unknown state kind `{kind}`"),
    }
}

fn family(arg: FamilyArg) -> Family {
    match arg {
        FamilyArg::TrivialCheat => Family::TrivialCheat,
        FamilyArg::ClassicalDirection => Family::ClassicalDirection,
        FamilyArg::Scp => Family::Scp,
        FamilyArg::RandomConvincing => Family::RandomConvincing,
    }
}

fn policies(arg: PolicyArg) -> Vec<Policy> {
    match arg {
        PolicyArg::Discard => vec![Policy::Discard],
        PolicyArg::Remaining => vec![Policy::Remaining],
        PolicyArg::Both => vec![Policy::Discard, Policy::Remaining],
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let start = Instant::now();
    let g = &cli.global;
    let settings = RunSettings::new(g.samples, g.seed).with_workers(g.workers);
    let (report, code) = match &cli.command {
        Command::Check {
            message,
            phi,
            oracle,
            grid,
        } => check(message, phi, *oracle, *grid)?,
        Command::Attack {
            message,
            trials,
            reference,
            tol,
            plan,
        } => attack(
            message,
            *trials,
            reference.as_deref(),
            *tol,
            plan.as_deref(),
            g.seed,
        )?,
        Command::Estimate { copies } => {
            let reports = copies
                .iter()
                .map(|&n| mean_estimation_fidelity(n, &settings))
                .collect::<Result<Vec<_>, _>>()?;
            (Report::Fidelity(reports), 0)
        }
        Command::Game {
            family: fam,
            role,
            policy,
            ancilla_dim,
            eta,
            transcript,
            eavesdrop,
            cheat,
            cheat_state,
        } => {
            let mut strategy = AliceStrategy::honest(family(*fam));
            strategy.ancilla_dim = *ancilla_dim;
            strategy.eta = match eta {
                EtaArg::Independent => EtaMode::Independent,
                EtaArg::Correlated => EtaMode::Correlated,
            };
            strategy.honesty = match (cheat, cheat_state) {
                (None, None) => Honesty::Honest,
                (Some(CheatArg::Random), None) => Honesty::CheatRandom,
                (Some(CheatArg::Fixed), Some(s)) => Honesty::CheatFixedState {
                    state: parse_phi(s)?,
                },
                (Some(CheatArg::Fixed), None) => bail!("--cheat fixed needs --cheat-state"),
                (_, Some(_)) => bail!("--cheat-state needs --cheat fixed"),
            };
            match transcript {
                Some(spec) => {
                    let phi = parse_phi(spec)?;
                    let policy = match policy {
                        PolicyArg::Discard => Policy::Discard,
                        PolicyArg::Remaining => Policy::Remaining,
                        PolicyArg::Both => bail!("a transcript needs a single --policy"),
                    };
                    let mut rng = SeededRng::new(g.seed, 0);
                    let t = simulate_game(&strategy, &phi, *eavesdrop, policy, &mut rng)?;
                    (Report::from_serialize(&t)?, 0)
                }
                None => {
                    if *eavesdrop || cheat.is_some() {
                        bail!("--eavesdrop and --cheat apply to --transcript games only");
                    }
                    let mut reports = Vec::new();
                    if matches!(role, RoleArg::Eve | RoleArg::Both) {
                        for p in policies(*policy) {
                            reports.push(eve_experiment(&strategy, p, &settings)?);
                        }
                    }
                    if matches!(role, RoleArg::Bob | RoleArg::Both) {
                        for p in policies(*policy) {
                            reports.push(bob_experiment(&strategy, p, &settings)?);
                        }
                    }
                    (Report::Fidelity(reports), 0)
                }
            }
        }
        Command::Corpus {
            size,
            max_ancilla_dim,
            grid,
        } => corpus(*size, *max_ancilla_dim, *grid, g.seed)?,
        Command::Message {
            family: fam,
            phi,
            ancilla_dim,
        } => {
            let state = phi.as_deref().map(parse_phi).transpose()?;
            let need = || state.ok_or_else(|| anyhow!("this family needs --phi"));
            let msg = match fam {
                FamilyArg::TrivialCheat => trivial_cheat_message(),
                FamilyArg::ClassicalDirection => classical_direction_message(need()?.bloch())?,
                FamilyArg::Scp => scp_message(&need()?),
                FamilyArg::RandomConvincing => {
                    let mut rng = SeededRng::new(g.seed, 0);
                    random_convincing_message(&need()?, *ancilla_dim, &mut rng)?
                }
            };
            let mut text = save_message(&msg);
            text.push('\n');
            emit(&text, g.output.as_deref())?;
            return Ok(ExitCode::SUCCESS);
        }
    };
    let text = report.render(g.format, start.elapsed())?;
    emit(&text, g.output.as_deref())?;
    Ok(ExitCode::from(code))
}

fn check(
    path: &std::path::Path,
    phi: &str,
    oracle: bool,
    grid: usize,
) -> anyhow::Result<(Report, u8)> {
    let msg = load_message_file(path)?;
    let phi = parse_phi(phi)?;
    let v = check_convincing(&msg, &phi)?;
    let mut report = json!({
        "phi": phi,
        "convincing": v.is_convincing(),
        "condition1": v.condition1,
        "condition2": v.condition2,
        "acceptance_probability": v.acceptance_probability,
        "top_eigenvalue": v.top_eigenvalue,
        "second_eigenvalue": v.second_eigenvalue,
        "certified_state": v.certified_state,
        "response_operator": v.response_operator,
    });
    if oracle {
        let o = brute_force_check(&msg, &phi, grid)?;
        report["oracle"] = json!({
            "condition1": o.condition1,
            "condition2": o.condition2,
            "acceptance_probability": o.acceptance_probability,
            "max_outside_cap": o.max_outside_cap,
            "grid_points": o.grid_points,
            "agrees": o.agrees_with(&v),
        });
    }
    let code = if v.is_convincing() {
        0
    } else {
        DOMAIN_NEGATIVE
    };
    Ok((Report::Value(report), code))
}

fn negative(kind: &str, err: &AttackError) -> (Report, u8) {
    eprintln!("{err}");
    (
        Report::Value(json!({ "kind": kind, "error": err.to_string() })),
        DOMAIN_NEGATIVE,
    )
}

fn attack(
    path: &std::path::Path,
    trials: usize,
    reference: Option<&str>,
    tol: f64,
    plan_out: Option<&std::path::Path>,
    seed: u64,
) -> anyhow::Result<(Report, u8)> {
    let msg = load_message_file(path)?;
    let reference = reference.map(parse_phi).transpose()?;
    if msg.is_classical() {
        return Ok(match reconstruct_from_classical(&msg) {
            Ok(state) => (
                Report::Value(json!({
                    "kind": "classical",
                    "reconstructed": state,
                    "reference_fidelity": reference.map(|r| r.fidelity(&state)),
                })),
                0,
            ),
            Err(e @ AttackError::Degenerate { .. }) => negative("classical", &e),
            Err(e) => return Err(e.into()),
        });
    }
    let plan = match build_extraction_plan(&msg, tol) {
        Ok(plan) => plan,
        Err(e @ AttackError::EmptyComplement) => return Ok(negative("extraction", &e)),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = plan_out {
        let text = serde_json::to_string_pretty(&plan)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    let ancilla = msg.ancilla_state();
    let probs = branch_probabilities(&plan.instrument, &ancilla)?;
    let branches: Vec<_> = plan
        .instrument
        .branches()
        .iter()
        .zip(&probs)
        .map(|(b, p)| json!({ "label": b.label, "probability": p }))
        .collect();
    let success_probability = extraction_success_probability(&plan, &ancilla)?;
    let mut rng = SeededRng::new(seed, 0);
    let mut successes = 0usize;
    let (mut min_fid, mut sum_fid) = (f64::INFINITY, 0.0);
    let mut min_purity = f64::INFINITY;
    for _ in 0..trials {
        let out = extract_copy(&plan, &ancilla, &mut rng)?;
        if let Some(copy) = out.reconstructed {
            successes += 1;
            min_purity = min_purity.min(copy.purity());
            if let Some(r) = &reference {
                let f = copy.expectation(&r.ket());
                min_fid = min_fid.min(f);
                sum_fid += f;
            }
        }
    }
    let copy_fidelity = match (&reference, successes) {
        (Some(_), n) if n > 0 => json!({ "min": min_fid, "mean": sum_fid / n as f64 }),
        _ => serde_json::Value::Null,
    };
    let star = match &reference {
        Some(r) => json!({
            "holds": verify_star_condition(&plan, &ancilla, r)?,
            "values": star_values(&plan, &ancilla, r)?,
        }),
        None => serde_json::Value::Null,
    };
    let report = json!({
        "kind": "extraction",
        "ancilla_dim": plan.ancilla_dim,
        "complement_dim": plan.complement_dim(),
        "normalization": plan.normalization,
        "branches": branches,
        "success_probability": success_probability,
        "trials": trials,
        "successes": successes,
        "success_frequency": if trials > 0 { successes as f64 / trials as f64 } else { 0.0 },
        "min_copy_purity": (successes > 0).then_some(min_purity),
        "copy_fidelity": copy_fidelity,
        "star_condition": star,
    });
    Ok((Report::Value(report), 0))
}

fn corpus(size: usize, max_dim: usize, grid: usize, seed: u64) -> anyhow::Result<(Report, u8)> {
    if max_dim == 0 {
        bail!("--max-ancilla-dim must be at least 1");
    }
    let mut rng = SeededRng::new(seed, 0);
    let mut convincing = 0usize;
    let mut agreements = 0usize;
    let mut star_ok = 0usize;
    let mut positive = 0usize;
    let mut min_p = f64::INFINITY;
    let mut min_fid = f64::INFINITY;
    for i in 0..size {
        let phi = sample_haar_qubit(&mut rng);
        let d = 1 + i % max_dim;
        let msg = random_convincing_message(&phi, d, &mut rng)?;
        let v = check_convincing(&msg, &phi)?;
        convincing += v.is_convincing() as usize;
        let o = brute_force_check(&msg, &phi, grid)?;
        agreements += o.agrees_with(&v) as usize;
        let plan = build_extraction_plan(&msg, EIGENVALUE_ONE_TOL)?;
        let rho = msg.ancilla_state();
        let probe = sample_haar_qubit(&mut rng);
        let mut star = true;
        for s in [phi, phi.orthogonal(), probe] {
            star &=
                verify_star_condition(&plan, &rho, &s)? == check_convincing(&msg, &s)?.condition1;
        }
        star_ok += star as usize;
        let p = extraction_success_probability(&plan, &rho)?;
        positive += (p > 0.0) as usize;
        min_p = min_p.min(p);
        for w in &plan.operators {
            let out = rho.matrix().sandwich(&w.adjoint())?;
            let weight = out.trace().re;
            if weight > 1e-12 {
                min_fid = min_fid.min(out.expectation(&phi.ket()).re / weight);
            }
        }
    }
    let all_hold = convincing == size
        && agreements == size
        && star_ok == size
        && positive == size
        && (size == 0 || min_fid >= 1.0 - 1e-8);
    let report = json!({
        "size": size,
        "seed": seed,
        "max_ancilla_dim": max_dim,
        "grid_points": grid,
        "convincing": convincing,
        "oracle_agreements": agreements,
        "star_equivalences": star_ok,
        "positive_extraction": positive,
        "min_success_probability": (size > 0).then_some(min_p),
        "min_copy_fidelity": (size > 0).then_some(min_fid),
        "all_hold": all_hold,
    });
    Ok((
        Report::Value(report),
        if all_hold { 0 } else { DOMAIN_NEGATIVE },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_specs() {
        let z = parse_phi("bloch:0,0,1").unwrap();
        assert!(z.fidelity(&PureQubit::up_z()) > 1.0 - 1e-15);
        let x = parse_phi("amp:1,0,1,0").unwrap();
        assert!(x.fidelity(&PureQubit::up_x()) > 1.0 - 1e-15);
        let down = parse_phi("bloch:0,0,-1").unwrap();
        assert!(down.fidelity(&PureQubit::down_z()) > 1.0 - 1e-15);
        for bad in [
            "0,0,1",
            "bloch:0,0",
            "bloch:0,0,0.5",
            "amp:0,0,0,0",
            "amp:a,0,1,0",
            "spin:0,0,1",
        ] {
            assert!(parse_phi(bad).is_err(), "{bad}");
        }
    }
}
