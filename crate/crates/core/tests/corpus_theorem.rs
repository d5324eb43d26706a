use proptest::prelude::*;
use zkqubit::attacks::{
    build_extraction_plan, extract_copy, extraction_success_probability, verify_star_condition,
};
use zkqubit::protocol::{brute_force_check, check_convincing, TestMessage};
use zkqubit::qmath::{
    random_orthonormal_completion, sample_haar_qubit, ComplexMatrix, PureQubit, SeededRng,
    EIGENVALUE_ONE_TOL,
};
use zkqubit::quantum::{Branch, Instrument};
use zkqubit::scenarios::{
    classical_direction_message, random_convincing_message, scp_message, trivial_cheat_message,
};

const COPY_TOL: f64 = 1e-8;

fn corpus(size: usize, seed: u64) -> Vec<(PureQubit, TestMessage)> {
    let mut rng = SeededRng::new(seed, 0);
    (0..size)
        .map(|i| {
            let phi = sample_haar_qubit(&mut rng);
            let d = 1 + i % 4;
            (phi, random_convincing_message(&phi, d, &mut rng).unwrap())
        })
        .collect()
}

#[test]
fn convincing_messages_leak_copies() {
    let mut rng = SeededRng::new(77, 1);
    for (phi, msg) in corpus(200, 77) {
        assert!(check_convincing(&msg, &phi).unwrap().is_convincing());
        let plan = build_extraction_plan(&msg, EIGENVALUE_ONE_TOL).unwrap();
        let rho = msg.ancilla_state();

        for probe in [phi, phi.orthogonal(), sample_haar_qubit(&mut rng)] {
            let c1 = check_convincing(&msg, &probe).unwrap().condition1;
            assert_eq!(verify_star_condition(&plan, &rho, &probe).unwrap(), c1);
        }

        let p = extraction_success_probability(&plan, &rho).unwrap();
        assert!(p > 0.0);

        // Every W branch that can fire leaves exactly φ behind.
        for w in &plan.operators {
            let out = rho.matrix().sandwich(&w.adjoint()).unwrap();
            let weight = out.trace().re;
            if weight > 1e-12 {
                let fid = out.expectation(&phi.ket()).re / weight;
                assert!(fid >= 1.0 - COPY_TOL, "branch fidelity {fid}");
            }
        }

        let mut successes = 0;
        for _ in 0..20 {
            let out = extract_copy(&plan, &rho, &mut rng).unwrap();
            if let Some(copy) = out.reconstructed {
                successes += 1;
                assert!(copy.expectation(&phi.ket()) >= 1.0 - COPY_TOL);
            }
        }
        if p > 0.5 {
            assert!(successes > 0);
        }
    }
}

#[test]
fn spectral_and_brute_force_agree() {
    let mut rng = SeededRng::new(5, 3);
    let mut cases: Vec<(TestMessage, PureQubit)> = Vec::new();
    for (phi, msg) in corpus(120, 5) {
        let other = sample_haar_qubit(&mut rng);
        cases.push((msg.clone(), phi));
        if cases.len().is_multiple_of(3) {
            cases.push((msg, other));
        }
    }
    while cases.len() < 200 {
        let phi = sample_haar_qubit(&mut rng);
        let other = sample_haar_qubit(&mut rng);
        cases.push((scp_message(&phi), phi));
        cases.push((scp_message(&phi), other));
        cases.push((classical_direction_message(phi.bloch()).unwrap(), phi));
        cases.push((trivial_cheat_message(), phi));
    }
    let mut convincing = 0;
    for (msg, phi) in &cases {
        let spectral = check_convincing(msg, phi).unwrap();
        let oracle = brute_force_check(msg, phi, 2000).unwrap();
        assert!(oracle.agrees_with(&spectral), "{spectral:?} vs {oracle:?}");
        convincing += spectral.is_convincing() as usize;
    }
    assert!(convincing > 0 && convincing < cases.len());
}

fn random_instrument(branches: usize, seed: u64) -> Instrument {
    let mut rng = SeededRng::new(seed, 0);
    let cols = random_orthonormal_completion(&[], 2 * branches, 2, &mut rng);
    let branches = (0..branches)
        .map(|b| {
            let mut k = ComplexMatrix::zeros(2, 2);
            for (j, col) in cols.iter().enumerate() {
                k[(0, j)] = col[2 * b];
                k[(1, j)] = col[2 * b + 1];
            }
            Branch::new(format!("o{b}"), k)
        })
        .collect();
    Instrument::new(2, 2, branches).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepting_more_never_lowers_acceptance(seed in any::<u64>(), k in 2usize..6, mask in 1u32..32) {
        let inst = random_instrument(k, seed);
        let labels: Vec<String> = (0..k).map(|b| format!("o{b}")).collect();
        let small: Vec<String> = labels.iter().enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0).map(|(_, l)| l.clone()).collect();
        prop_assume!(!small.is_empty());
        let small_msg = TestMessage::new(inst.clone(), small, None, "").unwrap();
        let full_msg = TestMessage::new(inst, labels, None, "").unwrap();
        let mut rng = SeededRng::new(seed ^ 1, 0);
        for _ in 0..8 {
            let phi = sample_haar_qubit(&mut rng);
            let a = check_convincing(&small_msg, &phi).unwrap().acceptance_probability;
            let b = check_convincing(&full_msg, &phi).unwrap().acceptance_probability;
            prop_assert!(b >= a - 1e-12);
            prop_assert!((b - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn random_messages_are_convincing(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = SeededRng::new(seed, 0);
        let phi = sample_haar_qubit(&mut rng);
        let msg = random_convincing_message(&phi, d, &mut rng).unwrap();
        let v = check_convincing(&msg, &phi).unwrap();
        prop_assert!(v.is_convincing());
        prop_assert!(v.certified_state.unwrap().fidelity(&phi) >= 1.0 - 1e-9);
    }
}
