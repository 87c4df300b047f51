use fbcode_core::channel::{exhaustive_verify, paths_per_message, simulate, Greedy, RandomAdversary, DEFAULT_LEAF_CAP};
use fbcode_core::codec::FeedbackCode;
use fbcode_core::solver::Solver;
use fbcode_core::{Alphabet, State};
use num_bigint::BigUint;

fn q3() -> Alphabet {
    Alphabet::new(3).unwrap()
}

fn solver_code(messages: u64, e: usize) -> FeedbackCode {
    let mut solver = Solver::new(q3());
    let n = solver.min_blocklength(&messages.into(), e).unwrap();
    let t = solver
        .extract_strategy(&State::initial(messages.into(), e).unwrap(), n)
        .unwrap();
    FeedbackCode::from_strategy(t, q3(), messages, e).unwrap()
}

#[test]
fn table_codes_verify() {
    for (m, e, n, paths) in [(6u64, 1usize, 5usize, 66u64), (9, 1, 7, 135), (24, 1, 7, 360), (3, 0, 1, 3), (10, 2, 9, 0)] {
        let code = FeedbackCode::from_table(m, e, q3()).unwrap();
        assert_eq!(code.block_length(), n);
        let r = exhaustive_verify(&code, DEFAULT_LEAF_CAP).unwrap();
        assert!(r.passed(), "M={m} e={e}: {:?}", r.counterexample);
        if paths > 0 {
            assert_eq!(r.paths, paths);
        }
    }
}

#[test]
fn solver_codes_verify() {
    for (m, e) in [(9u64, 1usize), (4, 2), (2, 1), (24, 1), (1, 2)] {
        let code = solver_code(m, e);
        let r = exhaustive_verify(&code, DEFAULT_LEAF_CAP).unwrap();
        assert!(r.passed(), "M={m} e={e}: {:?}", r.counterexample);
        assert_eq!(BigUint::from(r.paths_per_message), paths_per_message(&code));
    }
}

#[test]
fn adaptive_adversaries_never_win_within_budget() {
    let codes = [solver_code(9, 1), FeedbackCode::from_table(24, 1, q3()).unwrap(), solver_code(4, 2)];
    for code in &codes {
        for theta in 0..code.messages() {
            let t = simulate(code, &mut Greedy { budget: code.errors() }, theta).unwrap();
            assert!(t.ok, "{t}");
            for seed in 0..20 {
                let t = simulate(code, &mut RandomAdversary::new(seed, code.errors()), theta).unwrap();
                assert!(t.ok, "{t}");
            }
        }
    }
}

#[test]
fn feedback_causality_by_replay() {
    // α_i depends only on θ and β_<i: recomputing it from the prefix alone
    // reproduces every sent symbol.
    let code = FeedbackCode::from_table(24, 1, q3()).unwrap();
    for theta in 0..24 {
        for seed in 0..5 {
            let t = simulate(&code, &mut RandomAdversary::new(seed, 1), theta).unwrap();
            for i in 0..t.sent.len() {
                assert_eq!(code.encode_step(theta, &t.received[..i]).unwrap(), t.sent[i]);
            }
            let errors = t.sent.iter().zip(&t.received).filter(|(a, b)| a != b).count();
            assert_eq!(errors, t.error_positions.len());
        }
    }
}
