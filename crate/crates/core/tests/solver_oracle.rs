mod oracle;

use fbcode_core::bounds::volume_bound_holds;
use fbcode_core::solver::{verify_strategy, Solver, SolverConfig};
use fbcode_core::state::dominates_tailsum;
use fbcode_core::{Alphabet, State};
use oracle::{small_states, Oracle};

fn state(c: &[u64]) -> State {
    State::from_counts(c.iter().copied()).unwrap()
}

fn unpruned(q: Alphabet) -> Solver {
    Solver::with_config(
        q,
        SolverConfig {
            pruning: false,
            ..SolverConfig::default()
        },
    )
}

#[test]
fn solver_matches_brute_force_on_small_corpus() {
    for qq in [2u32, 3] {
        let q = Alphabet::new(qq).unwrap();
        let mut oracle = Oracle::new(qq as usize);
        let mut pruned = Solver::new(q);
        let mut plain = unpruned(q);
        let mut tally = [0usize; 2];
        for c in small_states(3, 4) {
            for n in 0..=4 {
                let expected = oracle.wins(&c, n);
                tally[usize::from(expected)] += 1;
                let s = state(&c);
                assert_eq!(pruned.decide(&s, n).unwrap(), expected, "pruned {s}@{n} q={qq}");
                assert_eq!(plain.decide(&s, n).unwrap(), expected, "plain {s}@{n} q={qq}");
            }
        }
        assert!(tally[0] > 50 && tally[1] > 50, "{tally:?}");
    }
}

#[test]
fn extracted_strategies_verify_on_corpus() {
    let q = Alphabet::new(3).unwrap();
    let mut solver = Solver::new(q);
    for c in small_states(3, 4) {
        for n in 0..=4 {
            let s = state(&c);
            if solver.decide(&s, n).unwrap() {
                let t = solver.extract_strategy(&s, n).unwrap();
                assert_eq!(verify_strategy(&t, q), Ok(()), "{s}@{n}");
            }
        }
    }
}

#[test]
fn monotonicity_and_translation_on_corpus() {
    for qq in [2u32, 3, 4] {
        let q = Alphabet::new(qq).unwrap();
        let mut solver = Solver::new(q);
        let corpus = small_states(3, 5);
        for c in &corpus {
            let s = state(c);
            for n in 0..=6 {
                let w = solver.decide(&s, n).unwrap();
                if !w {
                    continue;
                }
                assert!(solver.decide(&s, n + 1).unwrap(), "monotone {s}@{n}");
                assert!(volume_bound_holds(&s, n, q), "volume {s}@{n}");
                if s.budget() >= 1 && n >= 2 {
                    let t = s.translate().unwrap();
                    assert!(solver.decide(&t, n - 2).unwrap(), "translation {s}@{n} q={qq}");
                }
            }
        }
        // Tail-sum domination against winning states of the same dimension.
        for d in corpus.iter().filter(|d| d.len() == 3) {
            let ds = state(d);
            for n in 1..=4 {
                if !solver.decide(&ds, n).unwrap() {
                    continue;
                }
                for c in corpus.iter().filter(|c| c.len() == 3) {
                    let cs = state(c);
                    if dominates_tailsum(&cs, &ds).unwrap() {
                        assert!(solver.decide(&cs, n).unwrap(), "{cs} below {ds}@{n}");
                    }
                }
            }
        }
    }
}

#[test]
fn saturating_states_win_for_q3_q4() {
    for qq in [3u64, 4] {
        let q = Alphabet::new(qq as u32).unwrap();
        let mut solver = Solver::new(q);
        let cases = [
            (vec![(qq - 1).pow(2), 1], 2),
            (vec![qq * (qq - 1) * (qq - 2), qq], 3),
            (vec![(qq - 1).pow(3), 0, 1], 3),
        ];
        for (c, n) in cases {
            let s = state(&c);
            assert!(solver.decide(&s, n).unwrap(), "{s}@{n}");
            // Saturated: one more bottom element breaks the volume bound.
            let mut bigger = c.clone();
            bigger[0] += 1;
            assert!(!solver.decide(&state(&bigger), n).unwrap());
        }
    }
}

#[test]
fn blocklengths_for_two_errors() {
    let q = Alphabet::new(3).unwrap();
    let mut solver = Solver::new(q);
    let n = solver.min_blocklength(&4u32.into(), 2).unwrap();
    assert!(n >= fbcode_core::bounds::min_blocklength_converse(&4u32.into(), 2, q));
    let t = solver.extract_strategy(&State::initial(4u32.into(), 2).unwrap(), n).unwrap();
    assert_eq!(verify_strategy(&t, q), Ok(()));
    assert!(!solver.decide(&State::initial(4u32.into(), 2).unwrap(), n - 1).unwrap());
}
