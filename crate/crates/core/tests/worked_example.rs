mod example;

use example::*;
use fbcode_core::channel::{exhaustive_verify, simulate, Scripted, DEFAULT_LEAF_CAP};
use fbcode_core::solver::verify_strategy;
use fbcode_core::State;

#[test]
fn scripted_tree_is_a_valid_strategy() {
    assert_eq!(verify_strategy(&scripted_tree(), q3()), Ok(()));
}

#[test]
fn trajectory_and_votes() {
    let code = scripted_code();
    let expected = ["0,9", "6,3", "4,1", "3", "1"];
    // Messages with one negative vote after each round.
    let one_vote: [&[u64]; 4] = [&[A, B, C, D, E, F], &[B, E, G, I], &[B, E, H], &[E]];
    for round in 0..=4 {
        let r = code.replay(&RECEIVED[..round]).unwrap();
        let s = r.ledger().state();
        assert_eq!(s.trimmed(), expected[round].parse::<State>().unwrap(), "round {round}");
        assert_eq!(r.policy_state().unwrap(), s);
        if round > 0 {
            let with_one: Vec<u64> = r.ledger().alive_reals().filter(|&id| r.ledger().votes(id) == 1).collect();
            assert_eq!(with_one, one_vote[round - 1]);
        }
    }
}

#[test]
fn e_sends_and_is_decoded() {
    let code = scripted_code();
    assert_eq!(code.encode_step(E, &[]).unwrap(), 1);
    assert_eq!(code.encode_step(E, &[2]).unwrap(), 1);
    assert_eq!(code.encode_step(E, &[2, 1]).unwrap(), 1);
    assert_eq!(code.encode_step(E, &[2, 1, 1]).unwrap(), 0);
    assert_eq!(code.decode(&RECEIVED).unwrap(), E);

    let t = simulate(&code, &mut Scripted(vec![Some(2)]), E).unwrap();
    assert_eq!(t.sent, vec![1, 1, 1, 0]);
    assert_eq!(t.received, RECEIVED.to_vec());
    assert_eq!(t.error_positions, vec![0]);
    assert_eq!(t.decoded, Some(E));
}

#[test]
fn scripted_code_survives_every_adversary() {
    let r = exhaustive_verify(&scripted_code(), DEFAULT_LEAF_CAP).unwrap();
    assert!(r.passed(), "{:?}", r.counterexample);
    assert_eq!(r.paths, 81);
}

#[test]
fn first_round_without_overrides_is_in_id_order() {
    let code = fbcode_core::codec::FeedbackCode::from_strategy(scripted_tree(), q3(), 9, 1).unwrap();
    let parts: Vec<u32> = (0..9).map(|id| code.encode_step(id, &[]).unwrap()).collect();
    assert_eq!(parts, vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
}
