//! The nine-message, one-error ternary game played over four rounds, with
//! the exact sets asked in each round. Message ids: A..I = 0..8.

use fbcode_core::codec::FeedbackCode;
use fbcode_core::solver::StrategyTree;
use fbcode_core::{Alphabet, Error, Partition, State};

pub const A: u64 = 0;
pub const B: u64 = 1;
pub const C: u64 = 2;
pub const D: u64 = 3;
pub const E: u64 = 4;
pub const F: u64 = 5;
pub const G: u64 = 6;
pub const H: u64 = 7;
pub const I: u64 = 8;

pub const RECEIVED: [u32; 4] = [2, 1, 1, 0];

pub fn q3() -> Alphabet {
    Alphabet::new(3).unwrap()
}

/// Partition by state, as in the example; other states never occur.
pub fn scripted_tree() -> StrategyTree {
    StrategyTree::from_policy("0,9".parse().unwrap(), 4, q3(), |c: &State, n| {
        let p = match (c.to_string().as_str(), n) {
            ("0,9", 4) => "0,3|0,3|0,3",
            ("6,3", 3) => "2,1|2,1|2,1",
            ("4,1", 2) => "0,1|2,0|2,0",
            ("3,0", 1) => "1,0|1,0|1,0",
            ("0,1", 1) => "0,1|0,0|0,0",
            _ => return Err(Error::Parse(format!("no scripted question for {c} at {n}"))),
        };
        p.parse::<Partition>()
    })
    .unwrap()
}

pub fn scripted_code() -> FeedbackCode {
    FeedbackCode::from_strategy(scripted_tree(), q3(), 9, 1)
        .unwrap()
        .with_override(vec![], vec![vec![A, B, C], vec![D, E, F], vec![G, H, I]])
        .unwrap()
        .with_override(vec![2], vec![vec![G, A, D], vec![H, B, E], vec![I, C, F]])
        .unwrap()
        .with_override(vec![2, 1], vec![vec![H], vec![B, E], vec![G, I]])
        .unwrap()
        .with_override(vec![2, 1, 1], vec![vec![E], vec![B], vec![H]])
        .unwrap()
}
