//! Adversarial channel harness.
//!
//! Adversaries are omniscient: they see the code, the message and the
//! decoder's ledger, and choose each received symbol after seeing the sent
//! one. An error is any round with `β_i != α_i`.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::ball_weights;
use crate::codec::{join_symbols, FeedbackCode, Replay};
use crate::{Error, Result};

/// What an adversary may look at before answering round `round`.
pub struct AdversaryView<'a> {
    pub code: &'a FeedbackCode,
    pub theta: u64,
    pub round: usize,
    /// `α_i` for this round.
    pub sent: u32,
    pub history_sent: &'a [u32],
    pub history_received: &'a [u32],
    pub errors_used: usize,
    /// Decoder state before this round.
    pub replay: &'a Replay<'a>,
}

pub trait Adversary {
    /// `β_i`; must lie in `0..q`.
    fn respond(&mut self, view: &AdversaryView<'_>) -> u32;
}

/// Never alters a symbol.
#[derive(Clone, Copy, Debug, Default)]
pub struct Silent;

impl Adversary for Silent {
    fn respond(&mut self, view: &AdversaryView<'_>) -> u32 {
        view.sent
    }
}

/// Fixed received symbols per round; `None` passes the sent symbol.
#[derive(Clone, Debug, Default)]
pub struct Scripted(pub Vec<Option<u32>>);

impl Adversary for Scripted {
    fn respond(&mut self, view: &AdversaryView<'_>) -> u32 {
        self.0.get(view.round).copied().flatten().unwrap_or(view.sent)
    }
}

/// Picks the symbol leaving the most live elements, within `budget`
/// errors. Ties favour the sent symbol, then the smallest.
#[derive(Clone, Copy, Debug)]
pub struct Greedy {
    pub budget: usize,
}

impl Greedy {
    fn survivors(replay: &Replay<'_>, beta: u32) -> Option<BigUint> {
        let mut next = replay.clone();
        next.step(beta).ok()?;
        let ledger = next.ledger();
        Some(ledger.dummies().iter().sum::<BigUint>() + ledger.alive_reals().count())
    }
}

impl Adversary for Greedy {
    fn respond(&mut self, view: &AdversaryView<'_>) -> u32 {
        let mut best = view.sent;
        let mut best_score = Greedy::survivors(view.replay, view.sent);
        if view.errors_used >= self.budget {
            return best;
        }
        for beta in 0..view.code.alphabet().get() {
            if beta == view.sent {
                continue;
            }
            let score = Greedy::survivors(view.replay, beta);
            if score > best_score {
                best = beta;
                best_score = score;
            }
        }
        best
    }
}

/// Flips each round with probability 1/2 while budget remains, to a
/// uniformly chosen other symbol.
#[derive(Clone, Debug)]
pub struct RandomAdversary {
    rng: ChaCha8Rng,
    budget: usize,
}

impl RandomAdversary {
    pub fn new(seed: u64, budget: usize) -> Self {
        RandomAdversary {
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget,
        }
    }
}

impl Adversary for RandomAdversary {
    fn respond(&mut self, view: &AdversaryView<'_>) -> u32 {
        let q = view.code.alphabet().get();
        if view.errors_used >= self.budget || !self.rng.gen_bool(0.5) {
            return view.sent;
        }
        let shift = self.rng.gen_range(1..q);
        (view.sent + shift) % q
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AdversaryKind {
    Silent,
    Scripted(Vec<Option<u32>>),
    Greedy,
    Random { seed: u64 },
}

impl AdversaryKind {
    /// An adversary allowed `budget` errors (scripts ignore the budget).
    pub fn instantiate(&self, budget: usize) -> Box<dyn Adversary> {
        match self {
            AdversaryKind::Silent => Box::new(Silent),
            AdversaryKind::Scripted(s) => Box::new(Scripted(s.clone())),
            AdversaryKind::Greedy => Box::new(Greedy { budget }),
            AdversaryKind::Random { seed } => Box::new(RandomAdversary::new(*seed, budget)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub theta: u64,
    pub sent: Vec<u32>,
    pub received: Vec<u32>,
    /// Rounds (0-based) with `β_i != α_i`.
    pub error_positions: Vec<usize>,
    pub decoded: Option<u64>,
    pub ok: bool,
}

/// `theta,sent,received,errors,decoded,ok`, symbols joined by `:`.
impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},",
            self.theta,
            join_symbols(&self.sent),
            join_symbols(&self.received),
            self.error_positions.len()
        )?;
        if let Some(d) = self.decoded {
            write!(f, "{}", d)?;
        }
        write!(f, ",{}", self.ok)
    }
}

pub const TRANSCRIPT_HEADER: &str = "theta,sent,received,errors,decoded,ok";

/// Runs all `n` rounds for message `theta`.
pub fn simulate(code: &FeedbackCode, adversary: &mut dyn Adversary, theta: u64) -> Result<Transcript> {
    code.check_message(theta)?;
    let mut replay = code.replay(&[])?;
    let mut sent = Vec::with_capacity(code.block_length());
    let mut received = Vec::with_capacity(code.block_length());
    let mut error_positions = Vec::new();
    for round in 0..code.block_length() {
        let alpha = replay.part_of(theta)?;
        let beta = adversary.respond(&AdversaryView {
            code,
            theta,
            round,
            sent: alpha,
            history_sent: &sent,
            history_received: &received,
            errors_used: error_positions.len(),
            replay: &replay,
        });
        replay.step(beta)?;
        if beta != alpha {
            error_positions.push(round);
        }
        sent.push(alpha);
        received.push(beta);
    }
    let decoded = replay.unique_survivor().ok();
    Ok(Transcript {
        theta,
        sent,
        received,
        error_positions,
        decoded,
        ok: decoded == Some(theta),
    })
}

/// A path on which decoding fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub theta: u64,
    pub sent: Vec<u32>,
    pub received: Vec<u32>,
    pub outcome: Result<u64>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "theta {} sent {} received {}: ",
            self.theta,
            join_symbols(&self.sent),
            join_symbols(&self.received)
        )?;
        match &self.outcome {
            Ok(d) => write!(f, "decoded {}", d),
            Err(e) => write!(f, "{}", e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageReport {
    pub theta: u64,
    pub leaves: u64,
    pub counterexample: Option<Counterexample>,
}

/// Paths with at most `e` errors over `n` rounds: `V_n` of one element.
pub fn paths_per_message(code: &FeedbackCode) -> BigUint {
    let e = code.errors();
    ball_weights(code.block_length(), e, code.alphabet())
        .pop()
        .unwrap_or_default()
}

/// Every adaptive output sequence with at most `e` errors for one message;
/// stops at the first failure.
pub fn verify_message(code: &FeedbackCode, theta: u64) -> Result<MessageReport> {
    code.check_message(theta)?;
    let mut report = MessageReport {
        theta,
        leaves: 0,
        counterexample: None,
    };
    let mut sent = Vec::with_capacity(code.block_length());
    dfs(code, theta, code.replay(&[])?, 0, &mut sent, &mut report)?;
    Ok(report)
}

fn dfs(
    code: &FeedbackCode,
    theta: u64,
    replay: Replay<'_>,
    errors: usize,
    sent: &mut Vec<u32>,
    report: &mut MessageReport,
) -> Result<()> {
    if replay.is_finished() {
        report.leaves += 1;
        let outcome = replay.unique_survivor();
        if outcome != Ok(theta) {
            report.counterexample = Some(Counterexample {
                theta,
                sent: sent.clone(),
                received: replay.received().to_vec(),
                outcome,
            });
        }
        return Ok(());
    }
    let alpha = replay.part_of(theta)?;
    sent.push(alpha);
    for beta in 0..code.alphabet().get() {
        let cost = usize::from(beta != alpha);
        if errors + cost > code.errors() {
            continue;
        }
        let mut next = replay.clone();
        next.step(beta)?;
        dfs(code, theta, next, errors + cost, sent, report)?;
        if report.counterexample.is_some() {
            break;
        }
    }
    sent.pop();
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub messages: u64,
    pub paths_per_message: u64,
    /// Leaves actually visited, over all messages checked.
    pub paths: u64,
    pub counterexample: Option<Counterexample>,
}

impl VerifyReport {
    /// Folds per-message reports, in message order.
    pub fn combine(code: &FeedbackCode, reports: impl IntoIterator<Item = MessageReport>) -> Result<Self> {
        let per = paths_per_message(code).to_u64().ok_or(Error::BudgetExceeded {
            needed: paths_per_message(code).to_string(),
            cap: u64::MAX,
        })?;
        let mut out = VerifyReport {
            messages: code.messages(),
            paths_per_message: per,
            paths: 0,
            counterexample: None,
        };
        for r in reports {
            out.paths += r.leaves;
            if out.counterexample.is_none() {
                out.counterexample = r.counterexample;
            }
        }
        Ok(out)
    }

    /// No counterexample, and the leaf count matches the path identity.
    pub fn passed(&self) -> bool {
        self.counterexample.is_none() && self.paths == self.messages * self.paths_per_message
    }
}

pub const DEFAULT_LEAF_CAP: u64 = 10_000_000;

/// Fails with [`Error::BudgetExceeded`] when `M` times the per-message path
/// count exceeds `cap`.
pub fn check_leaf_budget(code: &FeedbackCode, cap: u64) -> Result<()> {
    let needed = paths_per_message(code) * code.messages();
    if needed > BigUint::from(cap) {
        return Err(Error::BudgetExceeded {
            needed: needed.to_string(),
            cap,
        });
    }
    Ok(())
}

pub fn exhaustive_verify(code: &FeedbackCode, cap: u64) -> Result<VerifyReport> {
    check_leaf_budget(code, cap)?;
    let mut reports = vec![];
    for theta in 0..code.messages() {
        let r = verify_message(code, theta)?;
        let failed = r.counterexample.is_some();
        reports.push(r);
        if failed {
            break;
        }
    }
    VerifyReport::combine(code, reports)
}
