//! Executable feedback codes.
//!
//! A code is a questioning policy plus a rule that maps the policy's class
//! counts onto concrete message ids. Both sides replay the received symbols
//! through a [`VoteLedger`]: the encoder to find the part holding `θ`, the
//! decoder to find the last candidate standing.
//!
//! The ledger works in the policy's budget `E >= e`. Real messages start
//! with `E - e` phantom votes; slots of the policy's root state not taken by
//! real messages are dummies, tracked only as counts per capacity. Within a
//! capacity class, parts are filled in order `p^0, p^1, ..`, real ids
//! ascending first, then dummies.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::solver::StrategyTree;
use crate::state::{dominates_componentwise, Alphabet, Partition, State};
use crate::table::{achievable_blocklength, TableA};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TablePolicy {
    table: TableA,
    /// Root row: the code walks down from `Ā_{m,1}`.
    m: usize,
    /// Offset with `m = e + i`; real messages carry `i - 1` phantom votes.
    i: usize,
}

impl TablePolicy {
    pub fn table(&self) -> &TableA {
        &self.table
    }

    pub fn root_row(&self) -> usize {
        self.m
    }

    pub fn offset(&self) -> usize {
        self.i
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Policy {
    Strategy(StrategyTree),
    Table(TablePolicy),
}

/// Explicit sets of real ids per part, keyed by the received prefix.
pub type Overrides = BTreeMap<Vec<u32>, Vec<Vec<u64>>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeedbackCode {
    messages: u64,
    e: usize,
    q: Alphabet,
    n: usize,
    budget: usize,
    root: State,
    policy: Policy,
    overrides: Overrides,
}

/// Code rate: exact `k/n` when `M = q^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rate {
    Exact { k: u32, n: usize },
    Approx(f64),
}

impl Rate {
    pub fn value(self) -> f64 {
        match self {
            Rate::Exact { k, n } => k as f64 / n as f64,
            Rate::Approx(r) => r,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Exact { k, n } => write!(f, "{}/{}", k, n),
            Rate::Approx(r) => write!(f, "{}", r),
        }
    }
}

impl FeedbackCode {
    /// Wraps a strategy whose root covers `messages` candidates with budget
    /// `e`, after embedding. The tree itself is not checked here.
    pub fn from_strategy(tree: StrategyTree, q: Alphabet, messages: u64, e: usize) -> Result<Self> {
        let root = tree.state().clone();
        let budget = root.budget();
        if budget < e {
            return Err(Error::RootMismatch);
        }
        let initial = State::initial(BigUint::from(messages), e)?.embed(budget - e);
        if !dominates_componentwise(&initial, &root)? {
            return Err(Error::RootMismatch);
        }
        Ok(FeedbackCode {
            messages,
            e,
            q,
            n: tree.remaining(),
            budget,
            root,
            policy: Policy::Strategy(tree),
            overrides: Overrides::new(),
        })
    }

    /// The table construction: messages sit at capacity `e` inside
    /// `Ā_{e+i,1}`, everything else is a dummy.
    pub fn from_table(messages: u64, e: usize, q: Alphabet) -> Result<Self> {
        let ach = achievable_blocklength(&BigUint::from(messages), e, q)?;
        let m = e + ach.i;
        let table = TableA::build(q, m, 2 * m + 1)?;
        let root = table.column_state(m, 1)?;
        let initial = State::initial(BigUint::from(messages), e)?.embed(ach.i - 1);
        if !dominates_componentwise(&initial, &root)? {
            return Err(Error::RootMismatch);
        }
        Ok(FeedbackCode {
            messages,
            e,
            q,
            n: ach.n,
            budget: m - 1,
            root,
            policy: Policy::Table(TablePolicy { table, m, i: ach.i }),
            overrides: Overrides::new(),
        })
    }

    /// Pins the real ids of each part after `prefix` has been received.
    /// Overrides on shorter prefixes should be added first.
    pub fn with_override(mut self, prefix: Vec<u32>, sets: Vec<Vec<u64>>) -> Result<Self> {
        if prefix.len() >= self.n {
            return Err(Error::TranscriptLength {
                expected: self.n,
                found: prefix.len(),
            });
        }
        let replay = self.replay(&prefix)?;
        replay.assignment_from_sets(&sets)?;
        self.overrides.insert(prefix, sets);
        Ok(self)
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn errors(&self) -> usize {
        self.e
    }

    pub fn alphabet(&self) -> Alphabet {
        self.q
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    /// Budget `E` the policy is played in.
    pub fn policy_budget(&self) -> usize {
        self.budget
    }

    pub fn root_state(&self) -> &State {
        &self.root
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn overrides(&self) -> &Overrides {
        &self.overrides
    }

    pub fn rate(&self) -> Rate {
        let q = u64::from(self.q.get());
        let mut power = 1u64;
        let mut k = 0u32;
        while power < self.messages {
            match power.checked_mul(q) {
                Some(p) => {
                    power = p;
                    k += 1;
                }
                None => break,
            }
        }
        if power == self.messages {
            Rate::Exact { k, n: self.n }
        } else {
            Rate::Approx(libm::log(self.messages as f64) / libm::log(q as f64) / self.n as f64)
        }
    }

    /// Ledger and policy position after `received`.
    pub fn replay(&self, received: &[u32]) -> Result<Replay<'_>> {
        if received.len() > self.n {
            return Err(Error::TranscriptLength {
                expected: self.n,
                found: received.len(),
            });
        }
        let mut r = Replay::start(self);
        for &b in received {
            r.step(b)?;
        }
        Ok(r)
    }

    /// `α = f_i(θ, β_1..β_{i-1})` with `i = received.len() + 1`.
    pub fn encode_step(&self, theta: u64, received: &[u32]) -> Result<u32> {
        self.check_message(theta)?;
        if received.len() >= self.n {
            return Err(Error::TranscriptLength {
                expected: self.n,
                found: received.len(),
            });
        }
        self.replay(received)?.part_of(theta)
    }

    pub fn decode(&self, received: &[u32]) -> Result<u64> {
        if received.len() != self.n {
            return Err(Error::TranscriptLength {
                expected: self.n,
                found: received.len(),
            });
        }
        self.replay(received)?.unique_survivor()
    }

    pub fn check_message(&self, theta: u64) -> Result<()> {
        if theta >= self.messages {
            return Err(Error::MessageOutOfRange {
                theta,
                messages: self.messages,
            });
        }
        Ok(())
    }
}

/// Negative votes per real message and dummy counts per capacity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoteLedger {
    budget: usize,
    votes: Vec<u32>,
    dummies: Vec<BigUint>,
}

impl VoteLedger {
    fn new(code: &FeedbackCode) -> Self {
        let phantom = (code.budget - code.e) as u32;
        let mut dummies = code.root.counts().to_vec();
        dummies[code.e] -= BigUint::from(code.messages);
        VoteLedger {
            budget: code.budget,
            votes: vec![phantom; code.messages as usize],
            dummies,
        }
    }

    pub fn votes(&self, id: u64) -> u32 {
        self.votes[id as usize]
    }

    /// Remaining capacity, `None` once eliminated.
    pub fn capacity(&self, id: u64) -> Option<usize> {
        (self.budget as u64).checked_sub(u64::from(self.votes[id as usize])).map(|c| c as usize)
    }

    pub fn dummies(&self) -> &[BigUint] {
        &self.dummies
    }

    pub fn alive_reals(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.votes.len() as u64).filter(|&id| self.capacity(id).is_some())
    }

    /// Class counts of reals and dummies together: the current state.
    pub fn state(&self) -> State {
        let mut counts = self.dummies.clone();
        for id in self.alive_reals() {
            if let Some(c) = self.capacity(id) {
                counts[c] += 1u32;
            }
        }
        State::new(counts).expect("ledger has at least one class")
    }
}

/// Which part every live element joins at one node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    /// Part of each real id; `None` for eliminated ids.
    pub real_parts: Vec<Option<u32>>,
    /// `dummies[j][c]`: dummies with capacity `c` placed in part `j`.
    pub dummies: Vec<Vec<BigUint>>,
}

#[derive(Clone, Debug)]
enum Cursor<'a> {
    Strategy(&'a StrategyTree),
    Table { m: usize, k: usize },
}

/// A code replayed along a received prefix.
#[derive(Clone, Debug)]
pub struct Replay<'a> {
    code: &'a FeedbackCode,
    received: Vec<u32>,
    ledger: VoteLedger,
    cursor: Cursor<'a>,
}

impl<'a> Replay<'a> {
    fn start(code: &'a FeedbackCode) -> Self {
        let cursor = match &code.policy {
            Policy::Strategy(t) => Cursor::Strategy(t),
            Policy::Table(tp) => Cursor::Table { m: tp.m, k: 1 },
        };
        Replay {
            code,
            received: Vec::new(),
            ledger: VoteLedger::new(code),
            cursor,
        }
    }

    pub fn code(&self) -> &'a FeedbackCode {
        self.code
    }

    pub fn round(&self) -> usize {
        self.received.len()
    }

    pub fn received(&self) -> &[u32] {
        &self.received
    }

    pub fn ledger(&self) -> &VoteLedger {
        &self.ledger
    }

    pub fn is_finished(&self) -> bool {
        self.received.len() == self.code.n
    }

    /// The state the policy expects here, at the policy budget.
    pub fn policy_state(&self) -> Result<State> {
        match &self.cursor {
            Cursor::Strategy(t) => Ok(t.state().clone()),
            Cursor::Table { m, k } => match &self.code.policy {
                Policy::Table(tp) => tp.table.embedded_state(*m, *k, self.code.budget + 1),
                Policy::Strategy(_) => unreachable!("table cursor on a strategy code"),
            },
        }
    }

    /// The question asked at this node.
    pub fn partition(&self) -> Result<Partition> {
        let dim = self.code.budget + 1;
        match &self.cursor {
            Cursor::Strategy(t) => t
                .partition()
                .cloned()
                .ok_or(Error::Domain("strategy tree ends before the block length")),
            Cursor::Table { m, k } => {
                let Policy::Table(tp) = &self.code.policy else {
                    unreachable!("table cursor on a strategy code")
                };
                if *m == 0 {
                    return Ok(Partition::trivial(&State::zero(dim - 1), self.code.q));
                }
                Ok(tp.table.partition(*m, *k)?.embed(dim - m))
            }
        }
    }

    pub fn assignment(&self) -> Result<Assignment> {
        match self.code.overrides.get(&self.received) {
            Some(sets) => self.assignment_from_sets(sets),
            None => self.default_assignment(),
        }
    }

    fn checked_partition(&self) -> Result<Partition> {
        let p = self.partition()?;
        let have = self.ledger.state();
        p.validate(&have, self.code.q).map_err(|err| match err {
            Error::PartitionSum { level } => Error::LedgerMismatch { level },
            other => other,
        })?;
        Ok(p)
    }

    fn default_assignment(&self) -> Result<Assignment> {
        let p = self.checked_partition()?;
        let dim = self.code.budget + 1;
        let q = self.code.q.size();
        let mut by_class: Vec<Vec<u64>> = vec![Vec::new(); dim];
        for id in self.ledger.alive_reals() {
            if let Some(c) = self.ledger.capacity(id) {
                by_class[c].push(id);
            }
        }
        let mut real_parts = vec![None; self.ledger.votes.len()];
        let mut dummies = vec![vec![BigUint::zero(); dim]; q];
        for (c, ids) in by_class.iter().enumerate() {
            let mut next = 0usize;
            for (j, part) in p.parts().iter().enumerate() {
                let want = &part.counts()[c];
                let free = ids.len() - next;
                let take = want.to_usize().map_or(free, |w| w.min(free));
                for &id in &ids[next..next + take] {
                    real_parts[id as usize] = Some(j as u32);
                }
                next += take;
                dummies[j][c] = want - BigUint::from(take);
            }
        }
        Ok(Assignment { real_parts, dummies })
    }

    fn assignment_from_sets(&self, sets: &[Vec<u64>]) -> Result<Assignment> {
        let p = self.checked_partition()?;
        let q = self.code.q.size();
        if sets.len() != q {
            return Err(Error::InvalidAssignment(format!("expected {} sets, got {}", q, sets.len())));
        }
        let dim = self.code.budget + 1;
        let mut real_parts: Vec<Option<u32>> = vec![None; self.ledger.votes.len()];
        let mut dummies: Vec<Vec<BigUint>> = p.parts().iter().map(|s| s.counts().to_vec()).collect();
        for (j, set) in sets.iter().enumerate() {
            for &id in set {
                self.code.check_message(id)?;
                let Some(c) = self.ledger.capacity(id) else {
                    return Err(Error::InvalidAssignment(format!("message {} is already eliminated", id)));
                };
                if real_parts[id as usize].replace(j as u32).is_some() {
                    return Err(Error::InvalidAssignment(format!("message {} appears twice", id)));
                }
                if dummies[j][c].is_zero() {
                    return Err(Error::InvalidAssignment(format!(
                        "part {} has too many messages with capacity {}",
                        j, c
                    )));
                }
                dummies[j][c] -= 1u32;
            }
        }
        if let Some(id) = self.ledger.alive_reals().find(|&id| real_parts[id as usize].is_none()) {
            return Err(Error::InvalidAssignment(format!("message {} is in no set", id)));
        }
        for c in 0..dim {
            let placed: BigUint = dummies.iter().map(|d| &d[c]).sum();
            if placed != self.ledger.dummies[c] {
                return Err(Error::InvalidAssignment(format!("capacity {} does not match the partition", c)));
            }
        }
        Ok(Assignment { real_parts, dummies })
    }

    /// The symbol `θ` sends here: its part, or 0 once eliminated.
    pub fn part_of(&self, theta: u64) -> Result<u32> {
        self.code.check_message(theta)?;
        if self.ledger.capacity(theta).is_none() {
            return Ok(0);
        }
        Ok(self.assignment()?.real_parts[theta as usize].unwrap_or(0))
    }

    /// Applies received symbol `beta`: every live element outside part
    /// `beta` takes a vote.
    pub fn step(&mut self, beta: u32) -> Result<()> {
        if self.is_finished() {
            return Err(Error::TranscriptLength {
                expected: self.code.n,
                found: self.received.len() + 1,
            });
        }
        if beta >= self.code.q.get() {
            return Err(Error::SymbolOutOfRange {
                symbol: beta,
                q: self.code.q.get(),
            });
        }
        let a = self.assignment()?;
        for (id, part) in a.real_parts.iter().enumerate() {
            if matches!(part, Some(j) if *j != beta) {
                self.ledger.votes[id] += 1;
            }
        }
        let top = self.code.budget;
        let b = beta as usize;
        self.ledger.dummies = (0..=top)
            .map(|c| {
                let mut v = a.dummies[b][c].clone();
                if c < top {
                    for (j, d) in a.dummies.iter().enumerate() {
                        if j != b {
                            v += &d[c + 1];
                        }
                    }
                }
                v
            })
            .collect();
        self.cursor = match &self.cursor {
            Cursor::Strategy(t) => Cursor::Strategy(
                t.child(b)
                    .ok_or(Error::Domain("strategy tree ends before the block length"))?,
            ),
            Cursor::Table { m, k } => {
                let Policy::Table(tp) = &self.code.policy else {
                    unreachable!("table cursor on a strategy code")
                };
                let (m, k) = tp.table.child_positions(*m, *k)[b];
                Cursor::Table { m, k }
            }
        };
        self.received.push(beta);
        Ok(())
    }

    /// The only live element, if it is a real message.
    pub fn unique_survivor(&self) -> Result<u64> {
        let mut reals = self.ledger.alive_reals();
        let first = reals.next();
        let more = reals.count() as u64;
        let dummies: BigUint = self.ledger.dummies.iter().sum();
        match first {
            Some(id) if more == 0 && dummies.is_zero() => Ok(id),
            _ => Err(Error::NoUniqueSurvivor {
                messages: more + u64::from(first.is_some()),
                dummies: dummies.to_string(),
            }),
        }
    }
}

pub fn build_from_strategy(tree: StrategyTree, q: Alphabet, messages: u64, e: usize) -> Result<FeedbackCode> {
    FeedbackCode::from_strategy(tree, q, messages, e)
}

pub fn build_from_table(messages: u64, e: usize, q: Alphabet) -> Result<FeedbackCode> {
    FeedbackCode::from_table(messages, e, q)
}

pub(crate) fn join_symbols(symbols: &[u32]) -> String {
    let mut out = String::new();
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 {
            out.push(':');
        }
        out.push_str(&s.to_string());
    }
    out
}
