//! Exact winning-state search.
//!
//! Winning states are closed under lowering counts, so for fixed upper
//! levels `c_1..c_e` there is a largest bottom count `c_0` that still wins.
//! The solver memoizes exactly that quantity:
//!
//! ```text
//! mb(c_1..c_e, n) = max { c_0 : (c_0, c_1, .., c_e) wins with n questions }
//! ```
//!
//! For a partition of the upper levels, the children's upper levels are
//! fixed and part `j` can take `mb(child_j, n-1) - (c_1 - p^j_1)` bottom
//! elements, so `mb` is the best total slack over upper partitions. Parts
//! are exchangeable, so only partitions with `p^0 >= p^1 >= ..` are visited.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::bounds::{ball_weights, min_blocklength_converse, volume_bound_holds};
use crate::state::{check_reduction, reduce, Alphabet, Partition, ReductionOutcome, State};
use crate::{Error, Result};

/// Entries kept per key in the domination caches.
const DOMINATION_CACHE_CAP: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Search nodes (memo misses plus complete partitions) before giving up.
    pub node_limit: u64,
    /// Volume, translation-free shortcuts and domination caches. Off means
    /// plain exhaustive recursion, kept for cross-checking.
    pub pruning: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_limit: 10_000_000,
            pruning: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub cache_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveVerdict {
    pub winning: bool,
    pub strategy: Option<StrategyTree>,
    pub stats: SolveStats,
}

/// A questioning strategy at state granularity. Leaves have no step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTree {
    state: State,
    remaining: usize,
    step: Option<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    partition: Partition,
    children: Vec<StrategyTree>,
}

impl StrategyTree {
    pub fn leaf(state: State) -> Self {
        StrategyTree {
            state,
            remaining: 0,
            step: None,
        }
    }

    /// An internal node. Nothing is checked here; see [`verify_strategy`].
    pub fn internal(state: State, partition: Partition, children: Vec<StrategyTree>) -> Self {
        let remaining = children.first().map_or(1, |c| c.remaining + 1);
        StrategyTree {
            state,
            remaining,
            step: Some(Step { partition, children }),
        }
    }

    /// Builds the full tree by asking `policy` for a partition at every
    /// internal node and reducing.
    pub fn from_policy<F>(c: State, n: usize, q: Alphabet, mut policy: F) -> Result<Self>
    where
        F: FnMut(&State, usize) -> Result<Partition>,
    {
        fn go<F>(c: State, n: usize, q: Alphabet, policy: &mut F) -> Result<StrategyTree>
        where
            F: FnMut(&State, usize) -> Result<Partition>,
        {
            if n == 0 {
                return Ok(StrategyTree::leaf(c));
            }
            let partition = policy(&c, n)?;
            let children = reduce(&c, &partition, q)?
                .into_states()
                .into_iter()
                .map(|x| go(x, n - 1, q, policy))
                .collect::<Result<Vec<_>>>()?;
            Ok(StrategyTree {
                state: c,
                remaining: n,
                step: Some(Step { partition, children }),
            })
        }
        go(c, n, q, &mut policy)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    /// Questions left at this node.
    pub fn remaining(&self) -> usize {
        self.remaining
    }

    pub fn is_leaf(&self) -> bool {
        self.step.is_none()
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.step.as_ref().map(|s| &s.partition)
    }

    pub fn children(&self) -> &[StrategyTree] {
        self.step.as_ref().map_or(&[], |s| &s.children)
    }

    pub fn child(&self, answer: usize) -> Option<&StrategyTree> {
        self.children().get(answer)
    }

    /// Mutable access for building scripted or deliberately broken trees.
    pub fn step_mut(&mut self) -> Option<(&mut Partition, &mut Vec<StrategyTree>)> {
        self.step.as_mut().map(|s| (&mut s.partition, &mut s.children))
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(StrategyTree::node_count).sum::<usize>()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DefectReason {
    /// A leaf with more than one candidate left.
    UndecidedLeaf,
    /// A leaf before the last question, or a step after it.
    DepthMismatch,
    WrongChildCount { expected: usize, found: usize },
    BadPartition(Error),
    /// Child `answer` is not the reduction of its parent.
    ChildMismatch { answer: usize },
}

/// Where a strategy breaks: answers from the root, and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyDefect {
    pub path: Vec<usize>,
    pub reason: DefectReason,
}

impl fmt::Display for StrategyDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at answers [")?;
        for (i, a) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, "]: ")?;
        match &self.reason {
            DefectReason::UndecidedLeaf => f.write_str("leaf holds more than one candidate"),
            DefectReason::DepthMismatch => f.write_str("leaf depth differs from the block length"),
            DefectReason::WrongChildCount { expected, found } => {
                write!(f, "expected {} children, found {}", expected, found)
            }
            DefectReason::BadPartition(e) => write!(f, "{}", e),
            DefectReason::ChildMismatch { answer } => {
                write!(f, "child {} is not the reduction of its parent", answer)
            }
        }
    }
}

/// Checks every node: valid partition, children equal to the reduction,
/// uniform depth, and at most one candidate at each leaf.
pub fn verify_strategy(t: &StrategyTree, q: Alphabet) -> Result<(), StrategyDefect> {
    let mut stack: Vec<(&StrategyTree, Vec<usize>)> = vec![(t, Vec::new())];
    while let Some((node, path)) = stack.pop() {
        let defect = |reason| StrategyDefect {
            path: path.clone(),
            reason,
        };
        let Some(step) = &node.step else {
            if node.remaining != 0 {
                return Err(defect(DefectReason::DepthMismatch));
            }
            if node.state.total() > BigUint::one() {
                return Err(defect(DefectReason::UndecidedLeaf));
            }
            continue;
        };
        if node.remaining == 0 {
            return Err(defect(DefectReason::DepthMismatch));
        }
        if step.children.len() != q.size() {
            return Err(defect(DefectReason::WrongChildCount {
                expected: q.size(),
                found: step.children.len(),
            }));
        }
        let expected = reduce(&node.state, &step.partition, q).map_err(|e| defect(DefectReason::BadPartition(e)))?;
        for (j, (child, x)) in step.children.iter().zip(expected.states()).enumerate() {
            if child.state != *x {
                return Err(defect(DefectReason::ChildMismatch { answer: j }));
            }
            if child.remaining + 1 != node.remaining {
                let mut p = path.clone();
                p.push(j);
                return Err(StrategyDefect {
                    path: p,
                    reason: DefectReason::DepthMismatch,
                });
            }
        }
        let found = ReductionOutcome::new(step.children.iter().map(|c| c.state.clone()).collect());
        if !found.is_ok_and(|xs| check_reduction(&node.state, &xs, q)) {
            return Err(defect(DefectReason::ChildMismatch { answer: 0 }));
        }
        for (j, child) in step.children.iter().enumerate().rev() {
            let mut p = path.clone();
            p.push(j);
            stack.push((child, p));
        }
    }
    Ok(())
}

/// Memoized solver for a fixed alphabet. Caches persist across queries.
pub struct Solver {
    q: Alphabet,
    config: SolverConfig,
    memo: HashMap<(Vec<u64>, usize), Option<BigUint>>,
    /// Upper levels with no winning bottom count, per `n`.
    losing: HashMap<usize, Vec<Vec<u64>>>,
    /// Tail sums of maximal winning states, per `n`.
    winning: HashMap<usize, Vec<Vec<BigUint>>>,
    stats: SolveStats,
}

enum Goal {
    Max {
        cap: Option<BigUint>,
        best: Option<BigUint>,
    },
    Reach {
        target: BigUint,
        found: Option<(Vec<Vec<u64>>, Vec<BigUint>)>,
    },
}

#[derive(PartialEq, Eq)]
enum Flow {
    Continue,
    Break,
}

/// Partial-volume check on children, in `u128` when `q^(n-1)` fits.
struct VolumeGate {
    weights: Vec<u128>,
    cap: u128,
    partial: Vec<Vec<u128>>,
}

struct Frame {
    upper: Vec<u64>,
    n: usize,
    parts: Vec<Vec<u64>>,
    ties: Vec<Vec<bool>>,
    gate: Option<VolumeGate>,
}

impl Solver {
    pub fn new(q: Alphabet) -> Self {
        Solver::with_config(q, SolverConfig::default())
    }

    pub fn with_config(q: Alphabet, config: SolverConfig) -> Self {
        Solver {
            q,
            config,
            memo: HashMap::new(),
            losing: HashMap::new(),
            winning: HashMap::new(),
            stats: SolveStats::default(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.q
    }

    pub fn config(&self) -> SolverConfig {
        self.config
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Whether `c` is a winning `n`-state.
    pub fn decide(&mut self, c: &State, n: usize) -> Result<bool> {
        if n == 0 {
            return Ok(c.total() <= BigUint::one());
        }
        if self.config.pruning {
            if c.total() <= BigUint::one() {
                return Ok(true);
            }
            if c.top_level().unwrap_or(0) == 0 {
                return Ok(*c.get(0) <= self.q.pow(n));
            }
            if !volume_bound_holds(c, n, self.q) {
                return Ok(false);
            }
        }
        let upper = upper_levels(c)?;
        if self.config.pruning && !self.memo.contains_key(&(upper.clone(), n)) && self.tail_cache_wins(c, n) {
            self.stats.cache_hits += 1;
            return Ok(true);
        }
        Ok(match self.max_bottom(&upper, n)? {
            Some(mb) => *c.get(0) <= mb,
            None => false,
        })
    }

    pub fn is_winning(&mut self, c: &State, n: usize) -> Result<SolveVerdict> {
        let winning = self.decide(c, n)?;
        let strategy = if winning { Some(self.extract_strategy(c, n)?) } else { None };
        Ok(SolveVerdict {
            winning,
            strategy,
            stats: self.stats,
        })
    }

    /// The first winning partition in enumeration order at every node.
    pub fn extract_strategy(&mut self, c: &State, n: usize) -> Result<StrategyTree> {
        if !self.decide(c, n)? {
            return Err(Error::NotWinning { remaining: n });
        }
        let mut built = HashMap::new();
        self.build(c, n, &mut built)
    }

    /// Largest `M` whose initial state wins, by binary search below the
    /// volume bound.
    pub fn max_messages(&mut self, e: usize, n: usize) -> Result<BigUint> {
        let w = ball_weights(n, e, self.q).pop().unwrap_or_default();
        let mut lo = BigUint::one();
        let mut hi = (self.q.pow(n) / w).max(BigUint::one());
        while lo < hi {
            let mid: BigUint = (&lo + &hi + 1u32) >> 1;
            if self.decide(&State::initial(mid.clone(), e)?, n)? {
                lo = mid;
            } else {
                hi = mid - 1u32;
            }
        }
        Ok(lo)
    }

    /// Shortest block length for `messages` candidates and `e` errors,
    /// searching upward from the converse bound.
    pub fn min_blocklength(&mut self, messages: &BigUint, e: usize) -> Result<usize> {
        let initial = State::initial(messages.clone(), e)?;
        let mut n = min_blocklength_converse(messages, e, self.q);
        while !self.decide(&initial, n)? {
            n += 1;
        }
        Ok(n)
    }

    fn tick(&mut self) -> Result<()> {
        self.stats.nodes += 1;
        if self.stats.nodes > self.config.node_limit {
            return Err(Error::NodeLimit {
                limit: self.config.node_limit,
            });
        }
        Ok(())
    }

    fn tail_cache_wins(&self, c: &State, n: usize) -> bool {
        let Some(entries) = self.winning.get(&n) else {
            return false;
        };
        let tails = tail_sums(c.counts());
        entries.iter().any(|d| {
            (0..tails.len().max(d.len())).all(|k| {
                let ck = tails.get(k).map_or(BigUint::zero(), Clone::clone);
                d.get(k).is_some_and(|dk| ck <= *dk) || ck.is_zero()
            })
        })
    }

    fn losing_cache_hit(&self, upper: &[u64], n: usize) -> bool {
        self.losing.get(&n).is_some_and(|entries| {
            entries
                .iter()
                .any(|d| d.len() <= upper.len() && d.iter().zip(upper).all(|(a, b)| a <= b))
        })
    }

    fn record(&mut self, upper: &[u64], n: usize, mb: &Option<BigUint>) {
        if !self.config.pruning {
            return;
        }
        match mb {
            None => {
                let list = self.losing.entry(n).or_default();
                if list.len() < DOMINATION_CACHE_CAP {
                    list.push(upper.to_vec());
                }
            }
            Some(c0) => {
                let list = self.winning.entry(n).or_default();
                if list.len() < DOMINATION_CACHE_CAP {
                    let mut counts: Vec<BigUint> = Vec::with_capacity(upper.len() + 1);
                    counts.push(c0.clone());
                    counts.extend(upper.iter().map(|&u| BigUint::from(u)));
                    list.push(tail_sums(&counts));
                }
            }
        }
    }

    /// `mb(upper, n)` for trimmed `upper = c_1..c_L`; `None` when even
    /// `c_0 = 0` loses.
    fn max_bottom(&mut self, upper: &[u64], n: usize) -> Result<Option<BigUint>> {
        if n == 0 {
            let s: u64 = upper.iter().sum();
            return Ok((s <= 1).then(|| BigUint::from(1 - s)));
        }
        if upper.is_empty() && self.config.pruning {
            return Ok(Some(self.q.pow(n)));
        }
        let key = (upper.to_vec(), n);
        if let Some(v) = self.memo.get(&key) {
            self.stats.cache_hits += 1;
            return Ok(v.clone());
        }
        if self.config.pruning && self.losing_cache_hit(upper, n) {
            self.stats.cache_hits += 1;
            self.memo.insert(key, None);
            return Ok(None);
        }
        self.tick()?;

        let cap = if self.config.pruning {
            let w = ball_weights(n, upper.len(), self.q);
            let used: BigUint = upper.iter().zip(&w[1..]).map(|(&u, wi)| wi * u).sum();
            let total = self.q.pow(n);
            if used > total {
                self.record(upper, n, &None);
                self.memo.insert(key, None);
                return Ok(None);
            }
            Some(total - used)
        } else {
            None
        };

        let mut goal = Goal::Max { cap, best: None };
        self.search(upper, n, &mut goal)?;
        let Goal::Max { best, .. } = goal else { unreachable!() };
        self.record(upper, n, &best);
        self.memo.insert(key, best.clone());
        Ok(best)
    }

    fn search(&mut self, upper: &[u64], n: usize, goal: &mut Goal) -> Result<()> {
        let q = self.q.size();
        let l = upper.len();
        let gate = if self.config.pruning { volume_gate(self.q, n - 1, l) } else { None };
        let mut frame = Frame {
            upper: upper.to_vec(),
            n,
            parts: vec![vec![0; l]; q],
            ties: vec![vec![true; q]; l + 1],
            gate,
        };
        if l == 0 {
            self.evaluate(&mut frame, goal)?;
        } else {
            self.fill(&mut frame, l - 1, 0, upper[l - 1], goal)?;
        }
        Ok(())
    }

    /// Chooses `p^j` at upper index `lv` (capacity `lv + 1`).
    fn fill(&mut self, f: &mut Frame, lv: usize, j: usize, rem: u64, goal: &mut Goal) -> Result<Flow> {
        let q = f.parts.len();
        let mut hi = rem;
        if j > 0 && f.ties[lv][j] {
            hi = hi.min(f.parts[j - 1][lv]);
        }
        let lo = if j + 1 == q {
            if rem > hi {
                return Ok(Flow::Continue);
            }
            rem
        } else {
            let chain = (j + 1..q).take_while(|&k| f.ties[lv][k]).count();
            if j + 1 + chain == q {
                rem.div_ceil(chain as u64 + 1)
            } else {
                0
            }
        };
        for v in lo..=hi {
            f.parts[j][lv] = v;
            if !self.gate_admits(f, lv, j) {
                continue;
            }
            let flow = if j + 1 < q {
                self.fill(f, lv, j + 1, rem - v, goal)?
            } else if lv == 0 {
                self.evaluate(f, goal)?
            } else {
                for k in 1..q {
                    f.ties[lv - 1][k] = f.ties[lv][k] && f.parts[k][lv] == f.parts[k - 1][lv];
                }
                let next = f.upper[lv - 1];
                self.fill(f, lv - 1, 0, next, goal)?
            };
            if flow == Flow::Break {
                return Ok(Flow::Break);
            }
        }
        Ok(Flow::Continue)
    }

    fn gate_admits(&self, f: &mut Frame, lv: usize, j: usize) -> bool {
        let Some(gate) = f.gate.as_mut() else {
            return true;
        };
        let l = f.upper.len();
        let v = f.parts[j][lv];
        let carried = if lv + 1 < l { f.upper[lv + 1] - f.parts[j][lv + 1] } else { 0 };
        let x = (v + carried) as u128;
        let known = gate.partial[lv + 1][j].saturating_add(gate.weights[lv + 1].saturating_mul(x));
        gate.partial[lv][j] = known;
        // Everyone at this level outside part j lands one level down.
        let below = gate.weights[lv].saturating_mul((f.upper[lv] - v) as u128);
        known.saturating_add(below) <= gate.cap
    }

    fn evaluate(&mut self, f: &mut Frame, goal: &mut Goal) -> Result<Flow> {
        self.tick()?;
        let q = f.parts.len();
        let l = f.upper.len();
        let c1 = f.upper.first().copied().unwrap_or(0);
        let mut slacks: Vec<BigUint> = Vec::with_capacity(q);
        for j in 0..q {
            if j > 0 && f.parts[j] == f.parts[j - 1] {
                let prev = slacks[j - 1].clone();
                slacks.push(prev);
                continue;
            }
            let part = &f.parts[j];
            let mut child: Vec<u64> = (0..l)
                .map(|i| part[i] + if i + 1 < l { f.upper[i + 1] - part[i + 1] } else { 0 })
                .collect();
            while child.last() == Some(&0) {
                child.pop();
            }
            let need = c1 - part.first().copied().unwrap_or(0);
            match self.max_bottom(&child, f.n - 1)? {
                Some(mb) if mb >= BigUint::from(need) => slacks.push(mb - need),
                _ => return Ok(Flow::Continue),
            }
        }
        let total: BigUint = slacks.iter().sum();
        match goal {
            Goal::Max { cap, best } => {
                if best.as_ref().is_none_or(|b| total > *b) {
                    let done = cap.as_ref().is_some_and(|c| total >= *c);
                    *best = Some(total);
                    if done {
                        return Ok(Flow::Break);
                    }
                }
                Ok(Flow::Continue)
            }
            Goal::Reach { target, found } => {
                if total >= *target {
                    *found = Some((f.parts.clone(), slacks));
                    return Ok(Flow::Break);
                }
                Ok(Flow::Continue)
            }
        }
    }

    fn build(&mut self, c: &State, n: usize, built: &mut HashMap<(State, usize), StrategyTree>) -> Result<StrategyTree> {
        if n == 0 {
            return Ok(StrategyTree::leaf(c.clone()));
        }
        if let Some(t) = built.get(&(c.clone(), n)) {
            return Ok(t.clone());
        }
        let upper = upper_levels(c)?;
        let mut goal = Goal::Reach {
            target: c.get(0).clone(),
            found: None,
        };
        self.search(&upper, n, &mut goal)?;
        let Goal::Reach { found: Some((parts, slacks)), .. } = goal else {
            return Err(Error::NotWinning { remaining: n });
        };
        let mut bottom = c.get(0).clone();
        let parts = parts
            .into_iter()
            .zip(slacks)
            .map(|(upper_part, slack)| {
                let take = (&bottom).min(&slack).clone();
                bottom -= &take;
                let mut counts = vec![BigUint::zero(); c.dimension()];
                counts[0] = take;
                for (i, v) in upper_part.into_iter().enumerate() {
                    counts[i + 1] = BigUint::from(v);
                }
                State::new(counts)
            })
            .collect::<Result<Vec<_>>>()?;
        let partition = Partition::new(parts)?;
        let children = reduce(c, &partition, self.q)?
            .into_states()
            .iter()
            .map(|x| self.build(x, n - 1, built))
            .collect::<Result<Vec<_>>>()?;
        let tree = StrategyTree {
            state: c.clone(),
            remaining: n,
            step: Some(Step { partition, children }),
        };
        built.insert((c.clone(), n), tree.clone());
        Ok(tree)
    }
}

fn volume_gate(q: Alphabet, n: usize, levels: usize) -> Option<VolumeGate> {
    let cap = q.pow(n).to_u128().filter(|&c| c < u128::MAX)?;
    let weights = ball_weights(n, levels, q)
        .iter()
        .map(|w| w.to_u128().unwrap_or(u128::MAX))
        .collect();
    Some(VolumeGate {
        weights,
        cap,
        partial: vec![vec![0; q.size()]; levels + 1],
    })
}

/// `c_1..c_e` with empty top levels removed.
fn upper_levels(c: &State) -> Result<Vec<u64>> {
    let top = c.top_level().unwrap_or(0);
    (1..=top)
        .map(|i| c.get(i).to_u64().ok_or(Error::CountTooLarge { level: i }))
        .collect()
}

fn tail_sums(counts: &[BigUint]) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); counts.len()];
    let mut acc = BigUint::zero();
    for (i, c) in counts.iter().enumerate().rev() {
        acc += c;
        out[i] = acc.clone();
    }
    out
}

pub fn is_winning(c: &State, n: usize, q: Alphabet) -> Result<SolveVerdict> {
    Solver::new(q).is_winning(c, n)
}

pub fn extract_strategy(c: &State, n: usize, q: Alphabet) -> Result<StrategyTree> {
    Solver::new(q).extract_strategy(c, n)
}

pub fn max_messages(e: usize, n: usize, q: Alphabet) -> Result<BigUint> {
    Solver::new(q).max_messages(e, n)
}
