//! States, partitions and the reduction rule.
//!
//! A [`State`] of budget `e` stores `e + 1` counts; `counts[i]` is the number
//! of candidates that can still absorb `i` more errors. The implicit count at
//! index `e + 1` is always zero and never stored.
//!
//! Asking a question splits each count into `q` parts ([`Partition`]). If the
//! answer names part `j`, candidates outside part `j` take one more negative
//! vote and drop one capacity level:
//!
//! ```text
//! x^j_e = p^j_e
//! x^j_i = p^j_i + sum_{j' != j} p^{j'}_{i+1}      (0 <= i < e)
//! ```

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Alphabet size `q >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet(u32);

impl Alphabet {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidAlphabet { q });
        }
        Ok(Alphabet(q))
    }

    #[inline]
    pub const fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub const fn size(self) -> usize {
        self.0 as usize
    }

    /// `q^n` as an exact integer.
    pub fn pow(self, n: usize) -> BigUint {
        num_traits::pow(BigUint::from(self.0), n)
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    counts: Vec<BigUint>,
}

impl State {
    pub fn new(counts: Vec<BigUint>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyState);
        }
        Ok(State { counts })
    }

    pub fn from_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<BigUint>,
    {
        State::new(counts.into_iter().map(Into::into).collect())
    }

    pub fn zero(budget: usize) -> Self {
        State {
            counts: vec![BigUint::zero(); budget + 1],
        }
    }

    /// All `messages` candidates with full capacity `budget`.
    pub fn initial(messages: BigUint, budget: usize) -> Result<Self> {
        if messages.is_zero() {
            return Err(Error::NoMessages);
        }
        let mut s = State::zero(budget);
        s.counts[budget] = messages;
        Ok(s)
    }

    #[inline]
    pub fn budget(&self) -> usize {
        self.counts.len() - 1
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<BigUint> {
        self.counts
    }

    /// Count at capacity `i`; zero above the budget.
    pub fn get(&self, i: usize) -> &BigUint {
        static ZERO: BigUint = BigUint::ZERO;
        self.counts.get(i).unwrap_or(&ZERO)
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(Zero::is_zero)
    }

    pub fn is_singlet(&self) -> bool {
        self.total().is_one()
    }

    /// Highest capacity index holding a candidate, or `None` for the zero state.
    pub fn top_level(&self) -> Option<usize> {
        self.counts.iter().rposition(|c| !c.is_zero())
    }

    /// Drops the bottom count: `(Tc)_i = c_{i+1}`.
    pub fn translate(&self) -> Result<State> {
        if self.budget() == 0 {
            return Err(Error::ZeroBudget);
        }
        Ok(State {
            counts: self.counts[1..].to_vec(),
        })
    }

    /// Same game under a budget larger by `extra`: zeros on top.
    pub fn embed(&self, extra: usize) -> State {
        let mut counts = self.counts.clone();
        counts.resize(self.counts.len() + extra, BigUint::zero());
        State { counts }
    }

    /// Removes empty top levels, keeping at least one entry.
    pub fn trimmed(&self) -> State {
        let len = self.top_level().map_or(1, |t| t + 1);
        State {
            counts: self.counts[..len].to_vec(),
        }
    }

    fn check_same_dimension(&self, other: &State) -> Result<()> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State[{}]", self)
    }
}

/// Bottom-up comma list `c0,c1,...,ce`.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", c)?;
        }
        Ok(())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<BigUint>()
                    .map_err(|_| Error::Parse(alloc::format!("bad count {:?} in state {:?}", tok, s)))
            })
            .collect::<Result<Vec<_>>>()?;
        State::new(counts)
    }
}

pub fn initial_state(messages: BigUint, budget: usize) -> Result<State> {
    State::initial(messages, budget)
}

pub fn translate(c: &State) -> Result<State> {
    c.translate()
}

pub fn embed(c: &State, extra: usize) -> State {
    c.embed(extra)
}

/// `c_i <= d_i` for every `i`.
pub fn dominates_componentwise(c: &State, d: &State) -> Result<bool> {
    c.check_same_dimension(d)?;
    Ok(c.counts.iter().zip(&d.counts).all(|(a, b)| a <= b))
}

/// `sum_{i>=k} c_i <= sum_{i>=k} d_i` for every `k`.
pub fn dominates_tailsum(c: &State, d: &State) -> Result<bool> {
    c.check_same_dimension(d)?;
    let mut tc = BigUint::zero();
    let mut td = BigUint::zero();
    for (a, b) in c.counts.iter().zip(&d.counts).rev() {
        tc += a;
        td += b;
        if tc > td {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `q` non-negative vectors of equal dimension.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<State>,
}

impl Partition {
    pub fn new(parts: Vec<State>) -> Result<Self> {
        let first = parts.first().ok_or(Error::PartCount {
            expected: 1,
            found: 0,
        })?;
        for p in &parts[1..] {
            first.check_same_dimension(p)?;
        }
        Ok(Partition { parts })
    }

    /// Everything in part 0, the other `q - 1` parts empty.
    pub fn trivial(c: &State, q: Alphabet) -> Partition {
        let mut parts = vec![State::zero(c.budget()); q.size()];
        parts[0] = c.clone();
        Partition { parts }
    }

    #[inline]
    pub fn parts(&self) -> &[State] {
        &self.parts
    }

    #[inline]
    pub fn part(&self, j: usize) -> &State {
        &self.parts[j]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    #[inline]
    pub fn budget(&self) -> usize {
        self.parts[0].budget()
    }

    /// Column sums, i.e. the state this partition splits.
    pub fn source(&self) -> State {
        let mut counts = vec![BigUint::zero(); self.parts[0].dimension()];
        for p in &self.parts {
            for (acc, v) in counts.iter_mut().zip(&p.counts) {
                *acc += v;
            }
        }
        State { counts }
    }

    pub fn validate(&self, c: &State, q: Alphabet) -> Result<()> {
        if self.parts.len() != q.size() {
            return Err(Error::PartCount {
                expected: q.size(),
                found: self.parts.len(),
            });
        }
        c.check_same_dimension(&self.parts[0])?;
        let sum = self.source();
        if let Some(level) = (0..c.dimension()).find(|&i| sum.counts[i] != c.counts[i]) {
            return Err(Error::PartitionSum { level });
        }
        Ok(())
    }

    pub fn embed(&self, extra: usize) -> Partition {
        Partition {
            parts: self.parts.iter().map(|p| p.embed(extra)).collect(),
        }
    }

    /// Drops the bottom row of every part.
    pub fn translate(&self) -> Result<Partition> {
        Ok(Partition {
            parts: self.parts.iter().map(State::translate).collect::<Result<_>>()?,
        })
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition[{}]", self)
    }
}

/// Part literals joined by `|`, e.g. `0,3|0,3|0,3`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, p) in self.parts.iter().enumerate() {
            if j > 0 {
                f.write_str("|")?;
            }
            write!(f, "{}", p)?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Partition::new(s.split('|').map(str::parse).collect::<Result<_>>()?)
    }
}

/// The `q` states reachable from one question, indexed by answer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReductionOutcome {
    states: Vec<State>,
}

impl ReductionOutcome {
    pub fn new(states: Vec<State>) -> Result<Self> {
        let first = states.first().ok_or(Error::PartCount {
            expected: 1,
            found: 0,
        })?;
        for s in &states[1..] {
            first.check_same_dimension(s)?;
        }
        Ok(ReductionOutcome { states })
    }

    #[inline]
    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn into_states(self) -> Vec<State> {
        self.states
    }

    pub fn translate(&self) -> Result<ReductionOutcome> {
        Ok(ReductionOutcome {
            states: self.states.iter().map(State::translate).collect::<Result<_>>()?,
        })
    }
}

pub fn reduce(c: &State, p: &Partition, q: Alphabet) -> Result<ReductionOutcome> {
    p.validate(c, q)?;
    let e = c.budget();
    let states = p
        .parts
        .iter()
        .map(|pj| {
            let counts = (0..=e)
                .map(|i| {
                    let mut x = pj.counts[i].clone();
                    if i < e {
                        // Everyone at level i+1 outside part j moves down.
                        x += &c.counts[i + 1];
                        x -= &pj.counts[i + 1];
                    }
                    x
                })
                .collect();
            State { counts }
        })
        .collect();
    Ok(ReductionOutcome { states })
}

/// Recovers the unique partition producing `xs`, by back-substitution from
/// the top level down. Fails when some entry would be negative.
pub fn invert_reduction(xs: &ReductionOutcome, q: Alphabet) -> Result<Partition> {
    if xs.states.len() != q.size() {
        return Err(Error::PartCount {
            expected: q.size(),
            found: xs.states.len(),
        });
    }
    let dim = xs.states[0].dimension();
    let e = dim - 1;
    let mut parts: Vec<Vec<BigUint>> = vec![vec![BigUint::zero(); dim]; q.size()];
    for i in (0..=e).rev() {
        let above: BigUint = if i < e {
            parts.iter().map(|p| &p[i + 1]).sum()
        } else {
            BigUint::zero()
        };
        for (j, x) in xs.states.iter().enumerate() {
            let mut v = BigInt::from(x.counts[i].clone());
            if i < e {
                v -= BigInt::from(&above - &parts[j][i + 1]);
            }
            match v.into_parts() {
                (Sign::Minus, _) => {
                    return Err(Error::NonIntegralOrNegativePartition { part: j, level: i })
                }
                (_, mag) => parts[j][i] = mag,
            }
        }
    }
    Ok(Partition {
        parts: parts.into_iter().map(|counts| State { counts }).collect(),
    })
}

/// `c` reduces to `xs` under some partition iff the outcome sums to
/// `c + (q-1) Tc` and back-substitution stays non-negative.
pub fn check_reduction(c: &State, xs: &ReductionOutcome, q: Alphabet) -> bool {
    if xs.states.len() != q.size() || xs.states.iter().any(|x| x.dimension() != c.dimension()) {
        return false;
    }
    let e = c.budget();
    let qm1 = BigUint::from(q.get() - 1);
    let sum_ok = (0..=e).all(|i| {
        let lhs: BigUint = xs.states.iter().map(|x| &x.counts[i]).sum();
        lhs == &c.counts[i] + &qm1 * c.get(i + 1)
    });
    sum_ok && invert_reduction(xs, q).is_ok()
}
