//! The achievability table `A` and its explicit partitions.
//!
//! Rows are indexed by `m >= 1`, columns by `k >= 1`, both 1-based, with
//! `A_{0,k} = 0`:
//!
//! ```text
//! A_{1,1} = q,                 A_{1,k} = 1                      (k >= 2)
//! A_{2,1} = q(q-1)(q-2),       A_{m,1} = (q-1)^2 A_{m-1,1}      (m >= 3)
//! A_{2,2} = (q-1)^2,           A_{3,2} = q(q-1)^2 (q-2),
//!                              A_{m,2} = (q-1)^2 A_{m-1,2}      (m >= 4)
//! A_{m,k} = A_{m,k-1} + (q-1) A_{m-1,k-1} - (q-1) A_{m-1,k-2}   (m >= 2, k >= 3)
//! ```
//!
//! The column prefix `Ā_{m,k} = (A_{1,k}, .., A_{m,k})`, read as a state with
//! `A_{1,k}` at the top capacity, is a winning `(2m-k)`-state.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::bounds::volume;
use crate::solver::Solver;
use crate::state::{check_reduction, dominates_componentwise, reduce, Alphabet, Partition, ReductionOutcome, State};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableA {
    q: Alphabet,
    /// `rows[m - 1][k - 1] = A_{m,k}`.
    rows: Vec<Vec<BigUint>>,
}

impl TableA {
    pub fn build(q: Alphabet, m_max: usize, k_max: usize) -> Result<Self> {
        require_table_alphabet(q)?;
        if m_max == 0 || k_max < 2 {
            return Err(Error::Domain("the table needs m_max >= 1 and k_max >= 2"));
        }
        let qb = BigUint::from(q.get());
        let q1 = BigUint::from(q.get() - 1);
        let q2 = BigUint::from(q.get() - 2);
        let sq = &q1 * &q1;
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(m_max);
        for m in 1..=m_max {
            let mut row: Vec<BigUint> = Vec::with_capacity(k_max);
            for k in 1..=k_max {
                let v = match (m, k) {
                    (1, 1) => qb.clone(),
                    (1, _) => BigUint::one(),
                    (2, 1) => &qb * &q1 * &q2,
                    (_, 1) => &sq * &rows[m - 2][0],
                    (2, 2) => sq.clone(),
                    (3, 2) => &qb * &sq * &q2,
                    (_, 2) => &sq * &rows[m - 2][1],
                    _ => {
                        let prev = &rows[m - 2];
                        let v = BigInt::from(row[k - 2].clone()) + BigInt::from(&q1 * &prev[k - 2])
                            - BigInt::from(&q1 * &prev[k - 3]);
                        match v.into_parts() {
                            (Sign::Minus, _) => return Err(Error::NegativeEntry { m, k }),
                            (_, mag) => mag,
                        }
                    }
                };
                row.push(v);
            }
            rows.push(row);
        }
        Ok(TableA { q, rows })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.q
    }

    pub fn m_max(&self) -> usize {
        self.rows.len()
    }

    pub fn k_max(&self) -> usize {
        self.rows[0].len()
    }

    /// `A_{m,k}`; row 0 is identically zero.
    pub fn get(&self, m: usize, k: usize) -> Result<BigUint> {
        if m > self.m_max() || k == 0 || k > self.k_max() {
            return Err(Error::IndexOutOfRange { m, k });
        }
        Ok(if m == 0 { BigUint::zero() } else { self.rows[m - 1][k - 1].clone() })
    }

    /// The same table grown to at least the given size.
    pub fn extended(&self, m_max: usize, k_max: usize) -> Result<Self> {
        if m_max <= self.m_max() && k_max <= self.k_max() {
            return Ok(self.clone());
        }
        TableA::build(self.q, m_max.max(self.m_max()), k_max.max(self.k_max()))
    }

    /// `Ā_{m,k}` as a state of budget `m - 1`: `counts[m - i] = A_{i,k}`.
    pub fn column_state(&self, m: usize, k: usize) -> Result<State> {
        if m == 0 || m > self.m_max() || k == 0 || k > self.k_max() {
            return Err(Error::IndexOutOfRange { m, k });
        }
        State::new((1..=m).rev().map(|i| self.rows[i - 1][k - 1].clone()).collect())
    }

    /// The partition taking `Ā_{m,k}` to its [`children`](Self::children).
    pub fn partition(&self, m: usize, k: usize) -> Result<Partition> {
        let c = self.column_state(m, k)?;
        let qn = self.q.size();
        let qb = BigUint::from(self.q.get());
        let q1 = BigUint::from(self.q.get() - 1);
        let exact = |v: &BigUint, d: &BigUint| -> Result<BigUint> {
            let (quot, rem) = v.div_rem(d);
            if rem.is_zero() {
                Ok(quot)
            } else {
                Err(Error::NonExactDivision { m, k })
            }
        };
        let mut parts = vec![vec![BigUint::zero(); m]; qn];
        if k == 1 {
            for (idx, v) in c.counts().iter().enumerate() {
                let share = exact(v, &qb)?;
                for part in parts.iter_mut() {
                    part[idx] = share.clone();
                }
            }
        } else {
            for i in 1..=m {
                let idx = m - i;
                let a = &self.rows[i - 1][k - 1];
                if i == 1 {
                    parts[0][idx] = a.clone();
                } else if i <= k {
                    let share = exact(a, &q1)?;
                    for part in parts.iter_mut().skip(1) {
                        part[idx] = share.clone();
                    }
                } else {
                    let share = exact(a, &qb)?;
                    for part in parts.iter_mut() {
                        part[idx] = share.clone();
                    }
                }
            }
        }
        Partition::new(parts.into_iter().map(State::new).collect::<Result<_>>()?)
    }

    /// Table positions reached from `(m, k)`, by answer: `q` copies of
    /// `(m, 2)` for `k = 1`; otherwise `(m, k + 1)` then `q - 1` copies of
    /// `(m - 1, k - 1)`.
    pub fn child_positions(&self, m: usize, k: usize) -> Vec<(usize, usize)> {
        let qn = self.q.size();
        if k == 1 {
            vec![(m, 2); qn]
        } else {
            let mut out = vec![(m - 1, k - 1); qn];
            out[0] = (m, k + 1);
            out
        }
    }

    /// Child states at budget `m - 1`; row `m - 1` children gain a zero on top.
    pub fn children(&self, m: usize, k: usize) -> Result<ReductionOutcome> {
        let states = self
            .child_positions(m, k)
            .into_iter()
            .map(|(mm, kk)| self.embedded_state(mm, kk, m))
            .collect::<Result<Vec<_>>>()?;
        ReductionOutcome::new(states)
    }

    /// `Ā_{m,k}` embedded at dimension `dim`, with `Ā_{0,k}` the zero state.
    pub fn embedded_state(&self, m: usize, k: usize, dim: usize) -> Result<State> {
        if m == 0 {
            return Ok(State::zero(dim - 1));
        }
        Ok(self.column_state(m, k)?.embed(dim - m))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m/k");
        for k in 1..=self.k_max() {
            out.push_str(&format!(",{}", k));
        }
        out.push('\n');
        for (m, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{}", m + 1));
            for v in row {
                out.push_str(&format!(",{}", v));
            }
            out.push('\n');
        }
        out
    }
}

fn require_table_alphabet(q: Alphabet) -> Result<()> {
    if q.get() < 3 {
        return Err(Error::UnsupportedAlphabet {
            q: q.get(),
            reason: "the first column vanishes for q = 2; only M <= 2 is reachable that way",
        });
    }
    Ok(())
}

pub fn build_table(q: Alphabet, m_max: usize, k_max: usize) -> Result<TableA> {
    TableA::build(q, m_max, k_max)
}

pub fn column_state(t: &TableA, m: usize, k: usize) -> Result<State> {
    t.column_state(m, k)
}

pub fn table_partition(t: &TableA, m: usize, k: usize) -> Result<Partition> {
    t.partition(m, k)
}

/// Outcome of one family of table checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckResult {
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckResult {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TableReport {
    pub divisibility: CheckResult,
    pub diagonals: CheckResult,
    pub zeros: CheckResult,
    pub saturation: CheckResult,
    pub reductions: CheckResult,
    pub winning: CheckResult,
}

impl TableReport {
    pub fn sections(&self) -> [(&'static str, &CheckResult); 6] {
        [
            ("divisibility", &self.divisibility),
            ("diagonals", &self.diagonals),
            ("zeros", &self.zeros),
            ("saturation", &self.saturation),
            ("reductions", &self.reductions),
            ("winning", &self.winning),
        ]
    }

    pub fn passed(&self) -> bool {
        self.sections().iter().all(|(_, c)| c.passed())
    }
}

/// Largest `2m - k` at which the composed winning claim is also confirmed
/// by the solver.
pub const SOLVER_CROSS_CHECK_DEPTH: usize = 4;

/// Checks divisibility, the diagonal and geometric laws, the zero block,
/// first-column saturation, every table reduction, and that each `Ā_{m,k}`
/// with `k <= 2m` wins with `2m - k` questions.
pub fn verify_table(t: &TableA) -> Result<TableReport> {
    let q = t.alphabet();
    let (m_max, k_max) = (t.m_max(), t.k_max());
    // Reductions at column k refer to column k + 1, and winning needs k = 2m.
    let wide = t.extended(m_max, (k_max + 1).max(2 * m_max))?;
    let a = |m: usize, k: usize| wide.rows[m - 1][k - 1].clone();
    let qb = BigUint::from(q.get());
    let q1 = BigUint::from(q.get() - 1);
    let q2 = BigUint::from(q.get() - 2);
    let q1_pow = |e: usize| num_traits::pow(q1.clone(), e);
    let mut r = TableReport::default();

    for m in 1..=m_max {
        for k in 1..=k_max {
            let v = a(m, k);
            if k == 1 {
                r.divisibility
                    .check(v.is_multiple_of(&qb), || format!("q does not divide A({m},1)"));
            }
            if k >= 2 && m >= 2 {
                r.divisibility
                    .check(v.is_multiple_of(&q1), || format!("q-1 does not divide A({m},{k})"));
            }
            if k >= 2 && m > k {
                r.divisibility
                    .check(v.is_multiple_of(&qb), || format!("q does not divide A({m},{k})"));
            }
            if m == k && k >= 2 {
                r.diagonals
                    .check(v == q1_pow(k), || format!("A({k},{k}) != (q-1)^{k}"));
            }
            if m == k + 1 {
                r.diagonals.check(v == &qb * q1_pow(k) * &q2, || {
                    format!("A({m},{k}) != q(q-1)^{k}(q-2)")
                });
            }
            if m > k + 1 {
                r.diagonals.check(v == &q1 * &q1 * a(m - 1, k), || {
                    format!("A({m},{k}) != (q-1)^2 A({},{k})", m - 1)
                });
            }
            if k >= 3 && (2..k).contains(&m) {
                r.zeros.check(v.is_zero(), || format!("A({m},{k}) should vanish"));
            }
        }
        let n = 2 * m - 1;
        let c = wide.column_state(m, 1)?;
        r.saturation
            .check(volume(&c, n, q) == q.pow(n), || format!("V_{n}(Ā({m},1)) != q^{n}"));
    }

    for m in 1..=m_max {
        for k in 1..=k_max {
            let ok = (|| -> Result<bool> {
                let c = wide.column_state(m, k)?;
                let p = wide.partition(m, k)?;
                let xs = wide.children(m, k)?;
                Ok(reduce(&c, &p, q)? == xs && check_reduction(&c, &xs, q))
            })();
            r.reductions.check(ok == Ok(true), || match ok {
                Err(e) => format!("({m},{k}): {e}"),
                _ => format!("({m},{k}): partition does not produce the table children"),
            });
        }
    }

    // Compose the reductions: (m, k) wins at 2m - k iff its children win.
    let mut wins: HashMap<(usize, usize), bool> = HashMap::new();
    for n in 0..=2 * m_max {
        for m in 1..=m_max {
            if 2 * m < n {
                continue;
            }
            let k = 2 * m - n;
            if k == 0 {
                continue;
            }
            let ok = if n == 0 {
                wide.column_state(m, k)?.total() <= BigUint::one()
            } else {
                let reduces = (|| -> Result<bool> {
                    let c = wide.column_state(m, k)?;
                    Ok(reduce(&c, &wide.partition(m, k)?, q)? == wide.children(m, k)?)
                })()
                .unwrap_or(false);
                reduces
                    && wide
                        .child_positions(m, k)
                        .iter()
                        .all(|&(mm, kk)| mm == 0 || wins.get(&(mm, kk)).copied().unwrap_or(false))
            };
            wins.insert((m, k), ok);
        }
    }
    let mut solver = Solver::new(q);
    for m in 1..=m_max {
        for k in 1..=k_max.min(2 * m) {
            let n = 2 * m - k;
            let composed = wins.get(&(m, k)).copied().unwrap_or(false);
            r.winning
                .check(composed, || format!("Ā({m},{k}) is not winning with {n} questions"));
            if n <= SOLVER_CROSS_CHECK_DEPTH {
                let solved = solver.decide(&wide.column_state(m, k)?, n)?;
                r.winning
                    .check(solved == composed, || format!("solver disagrees on Ā({m},{k}) at {n}"));
            }
        }
    }
    Ok(r)
}

/// `A_{i,1}` in closed form: `q` for `i = 1`, else `q(q-1)^(2i-3)(q-2)`.
pub fn first_column(i: usize, q: Alphabet) -> BigUint {
    let qb = BigUint::from(q.get());
    if i <= 1 {
        return qb;
    }
    qb * num_traits::pow(BigUint::from(q.get() - 1), 2 * i - 3) * BigUint::from(q.get() - 2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Achievable {
    /// Block length `2(e + i) - 1`.
    pub n: usize,
    /// Smallest `i` with `M <= A_{i,1}`.
    pub i: usize,
}

/// Block length reached by embedding the initial state into `Ā_{e+i,1}`.
pub fn achievable_blocklength(messages: &BigUint, e: usize, q: Alphabet) -> Result<Achievable> {
    require_table_alphabet(q)?;
    if messages.is_zero() {
        return Err(Error::NoMessages);
    }
    let mut i = 1;
    while *messages > first_column(i, q) {
        i += 1;
    }
    Ok(Achievable { n: 2 * (e + i) - 1, i })
}

/// Whether `embed(I, i - 1)` sits componentwise below `Ā_{e+i,1}`, the
/// condition the table-built code relies on.
pub fn initial_fits_column(messages: &BigUint, e: usize, i: usize, t: &TableA) -> Result<bool> {
    let c = State::initial(messages.clone(), e)?.embed(i - 1);
    dominates_componentwise(&c, &t.column_state(e + i, 1)?)
}
