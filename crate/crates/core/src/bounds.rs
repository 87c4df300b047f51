//! Converse bounds and rate-region curves.
//!
//! The volume of an `n`-state weighs every candidate by the number of error
//! patterns it can still absorb:
//!
//! ```text
//! V_n(c) = sum_i c_i * sum_{l <= i} C(n, l) (q-1)^l
//! ```
//!
//! Volume is conserved by every reduction, so a winning `n`-state has
//! `V_n(c) <= q^n`. Finite bounds are exact big-integer computations; the
//! asymptotic curves are `f64` with a `1e-9` comparison tolerance in tests.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::state::{reduce, Alphabet, Partition, State};
use crate::{Error, Result};

/// Row `n` of Pascal's triangle truncated to `C(n, 0..=width)`.
pub fn pascal_row(n: usize, width: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::zero(); width + 1];
    row[0] = BigUint::one();
    for r in 1..=n {
        for k in (1..=width.min(r)).rev() {
            let prev = row[k - 1].clone();
            row[k] += prev;
        }
    }
    row
}

/// `C(n, k)`, zero for `k < 0` or `k > n`.
pub fn binomial(n: usize, k: i64) -> BigUint {
    if k < 0 || k as u64 > n as u64 {
        return BigUint::zero();
    }
    let k = k as usize;
    pascal_row(n, k).pop().unwrap_or_default()
}

/// `w_i = sum_{l <= i} C(n, l)(q-1)^l` for `i = 0..=e`: the volume of one
/// candidate with capacity `i`.
pub fn ball_weights(n: usize, e: usize, q: Alphabet) -> Vec<BigUint> {
    let row = pascal_row(n, e);
    let qm1 = BigUint::from(q.get() - 1);
    let mut power = BigUint::one();
    let mut acc = BigUint::zero();
    row.into_iter()
        .map(|c| {
            acc += c * &power;
            power *= &qm1;
            acc.clone()
        })
        .collect()
}

pub fn volume(c: &State, n: usize, q: Alphabet) -> BigUint {
    ball_weights(n, c.budget(), q)
        .iter()
        .zip(c.counts())
        .map(|(w, ci)| w * ci)
        .sum()
}

/// Necessary (not sufficient) for `c` to be winning with `n` questions.
pub fn volume_bound_holds(c: &State, n: usize, q: Alphabet) -> bool {
    volume(c, n, q) <= q.pow(n)
}

/// `V_n(c) == sum_j V_{n-1}(x^j)` for the reduction of `c` under `p`.
pub fn conservation_check(c: &State, p: &Partition, n: usize, q: Alphabet) -> Result<bool> {
    if n == 0 {
        return Err(Error::Domain("conservation needs at least one question"));
    }
    let out = reduce(c, p, q)?;
    let after: BigUint = out.states().iter().map(|x| volume(x, n - 1, q)).sum();
    Ok(after == volume(c, n, q))
}

/// Volume of `T^m I` at `n - 2m`: `M` candidates with capacity `e - m`.
fn translated_initial_volume(messages: &BigUint, e: usize, m: usize, n: usize, q: Alphabet) -> BigUint {
    let w = ball_weights(n - 2 * m, e - m, q);
    messages * &w[e - m]
}

/// Checks `V_{n-2m}(T^m I) <= q^{n-2m}` for every `0 <= m <= e`, where `I`
/// is the initial state of `messages` candidates with budget `e`.
///
/// A single message needs no questions at all, so `messages == 1` always
/// passes. Otherwise `n < 2e` fails: after enough translations at least two
/// candidates with positive capacity face at most one question.
pub fn translated_volume_bounds(messages: &BigUint, e: usize, q: Alphabet, n: usize) -> bool {
    if messages.is_one() {
        return true;
    }
    if n < 2 * e {
        return false;
    }
    (0..=e).all(|m| translated_initial_volume(messages, e, m, n, q) <= q.pow(n - 2 * m))
}

/// The dominant-term form `M * C(n-2m, e-m) <= q^{n-2m}` for all `m`. Weaker
/// than [`translated_volume_bounds`]; kept for asymptotic comparisons.
pub fn dominant_term_bounds(messages: &BigUint, e: usize, q: Alphabet, n: usize) -> bool {
    if messages.is_one() {
        return true;
    }
    if n < 2 * e {
        return false;
    }
    (0..=e).all(|m| messages * binomial(n - 2 * m, (e - m) as i64) <= q.pow(n - 2 * m))
}

/// The translation depth `m` whose bound is tightest at this `n`, i.e. the
/// one maximising `V_{n-2m}(T^m I) / q^{n-2m}`. `None` when `n < 2e`.
pub fn tightest_translation(messages: &BigUint, e: usize, q: Alphabet, n: usize) -> Option<usize> {
    if n < 2 * e {
        return None;
    }
    let ratio = |m: usize| (translated_initial_volume(messages, e, m, n, q), q.pow(n - 2 * m));
    let mut best = 0;
    let (mut bv, mut bd) = ratio(0);
    for m in 1..=e {
        let (v, d) = ratio(m);
        // v/d > bv/bd, compared exactly.
        if &v * &bd > &bv * &d {
            best = m;
            bv = v;
            bd = d;
        }
    }
    Some(best)
}

/// Smallest `n` passing [`translated_volume_bounds`]: no feedback code for
/// `messages` candidates and `e` errors is shorter.
pub fn min_blocklength_converse(messages: &BigUint, e: usize, q: Alphabet) -> usize {
    let mut n = if messages.is_one() { 0 } else { 2 * e };
    while !translated_volume_bounds(messages, e, q, n) {
        n += 1;
    }
    n
}

fn log_q(x: f64, q: Alphabet) -> f64 {
    libm::log(x) / libm::log(q.get() as f64)
}

/// q-ary entropy `x log_q(q-1) - x log_q x - (1-x) log_q(1-x)`.
pub fn hq(x: f64, q: Alphabet) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain("entropy argument must lie in [0, 1]"));
    }
    let mut h = x * log_q((q.get() - 1) as f64, q);
    if x > 0.0 {
        h -= x * log_q(x, q);
    }
    if x < 1.0 {
        h -= (1.0 - x) * log_q(1.0 - x, q);
    }
    Ok(h)
}

/// Asymptotic volume bound `R <= 1 - H_q(f)`.
pub fn curve_volume(f: f64, q: Alphabet) -> Result<f64> {
    Ok(1.0 - hq(f, q)?)
}

/// Rate achieved by the table construction, `(1 - 2f) log_q(q-1)`.
pub fn curve_construction(f: f64, q: Alphabet) -> Result<f64> {
    if !(0.0..=0.5).contains(&f) {
        return Err(Error::Domain("error fraction must lie in [0, 1/2]"));
    }
    Ok((1.0 - 2.0 * f) * log_q((q.get() - 1) as f64, q))
}

/// Left end `2 / (q^2 + q sqrt(q^2 - 4))` of the translation-bound region.
pub fn translation_region_start(q: Alphabet) -> Result<f64> {
    let qf = translation_alphabet(q)?;
    Ok(2.0 / (qf * qf + qf * libm::sqrt(qf * qf - 4.0)))
}

fn translation_alphabet(q: Alphabet) -> Result<f64> {
    if q.get() == 2 {
        return Err(Error::UnsupportedAlphabet {
            q: 2,
            reason: "binary translation follows an (n-3) law; the q >= 3 curve degenerates",
        });
    }
    Ok(q.get() as f64)
}

fn translation_domain(f: f64, q: Alphabet) -> Result<Option<f64>> {
    let start = translation_region_start(q)?;
    if !(0.0..=0.5).contains(&f) {
        return Err(Error::Domain("error fraction must lie in [0, 1/2]"));
    }
    Ok((f >= start).then_some(start))
}

/// Translated volume bound with the translation depth optimised:
///
/// ```text
/// R <= min_{0 <= mu <= f} (1 - 2mu) (1 - H_q((f - mu) / (1 - 2mu)))
/// ```
///
/// where `mu = m / n`. The objective is a perspective of the convex function
/// `1 - H_q`, hence convex in `mu`, and is minimised by golden-section search.
/// Reported on `[2 / (q^2 + q sqrt(q^2 - 4)), 1/2]`; `None` outside it.
pub fn curve_translation(f: f64, q: Alphabet) -> Result<Option<f64>> {
    if translation_domain(f, q)?.is_none() {
        return Ok(None);
    }
    let objective = |mu: f64| -> f64 {
        let t = 1.0 - 2.0 * mu;
        if t <= 0.0 {
            return 0.0;
        }
        let p = ((f - mu) / t).clamp(0.0, 1.0);
        t * (1.0 - hq(p, q).unwrap_or(1.0))
    };
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, f);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (objective(a), objective(b));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = objective(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = objective(b);
        }
    }
    let interior = objective(0.5 * (lo + hi));
    Ok(Some(interior.min(objective(0.0)).min(objective(f))))
}

/// The closed-form line obtained by fixing the translation depth at
/// `y = b x`, `b = 2 / (a + sqrt(a^2 + 4a))`, `a = q^2 - 4`:
///
/// ```text
/// R <= (q^2 + q s) / (q^2 - 4 + q s) * (1 - 2f) * (1 - H_q(2 / (q^2 + q s))),  s = sqrt(q^2 - 4)
/// ```
///
/// It meets the volume curve at the region start but is not below it on
/// the whole region; [`curve_translation`] is the bound proper.
pub fn curve_translation_display(f: f64, q: Alphabet) -> Result<Option<f64>> {
    let Some(start) = translation_domain(f, q)? else {
        return Ok(None);
    };
    let qf = q.get() as f64;
    let s = libm::sqrt(qf * qf - 4.0);
    let scale = (qf * qf + qf * s) / (qf * qf - 4.0 + qf * s);
    Ok(Some(scale * (1.0 - 2.0 * f) * (1.0 - hq(start, q)?)))
}

/// One row of the rate-region table. Absent values are outside the
/// validity region of their curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateRegionPoint {
    pub f: f64,
    pub volume: Option<f64>,
    pub translation: Option<f64>,
    pub construction: Option<f64>,
}

/// `points` evenly spaced error fractions covering `[0, 1/2]` inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| if i + 1 == points { 0.5 } else { 0.5 * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

pub fn emit_rate_region(q: Alphabet, grid: &[f64]) -> Result<Vec<RateRegionPoint>> {
    grid.iter()
        .map(|&f| {
            if !(0.0..=0.5).contains(&f) {
                return Err(Error::Domain("grid values must lie in [0, 1/2]"));
            }
            let translation = match curve_translation(f, q) {
                Ok(t) => t,
                Err(Error::UnsupportedAlphabet { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(RateRegionPoint {
                f,
                volume: Some(curve_volume(f, q)?),
                translation,
                construction: Some(curve_construction(f, q)?),
            })
        })
        .collect()
}
