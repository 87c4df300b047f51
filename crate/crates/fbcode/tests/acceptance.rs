//! Release acceptance: one PASS/FAIL line per criterion, with its time limit
//! and tolerance. Runs without the libtest harness so every line prints.

#[path = "../../core/tests/example/mod.rs"]
#[allow(dead_code)]
mod example;
#[path = "../../core/tests/oracle/mod.rs"]
#[allow(dead_code)]
mod oracle;

use std::cell::{Cell, RefCell};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use fbcode::parallel;
use fbcode_core::bounds::{
    conservation_check, curve_construction, curve_translation, curve_volume, min_blocklength_converse, volume,
    volume_bound_holds,
};
use fbcode_core::channel::DEFAULT_LEAF_CAP;
use fbcode_core::codec::FeedbackCode;
use fbcode_core::solver::{max_messages, verify_strategy, Solver, SolverConfig};
use fbcode_core::state::{check_reduction, dominates_componentwise, dominates_tailsum, invert_reduction, reduce};
use fbcode_core::table::{achievable_blocklength, verify_table, TableA};
use fbcode_core::{Alphabet, Partition, State};
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const CASES: u32 = 10_000;

fn alphabet(q: u32) -> Alphabet {
    Alphabet::new(q).unwrap()
}

fn state(c: &[u64]) -> State {
    State::from_counts(c.iter().copied()).unwrap()
}

fn counts(s: &State) -> Vec<u64> {
    s.counts().iter().map(|v| u64::try_from(v).unwrap()).collect()
}

fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    (0..k).fold(BigUint::from(1u32), |acc, i| acc * (n - i) / (i + 1))
}

/// Sphere-size weighted count, written out independently of the library.
fn oracle_volume(c: &[u64], n: usize, q: u32) -> BigUint {
    let mut total = BigUint::ZERO;
    for (i, &ci) in c.iter().enumerate() {
        let ball: BigUint = (0..=i.min(n)).map(|l| binom(n, l) * BigUint::from(q - 1).pow(l as u32)).sum();
        total += ball * ci;
    }
    total
}

fn runner(seed: u8) -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        rng_algorithm: RngAlgorithm::ChaCha,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]))
}

/// `(q, counts, parts)`: a random state with a random q-way split.
fn split_strategy() -> impl Strategy<Value = (u32, Vec<u64>, Vec<Vec<u64>>)> {
    (2u32..=5, prop::collection::vec(0u64..=40, 1..=4)).prop_flat_map(|(q, c)| {
        let cuts: Vec<_> = c
            .iter()
            .map(|&ci| prop::collection::vec(0..=ci, (q - 1) as usize))
            .collect();
        (Just(q), Just(c), cuts).prop_map(|(q, c, cuts)| {
            let mut parts = vec![vec![0u64; c.len()]; q as usize];
            for (i, mut cut) in cuts.into_iter().enumerate() {
                cut.push(0);
                cut.push(c[i]);
                cut.sort_unstable();
                for j in 0..q as usize {
                    parts[j][i] = cut[j + 1] - cut[j];
                }
            }
            (q, c, parts)
        })
    })
}

fn partition(parts: &[Vec<u64>]) -> Partition {
    Partition::new(parts.iter().map(|p| state(p)).collect()).unwrap()
}

fn run_props<S: Strategy>(
    seed: u8,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32> {
    let ran = Cell::new(0u32);
    runner(seed)
        .run(&strategy, |v| {
            ran.set(ran.get() + 1);
            test(v)
        })
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(ran.get())
}

fn c1_example_replay() -> Result<String> {
    let code = example::scripted_code();
    let expected = ["0,9", "6,3", "4,1", "3", "1"];
    for (round, want) in expected.iter().enumerate() {
        let got = code.replay(&example::RECEIVED[..round])?.ledger().state().trimmed();
        ensure!(got == want.parse()?, "round {round}: state {got}, expected {want}");
    }
    let decoded = code.decode(&example::RECEIVED)?;
    ensure!(decoded == example::E, "decoded {decoded}");
    Ok("trajectory 0,9 > 6,3 > 4,1 > 3 > 1, decodes E".into())
}

fn c2_squeeze() -> Result<String> {
    let q = alphabet(3);
    let best = max_messages(1, 4, q)?;
    ensure!(best == BigUint::from(9u32), "solver maximum {best}");
    verify_strategy(&example::scripted_tree(), q).map_err(|d| anyhow::anyhow!("witness: {d}"))?;
    ensure!(oracle_volume(&[0, 9], 4, 3) == BigUint::from(81u32));
    ensure!(oracle_volume(&[0, 10], 4, 3) > BigUint::from(81u32));
    ensure!(!volume_bound_holds(&state(&[0, 10]), 4, q), "volume bound admits 10");
    Ok("max_messages = 9, 9 * 9 = 81 = 3^4".into())
}

fn c3_losing() -> Result<String> {
    let cases: [(u32, &[u64], usize); 7] = [
        (3, &[0, 2], 2),
        (3, &[1, 1], 1),
        (3, &[1, 1, 1], 3),
        (3, &[0, 4], 3),
        (3, &[0, 1, 1], 3),
        (2, &[0, 2], 2),
        (2, &[1, 1], 1),
    ];
    for (q, c, n) in cases {
        let s = state(c);
        ensure!(!Solver::new(alphabet(q)).decide(&s, n)?, "{s}@{n} q={q} reported winning");
        ensure!(!oracle::Oracle::new(q as usize).wins(c, n), "oracle: {s}@{n} q={q} wins");
    }
    Ok(format!("{} states losing, oracle agrees", cases.len()))
}

fn c4_saturators() -> Result<String> {
    let mut checked = 0;
    for q in [3u64, 4] {
        let a = alphabet(q as u32);
        let cases: [(Vec<u64>, usize); 3] = [
            (vec![(q - 1).pow(2), 1], 2),
            (vec![q * (q - 1) * (q - 2), q], 3),
            (vec![(q - 1).pow(3), 0, 1], 3),
        ];
        for (c, n) in cases {
            let s = state(&c);
            let v = oracle_volume(&c, n, q as u32);
            ensure!(v == BigUint::from(q).pow(n as u32), "{s}@{n} q={q}: volume {v} is not q^n");
            let tree = Solver::new(a).extract_strategy(&s, n).with_context(|| format!("{s}@{n} q={q}"))?;
            verify_strategy(&tree, a).map_err(|d| anyhow::anyhow!("{s}@{n} q={q}: {d}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} volume-saturating states winning with checked strategies"))
}

fn c5_table() -> Result<String> {
    let mut checks = 0;
    for q in [3u32, 4, 5] {
        let t = TableA::build(alphabet(q), 12, 12)?;
        let report = verify_table(&t)?;
        for (name, r) in report.sections() {
            ensure!(r.passed(), "q={q} {name}: {:?}", r.failures.first());
            checks += r.checked;
        }
        for m in 1..=12 {
            let c = counts(&t.column_state(m, 1)?);
            let v = oracle_volume(&c, 2 * m - 1, q);
            ensure!(v == BigUint::from(q).pow(2 * m as u32 - 1), "q={q} m={m}: saturation volume {v}");
        }
    }
    Ok(format!("{checks} checks over q = 3, 4, 5 at 12x12; saturation recomputed"))
}

fn expect_verified(code: &FeedbackCode, paths: u64) -> Result<()> {
    let r = parallel::verify(code, DEFAULT_LEAF_CAP, None)?;
    ensure!(r.counterexample.is_none(), "M={}: {}", code.messages(), r.counterexample.unwrap());
    ensure!(r.paths == paths, "M={}: {} paths, expected {paths}", code.messages(), r.paths);
    Ok(())
}

fn c6_exhaustive() -> Result<String> {
    let q = alphabet(3);
    let mut solver = Solver::new(q);
    let nine = FeedbackCode::from_strategy(solver.extract_strategy(&state(&[0, 9]), 4)?, q, 9, 1)?;
    expect_verified(&nine, 81)?;
    let six = FeedbackCode::from_table(6, 1, q)?;
    ensure!(six.block_length() == 5);
    expect_verified(&six, 6 * 11)?;
    let twenty_four = FeedbackCode::from_table(24, 1, q)?;
    ensure!(twenty_four.block_length() == 7);
    expect_verified(&twenty_four, 24 * 15)?;

    let initial = state(&[0, 0, 4]);
    let n = (0..).find(|&n| solver.decide(&initial, n).unwrap()).unwrap();
    let four = FeedbackCode::from_strategy(solver.extract_strategy(&initial, n)?, q, 4, 2)?;
    let per = u64::try_from(oracle_volume(&[0, 0, 1], n, 3))?;
    expect_verified(&four, 4 * per)?;
    Ok(format!("81, 66, 360 paths; M=4 e=2 at minimal n={n}: {} paths", 4 * per))
}

fn c7_properties() -> Result<String> {
    let conservation = run_props(1, (split_strategy(), 1usize..=16), |((q, c, parts), n)| {
        let a = alphabet(q);
        let s = state(&c);
        let p = partition(&parts);
        let xs = reduce(&s, &p, a).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let independent = oracle::children(&c, &parts);
        let got: Vec<Vec<u64>> = xs.states().iter().map(counts).collect();
        prop_assert_eq!(&got, &independent);
        let after: BigUint = independent.iter().map(|x| oracle_volume(x, n - 1, q)).sum();
        prop_assert_eq!(oracle_volume(&c, n, q), after);
        prop_assert!(conservation_check(&s, &p, n, a).unwrap());
        Ok(())
    })?;

    let round_trip = run_props(2, split_strategy(), |(q, c, parts)| {
        let a = alphabet(q);
        let s = state(&c);
        let p = partition(&parts);
        let xs = reduce(&s, &p, a).unwrap();
        prop_assert!(check_reduction(&s, &xs, a));
        prop_assert_eq!(invert_reduction(&xs, a).unwrap(), p);
        Ok(())
    })?;

    let pair = prop::collection::vec((0u64..=30, 0u64..=30, any::<bool>()), 1..=5);
    let domination = run_props(3, pair, |levels| {
        // Half the pairs are built to dominate componentwise.
        let c: Vec<u64> = levels.iter().map(|l| l.0).collect();
        let d: Vec<u64> = levels.iter().map(|l| if l.2 { l.0 + l.1 } else { l.1 }).collect();
        let (c, d) = (state(&c), state(&d));
        if dominates_componentwise(&c, &d).unwrap() {
            prop_assert!(dominates_tailsum(&c, &d).unwrap());
        }
        Ok(())
    })?;

    let solver = RefCell::new(Solver::new(alphabet(3)));
    let wins = Cell::new(0u32);
    let small = (prop::collection::vec(0u64..=14, 1..=3), 0usize..=6);
    let monotone = run_props(4, small, |(c, n)| {
        let s = state(&c);
        let mut solver = solver.borrow_mut();
        if !solver.decide(&s, n).unwrap() {
            return Ok(());
        }
        wins.set(wins.get() + 1);
        prop_assert!(solver.decide(&s, n + 1).unwrap(), "{}@{} wins but not @{}", s, n, n + 1);
        if n >= 2 && s.budget() >= 1 {
            let t = s.translate().unwrap();
            prop_assert!(solver.decide(&t, n - 2).unwrap(), "{}@{} wins but T = {} loses @{}", s, n, t, n - 2);
        }
        Ok(())
    })?;
    ensure!(wins.get() > 1000, "only {} winning samples", wins.get());

    let mut corpus = 0;
    for q in [2u32, 3] {
        let mut brute = oracle::Oracle::new(q as usize);
        let mut pruned = Solver::new(alphabet(q));
        let mut plain = Solver::with_config(
            alphabet(q),
            SolverConfig {
                pruning: false,
                ..SolverConfig::default()
            },
        );
        for c in oracle::small_states(3, 4) {
            for n in 0..=4 {
                let s = state(&c);
                let want = brute.wins(&c, n);
                ensure!(pruned.decide(&s, n)? == want, "pruned solver wrong on {s}@{n} q={q}");
                ensure!(plain.decide(&s, n)? == want, "unpruned solver wrong on {s}@{n} q={q}");
                corpus += 1;
            }
        }
    }
    Ok(format!(
        "cases: conservation {conservation}, round trip {round_trip}, domination {domination}, \
         monotone/translate {monotone} ({} winning), corpus {corpus} (exhaustive)",
        wins.get()
    ))
}

fn oracle_entropy(x: f64, q: f64) -> f64 {
    let lg = |v: f64| v.ln() / q.ln();
    let mut h = x * lg(q - 1.0);
    if x > 0.0 {
        h -= x * lg(x);
    }
    if x < 1.0 {
        h -= (1.0 - x) * lg(1.0 - x);
    }
    h
}

fn c8_curves() -> Result<String> {
    let h = 1e-5;
    let mut worst_value: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    for qq in 3u32..=16 {
        let q = alphabet(qq);
        let f = 1.0 / qq as f64;
        let gap = (curve_construction(f, q)? - curve_volume(f, q)?).abs();
        ensure!(gap < 1e-9, "q={qq}: value gap {gap:e} at 1/q");
        let slope = |curve: &dyn Fn(f64) -> f64| (curve(f + h) - curve(f - h)) / (2.0 * h);
        let sc = slope(&|x| curve_construction(x, q).unwrap());
        let sv = slope(&|x| curve_volume(x, q).unwrap());
        ensure!((sc - sv).abs() < 1e-6, "q={qq}: slopes {sc} vs {sv}");
        worst_value = worst_value.max(gap);
        worst_slope = worst_slope.max((sc - sv).abs());
        ensure!(curve_construction(0.5, q)? == 0.0, "q={qq}: construction at 1/2 is not 0");
        let oracle = 1.0 - oracle_entropy(0.3, qq as f64);
        ensure!((curve_volume(0.3, q)? - oracle).abs() < 1e-12, "q={qq}: volume curve off");

        let qf = qq as f64;
        let start = 2.0 / (qf * qf + qf * (qf * qf - 4.0).sqrt());
        ensure!(curve_translation(start, q)?.is_some(), "q={qq}: undefined at region start");
        ensure!(curve_translation(0.5, q)?.is_some(), "q={qq}: undefined at 1/2");
        ensure!(curve_translation(start * (1.0 - 1e-9), q)?.is_none(), "q={qq}: defined below start");
        ensure!(curve_translation(start / 2.0, q)?.is_none(), "q={qq}: defined at start/2");
    }
    let q = alphabet(3);
    let mut compared = 0;
    for i in 0..1000 {
        let f = 1.0 / 3.0 + (0.5 - 1.0 / 3.0) * i as f64 / 999.0;
        if let Some(t) = curve_translation(f, q)? {
            let v = curve_volume(f, q)?;
            ensure!(t <= v + 1e-12, "f={f}: translation {t} above volume {v}");
            compared += 1;
        }
    }
    ensure!(compared == 1000, "translation defined at only {compared} grid points");
    Ok(format!(
        "q=3..16 max gap {worst_value:.1e}, max slope diff {worst_slope:.1e}; 1000-point grid below volume"
    ))
}

fn c9_sandwich() -> Result<String> {
    let q = alphabet(3);
    let mut solver = Solver::new(q);
    let mut rows = Vec::new();
    for m in [3u64, 6, 9, 24] {
        let messages = BigUint::from(m);
        let converse = min_blocklength_converse(&messages, 1, q);
        // Volume bound alone, recomputed here; the converse can only be tighter.
        let volume_only = (0..).find(|&n| oracle_volume(&[0, m], n, 3) <= BigUint::from(3u32).pow(n as u32)).unwrap();
        ensure!(converse >= volume_only, "M={m}: converse {converse} below volume bound {volume_only}");
        let initial = state(&[0, m]);
        let mut n = 0;
        while !solver.decide(&initial, n)? {
            n += 1;
        }
        let achievable = achievable_blocklength(&messages, 1, q)?.n;
        ensure!(converse <= n && n <= achievable, "M={m}: {converse} <= {n} <= {achievable} fails");
        ensure!(volume(&initial, n, q) <= q.pow(n));
        rows.push(format!("M={m}: {converse} <= {n} <= {achievable}"));
    }
    Ok(rows.join(", "))
}

type Criterion = (u32, &'static str, Duration, &'static str, fn() -> Result<String>);

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria: [Criterion; 9] = [
        (1, "example replay", secs(1), "exact", c1_example_replay),
        (2, "squeeze at n=4", secs(10), "exact", c2_squeeze),
        (3, "losing states", secs(10), "exact", c3_losing),
        (4, "winning saturators", secs(60), "exact", c4_saturators),
        (5, "table verification", secs(30), "exact big integers", c5_table),
        (6, "exhaustive codec", secs(60), "exact", c6_exhaustive),
        (7, "property suites", Duration::MAX, ">= 10^4 cases, fixed seeds", c7_properties),
        (8, "curve numerics", secs(5), "1e-9 value, 1e-6 slope", c8_curves),
        (9, "converse/achievability sandwich", secs(300), "exact", c9_sandwich),
    ];
    let mut failed = 0;
    for (id, name, limit, tolerance, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(anyhow::anyhow!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|d| {
            ensure!(elapsed <= limit, "took {elapsed:.2?}, limit {limit:?}");
            Ok(d)
        });
        let limit = if limit == Duration::MAX { "none".to_string() } else { format!("{limit:?}") };
        match outcome {
            Ok(detail) => println!(
                "criterion {id} {name}: PASS in {elapsed:.2?} (limit {limit}, {tolerance}): {detail}"
            ),
            Err(e) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL in {elapsed:.2?} (limit {limit}, {tolerance}): {e:#}");
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
