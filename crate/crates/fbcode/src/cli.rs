//! The `fbcode` command line.
//!
//! Exit codes: 0 for success and positive verdicts, 1 for negative verdicts
//! (losing state, failed check, undecodable word), 2 for usage and input
//! errors. Data goes to stdout or `--out`, diagnostics to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fbcode_core::bounds::{
    emit_rate_region, min_blocklength_converse, tightest_translation, translated_volume_bounds, uniform_grid, volume,
    volume_bound_holds,
};
use fbcode_core::channel::{simulate, AdversaryKind, DEFAULT_LEAF_CAP, TRANSCRIPT_HEADER};
use fbcode_core::codec::FeedbackCode;
use fbcode_core::solver::{verify_strategy, Solver, SolverConfig};
use fbcode_core::table::{achievable_blocklength, verify_table, TableA};
use fbcode_core::{Alphabet, Error, State};
use num_bigint::BigUint;

use crate::format::{code_from_json, code_to_json, parse_symbols, rate_region_csv, strategy_from_json, strategy_to_json};
use crate::parallel::{self, THREADS_ENV};

const STATE_HELP: &str = "States are written bottom-up: \"c0,c1,...,ce\" where c_i counts candidates \
that can still absorb i errors. \"0,9\" is nine fresh messages with one error allowed.";

#[derive(Debug, Parser)]
#[command(name = "fbcode", version, about = "Feedback codes against adversarial substitution errors", after_help = STATE_HELP)]
struct Cli {
    /// Worker threads for exhaustive verification; results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a state wins with n questions left.
    Solve(SolveArgs),
    /// Export a winning strategy as JSON.
    Strategy(StrategyArgs),
    /// Converse and achievable block lengths for M messages.
    Bounds(BoundsArgs),
    /// Rate-region curves as CSV.
    RateRegion(RateRegionArgs),
    /// Build, print and check the achievability table.
    Table(TableArgs),
    /// Build codes, encode and decode.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Run a code against an adversary and print transcripts.
    Simulate(SimulateArgs),
    /// Check a code (every error pattern) or a strategy file.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long)]
    q: u32,
    /// Bottom-up counts, e.g. 0,9.
    #[arg(long)]
    state: State,
    /// Questions left.
    #[arg(long)]
    n: usize,
    /// Search nodes before giving up.
    #[arg(long, default_value_t = SolverConfig::default().node_limit)]
    node_limit: u64,
    /// Plain exhaustive search without pruning.
    #[arg(long)]
    no_prune: bool,
}

impl SolverArgs {
    fn solver(&self) -> Result<Solver> {
        let config = SolverConfig {
            node_limit: self.node_limit,
            pruning: !self.no_prune,
        };
        Ok(Solver::with_config(Alphabet::new(self.q)?, config))
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    solver: SolverArgs,
    /// Print search statistics to stderr.
    #[arg(long)]
    stats: bool,
}

#[derive(Debug, Args)]
struct StrategyArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    q: u32,
    /// Number of messages.
    #[arg(long = "M", alias = "messages")]
    messages: BigUint,
    #[arg(long)]
    e: usize,
    /// Also evaluate the bounds at this block length.
    #[arg(long)]
    n: Option<usize>,
    /// Also search for the exact minimal block length.
    #[arg(long)]
    solve: bool,
    #[arg(long, default_value_t = SolverConfig::default().node_limit)]
    node_limit: u64,
}

#[derive(Debug, Args)]
struct RateRegionArgs {
    #[arg(long)]
    q: u32,
    /// Evenly spaced error fractions over [0, 1/2], endpoints included.
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 12)]
    m_max: usize,
    #[arg(long, default_value_t = 12)]
    k_max: usize,
    /// Run every structural check; exit 1 if any fails.
    #[arg(long)]
    check: bool,
    /// CSV with 1-based m rows and k columns instead of aligned text.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CodecCommand {
    /// Construct a code and write it as JSON.
    Build(BuildArgs),
    /// Next symbol to send for a message, given the feedback so far.
    Encode(EncodeArgs),
    /// Message id for a complete received word.
    Decode(DecodeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Via {
    Solver,
    Table,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long = "M", alias = "messages")]
    messages: u64,
    #[arg(long)]
    e: usize,
    #[arg(long)]
    q: u32,
    /// Defaults to the table for q >= 3 and the solver for q = 2.
    #[arg(long, value_enum)]
    via: Option<Via>,
    /// Block length for a solver code; defaults to the smallest that works.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = SolverConfig::default().node_limit)]
    node_limit: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncodeArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    theta: u64,
    /// Symbols received so far, e.g. 2,1.
    #[arg(long, default_value = "")]
    received: String,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    code: PathBuf,
    /// The full received word, e.g. 2,1,1,0.
    #[arg(long)]
    received: String,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    code: PathBuf,
    /// Message to send; every message when absent.
    #[arg(long)]
    theta: Option<u64>,
    /// silent, greedy, random, or script:S,S,... with `-` for an untouched round.
    #[arg(long, default_value = "silent", value_parser = parse_adversary)]
    adversary: AdversaryKind,
    /// Seed for the random adversary; message theta uses seed + theta.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct VerifyTarget {
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    target: VerifyTarget,
    /// Largest number of channel paths to enumerate.
    #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
    cap: u64,
}

fn parse_adversary(s: &str) -> Result<AdversaryKind, String> {
    match s {
        "silent" => Ok(AdversaryKind::Silent),
        "greedy" => Ok(AdversaryKind::Greedy),
        "random" => Ok(AdversaryKind::Random { seed: 0 }),
        _ => {
            let script = s
                .strip_prefix("script:")
                .ok_or_else(|| format!("unknown adversary {s:?}; expected silent, greedy, random or script:..."))?;
            script
                .split(',')
                .map(|t| match t.trim() {
                    "-" => Ok(None),
                    t => t.parse().map(Some).map_err(|_| format!("bad script symbol {t:?}")),
                })
                .collect::<Result<_, _>>()
                .map(AdversaryKind::Scripted)
        }
    }
}

/// Whether the command produced a positive or a negative verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Yes,
    No,
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut ctx = Ctx { out, err, threads: cli.threads };
    match ctx.dispatch(cli.command) {
        Ok(Verdict::Yes) => 0,
        Ok(Verdict::No) => 1,
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => 0,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e:#}");
            2
        }
    }
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    threads: Option<usize>,
}

impl Ctx<'_> {
    fn dispatch(&mut self, command: Command) -> Result<Verdict> {
        match command {
            Command::Solve(a) => self.solve(a),
            Command::Strategy(a) => self.strategy(a),
            Command::Bounds(a) => self.bounds(a),
            Command::RateRegion(a) => self.rate_region(a),
            Command::Table(a) => self.table(a),
            Command::Codec(CodecCommand::Build(a)) => self.build(a),
            Command::Codec(CodecCommand::Encode(a)) => self.encode(a),
            Command::Codec(CodecCommand::Decode(a)) => self.decode(a),
            Command::Simulate(a) => self.simulate(a),
            Command::Verify(a) => self.verify(a),
        }
    }

    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<()> {
        match path {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => Ok(self.out.write_all(text.as_bytes())?),
        }
    }

    fn solve(&mut self, a: SolveArgs) -> Result<Verdict> {
        let mut solver = a.solver.solver()?;
        let winning = solver.decide(&a.solver.state, a.solver.n)?;
        writeln!(self.out, "{}", if winning { "winning" } else { "losing" })?;
        if a.stats {
            let s = solver.stats();
            writeln!(self.err, "nodes {} cache hits {}", s.nodes, s.cache_hits)?;
        }
        Ok(winning.into())
    }

    fn strategy(&mut self, a: StrategyArgs) -> Result<Verdict> {
        let mut solver = a.solver.solver()?;
        match solver.extract_strategy(&a.solver.state, a.solver.n) {
            Ok(tree) => {
                let json = strategy_to_json(&tree, solver.alphabet());
                self.emit(a.out.as_deref(), &(json + "\n"))?;
                Ok(Verdict::Yes)
            }
            Err(Error::NotWinning { .. }) => {
                writeln!(self.err, "losing: no strategy exists")?;
                Ok(Verdict::No)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn bounds(&mut self, a: BoundsArgs) -> Result<Verdict> {
        let q = Alphabet::new(a.q)?;
        let initial = State::initial(a.messages.clone(), a.e)?;
        writeln!(self.out, "converse_n: {}", min_blocklength_converse(&a.messages, a.e, q))?;
        if q.get() >= 3 {
            let ach = achievable_blocklength(&a.messages, a.e, q)?;
            writeln!(self.out, "achievable_n: {} (i = {})", ach.n, ach.i)?;
        }
        if a.solve {
            let config = SolverConfig {
                node_limit: a.node_limit,
                ..SolverConfig::default()
            };
            let n = Solver::with_config(q, config).min_blocklength(&a.messages, a.e)?;
            writeln!(self.out, "solver_n: {}", n)?;
        }
        let Some(n) = a.n else {
            return Ok(Verdict::Yes);
        };
        let fits = volume_bound_holds(&initial, n, q);
        let translated = translated_volume_bounds(&a.messages, a.e, q, n);
        writeln!(self.out, "volume: {} (limit {})", volume(&initial, n, q), q.pow(n))?;
        writeln!(self.out, "volume_bound: {}", holds(fits))?;
        writeln!(self.out, "translated_bound: {}", holds(translated))?;
        if let Some(m) = tightest_translation(&a.messages, a.e, q, n) {
            writeln!(self.out, "tightest_translation: {}", m)?;
        }
        Ok((fits && translated).into())
    }

    fn rate_region(&mut self, a: RateRegionArgs) -> Result<Verdict> {
        if a.points < 2 {
            bail!("--points must be at least 2");
        }
        let rows = emit_rate_region(Alphabet::new(a.q)?, &uniform_grid(a.points))?;
        self.emit(a.out.as_deref(), &rate_region_csv(&rows))?;
        Ok(Verdict::Yes)
    }

    fn table(&mut self, a: TableArgs) -> Result<Verdict> {
        let t = TableA::build(Alphabet::new(a.q)?, a.m_max, a.k_max)?;
        let text = if a.csv { t.to_csv() } else { aligned(&t)? };
        self.emit(a.out.as_deref(), &text)?;
        if !a.check {
            return Ok(Verdict::Yes);
        }
        let report = verify_table(&t)?;
        for (name, r) in report.sections() {
            let status = if r.passed() { "ok" } else { "FAILED" };
            writeln!(self.err, "{name}: {status} ({} checked)", r.checked)?;
            for f in r.failures.iter().take(5) {
                writeln!(self.err, "  {f}")?;
            }
        }
        Ok(report.passed().into())
    }

    fn build(&mut self, a: BuildArgs) -> Result<Verdict> {
        let q = Alphabet::new(a.q)?;
        let via = a.via.unwrap_or(if a.q >= 3 { Via::Table } else { Via::Solver });
        let code = match via {
            Via::Table => {
                let code = FeedbackCode::from_table(a.messages, a.e, q)?;
                if let Some(n) = a.n.filter(|&n| n != code.block_length()) {
                    bail!("the table construction has block length {}, not {n}", code.block_length());
                }
                code
            }
            Via::Solver => {
                let config = SolverConfig {
                    node_limit: a.node_limit,
                    ..SolverConfig::default()
                };
                let mut solver = Solver::with_config(q, config);
                let messages = BigUint::from(a.messages);
                let n = match a.n {
                    Some(n) => n,
                    None => solver.min_blocklength(&messages, a.e)?,
                };
                match solver.extract_strategy(&State::initial(messages, a.e)?, n) {
                    Ok(tree) => FeedbackCode::from_strategy(tree, q, a.messages, a.e)?,
                    Err(Error::NotWinning { .. }) => {
                        writeln!(self.err, "losing: {} messages need more than {n} symbols", a.messages)?;
                        return Ok(Verdict::No);
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        writeln!(
            self.err,
            "M {} e {} q {} n {} rate {}",
            code.messages(),
            code.errors(),
            q,
            code.block_length(),
            code.rate()
        )?;
        self.emit(a.out.as_deref(), &(code_to_json(&code) + "\n"))?;
        Ok(Verdict::Yes)
    }

    fn encode(&mut self, a: EncodeArgs) -> Result<Verdict> {
        let code = load_code(&a.code)?;
        let symbol = code.encode_step(a.theta, &parse_symbols(&a.received)?)?;
        writeln!(self.out, "{symbol}")?;
        Ok(Verdict::Yes)
    }

    fn decode(&mut self, a: DecodeArgs) -> Result<Verdict> {
        let code = load_code(&a.code)?;
        match code.decode(&parse_symbols(&a.received)?) {
            Ok(theta) => {
                writeln!(self.out, "{theta}")?;
                Ok(Verdict::Yes)
            }
            Err(e @ Error::NoUniqueSurvivor { .. }) => {
                writeln!(self.err, "{e}")?;
                Ok(Verdict::No)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn simulate(&mut self, a: SimulateArgs) -> Result<Verdict> {
        let code = load_code(&a.code)?;
        let thetas = match a.theta {
            Some(t) => t..t + 1,
            None => 0..code.messages(),
        };
        writeln!(self.out, "{TRANSCRIPT_HEADER}")?;
        let mut all_ok = true;
        for theta in thetas {
            let kind = match &a.adversary {
                AdversaryKind::Random { .. } => AdversaryKind::Random {
                    seed: a.seed.wrapping_add(theta),
                },
                k => k.clone(),
            };
            let t = simulate(&code, kind.instantiate(code.errors()).as_mut(), theta)?;
            all_ok &= t.ok;
            writeln!(self.out, "{t}")?;
        }
        Ok(all_ok.into())
    }

    fn verify(&mut self, a: VerifyArgs) -> Result<Verdict> {
        if let Some(path) = &a.target.strategy {
            let (tree, q) = strategy_from_json(&read(path)?)?;
            return match verify_strategy(&tree, q) {
                Ok(()) => {
                    writeln!(self.out, "passed: {} nodes", tree.node_count())?;
                    Ok(Verdict::Yes)
                }
                Err(defect) => {
                    writeln!(self.out, "failed: {defect}")?;
                    Ok(Verdict::No)
                }
            };
        }
        let path = a.target.code.as_ref().expect("clap requires one target");
        let code = load_code(path)?;
        let report = parallel::verify(&code, a.cap, self.threads)?;
        match &report.counterexample {
            None if report.passed() => {
                writeln!(self.out, "passed: {} messages, {} paths", report.messages, report.paths)?;
            }
            None => writeln!(
                self.out,
                "failed: visited {} paths, expected {}",
                report.paths,
                report.messages * report.paths_per_message
            )?,
            Some(c) => writeln!(self.out, "failed: {c}")?,
        }
        Ok(report.passed().into())
    }
}

fn holds(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_code(path: &Path) -> Result<FeedbackCode> {
    code_from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

/// Right-aligned columns, one row per m.
fn aligned(t: &TableA) -> Result<String> {
    let mut cells = vec![std::iter::once("m\\k".to_string())
        .chain((1..=t.k_max()).map(|k| k.to_string()))
        .collect::<Vec<_>>()];
    for m in 1..=t.m_max() {
        let mut row = vec![m.to_string()];
        for k in 1..=t.k_max() {
            row.push(t.get(m, k)?.to_string());
        }
        cells.push(row);
    }
    let widths: Vec<usize> = (0..=t.k_max())
        .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(line.join(" ").trim_end());
        out.push('\n');
    }
    Ok(out)
}
