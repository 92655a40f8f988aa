//! `rankineq`: generate, inspect, verify and refute characteristic-dependent
//! rank inequalities.
//!
//! Exit codes: 0 on success as documented per subcommand, 1 on a negative
//! finding (violations, rank mismatch, no witness, failed self-check),
//! 2 on usage or parameter errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rankineq::generator::{
    gen_example_a, gen_example_b, gen_family, gen_theorem_i, gen_theorem_ii, Admissibility,
    GenError,
};
use rankineq::guide::admissible_t;
use rankineq::selftest::{self, SelftestConfig};
use rankineq::verifier::{
    exhaustive_verify, refute, sample_verify, zeroed_variable_check, RefuteBudget, SamplingPolicy,
    TrialReport, WitnessSource, DEFAULT_EXHAUSTIVE_CAP,
};
use rankineq::{Execution, GuideMatrix, NablaMode, PrimeField, TaggedInequality};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

#[derive(Parser, Debug)]
#[command(
    name = "rankineq",
    version,
    about = "Characteristic-dependent linear rank inequalities over prime fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit inequalities as JSON or text.
    Gen(GenArgs),
    /// Compare a guide's rank over each prime with its expected profile.
    Rank(RankArgs),
    /// Check an inequality on random or exhaustively enumerated assignments.
    /// Exits 0 iff no violation is found.
    Verify(VerifyArgs),
    /// Search for a violating assignment. Exits 0 iff a witness is found.
    Refute(RefuteArgs),
    /// Run the bundled self-checks.
    Selftest(SelftestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenClass {
    A,
    B,
    Both,
    Theorem,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CheckClass {
    A,
    B,
    TheoremI,
    TheoremIi,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Nabla {
    Chain,
    Interval,
}

impl From<Nabla> for NablaMode {
    fn from(n: Nabla) -> Self {
        match n {
            Nabla::Chain => NablaMode::Chain,
            Nabla::Interval => NablaMode::Interval,
        }
    }
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, value_enum, default_value_t = GenClass::Both)]
    class: GenClass,
    /// Guide matrix file (`n m t` header, one column per line).
    #[arg(long)]
    guide: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Nabla::Chain)]
    nabla: Nabla,
    /// Primes over which a guide's rank profile must hold.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PRIMES)]
    primes: Vec<u64>,
    /// Generate theorem inequalities even if the guide fails its rank profile.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Divisor parameter; overrides the guide file's value.
    #[arg(long)]
    t: Option<u64>,
    #[arg(long)]
    guide: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PRIMES)]
    primes: Vec<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

/// Selects the inequality to check.
#[derive(Args, Debug)]
struct Target {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<u64>,
    #[arg(long, value_enum)]
    class: Option<CheckClass>,
    #[arg(long)]
    guide: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Nabla::Chain)]
    nabla: Nabla,
    /// Inequality JSON file as written by `gen --format json`.
    #[arg(long, conflicts_with_all = ["n", "t", "class"])]
    expr: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    target: Target,
    /// Primes to check over; default: those <= 13 the inequality claims.
    #[arg(long = "p", value_delimiter = ',')]
    primes: Vec<u64>,
    /// Ambient dimension; default: the number of variables.
    #[arg(long)]
    d: Option<usize>,
    /// Largest sampled subspace dimension; default: d.
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// An integer, or `random`.
    #[arg(long, default_value_t = DEFAULT_SEED.to_string())]
    seed: String,
    /// Worker threads; 1 runs sequentially. Default: all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Pin this variable to the zero space.
    #[arg(long)]
    zero: Option<String>,
    /// Enumerate every assignment in GF(p)^d instead of sampling.
    #[arg(long, conflicts_with = "zero")]
    exhaustive: bool,
    /// Upper bound on enumerated assignments.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
    cap: u128,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct RefuteArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long = "p")]
    p: u64,
    /// Random assignments tried after the canonical one.
    #[arg(long, default_value_t = 1_000)]
    budget: u64,
    /// Ambient dimension of the random search; default: guide rows, else
    /// the number of variables.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED.to_string())]
    seed: String,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Skip the sampling and exhaustive checks.
    #[arg(long)]
    quick: bool,
}

enum Outcome {
    Success,
    Finding,
}

/// An error that reports a negative finding (exit 1). Any other error is a
/// usage or parameter error (exit 2).
#[derive(Debug)]
struct Finding(String);

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Finding {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Refute(a) => cmd_refute(a),
        Command::Selftest(a) => cmd_selftest(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Finding) => ExitCode::from(1),
        Err(e) => match e.downcast::<Finding>() {
            Ok(Finding(msg)) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fields(primes: &[u64]) -> Result<Vec<PrimeField>> {
    if primes.is_empty() {
        bail!("empty prime list");
    }
    primes
        .iter()
        .map(|&p| PrimeField::new(p).map_err(|e| anyhow!("{e}")))
        .collect()
}

fn parse_seed(s: &str) -> Result<u64> {
    if s == "random" {
        Ok(rand::random())
    } else {
        s.parse()
            .map_err(|_| anyhow!("--seed must be an integer or `random`, got `{s}`"))
    }
}

fn execution(threads: Option<usize>) -> Execution {
    threads.map_or(Execution::Parallel, Execution::threads)
}

fn read_guide(path: &Path) -> Result<GuideMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    GuideMatrix::parse(&text).with_context(|| format!("parsing guide {}", path.display()))
}

fn require_n(n: Option<usize>) -> Result<usize> {
    let n = n.ok_or_else(|| anyhow!("--n is required"))?;
    if n < 7 {
        bail!("n = {n}, but the family needs n >= 7");
    }
    Ok(n)
}

fn require_nt(n: Option<usize>, t: Option<u64>) -> Result<(usize, u64)> {
    let n = require_n(n)?;
    let t = t.ok_or_else(|| anyhow!("--t is required"))?;
    let window = admissible_t(n);
    if !window.contains(&t) {
        bail!(
            "t = {t} outside the window 2 <= t <= floor((n-1)/2) - 1 = {} for n = {n}",
            window.end()
        );
    }
    Ok((n, t))
}

/// Parameter errors stay usage errors, a failed rank profile is a finding.
fn gen_error(e: GenError) -> anyhow::Error {
    match e {
        GenError::ParamOutOfRange(_) => anyhow!(e),
        GenError::InadmissibleGuide(_) => anyhow!(Finding(e.to_string())),
    }
}

fn render_inequalities(list: &[TaggedInequality], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&serde_json::Value::Array(
            list.iter().map(TaggedInequality::to_json_value).collect(),
        ))
        .expect("serializable"),
        Format::Text => list
            .iter()
            .map(|i| format!("{i}\n"))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn cmd_gen(a: GenArgs) -> Result<Outcome> {
    let admissibility = if a.force {
        Admissibility::Override
    } else {
        Admissibility::Check(fields(&a.primes)?)
    };
    let mode = NablaMode::from(a.nabla);
    let list = if let Some(path) = &a.guide {
        if a.class != GenClass::Theorem {
            bail!("--guide only supports --class theorem");
        }
        let mut g = read_guide(path)?;
        if let Some(t) = a.t {
            g = g.with_t(t)?;
        }
        vec![
            gen_theorem_i(&g, mode, &admissibility).map_err(gen_error)?,
            gen_theorem_ii(&g, mode, &admissibility).map_err(gen_error)?,
        ]
    } else {
        match (a.class, a.t) {
            (GenClass::Both, None) => gen_family(require_n(a.n)?).map_err(gen_error)?,
            (GenClass::A, _) => {
                let (n, t) = require_nt(a.n, a.t)?;
                vec![gen_example_a(n, t).map_err(gen_error)?]
            }
            (GenClass::B, _) => {
                let (n, t) = require_nt(a.n, a.t)?;
                vec![gen_example_b(n, t).map_err(gen_error)?]
            }
            (GenClass::Both, Some(_)) => {
                let (n, t) = require_nt(a.n, a.t)?;
                vec![
                    gen_example_a(n, t).map_err(gen_error)?,
                    gen_example_b(n, t).map_err(gen_error)?,
                ]
            }
            (GenClass::Theorem, _) => {
                let (n, t) = require_nt(a.n, a.t)?;
                let g = GuideMatrix::example(n, t)?;
                vec![
                    gen_theorem_i(&g, mode, &admissibility).map_err(gen_error)?,
                    gen_theorem_ii(&g, mode, &admissibility).map_err(gen_error)?,
                ]
            }
        }
    };
    emit(&a.out, &render_inequalities(&list, a.out.format))?;
    Ok(Outcome::Success)
}

fn cmd_rank(a: RankArgs) -> Result<Outcome> {
    let g = match (&a.guide, a.n) {
        (Some(path), _) => {
            let g = read_guide(path)?;
            match a.t {
                Some(t) => g.with_t(t)?,
                None => g,
            }
        }
        (None, n) => {
            let (n, t) = require_nt(n, a.t)?;
            GuideMatrix::example(n, t)?
        }
    };
    let report = g.check_rank_profile(&fields(&a.primes)?);
    let text = match a.out.format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "n_rows": g.n_rows(),
            "n_cols": g.n_cols(),
            "t": g.t(),
            "rows": report.rows,
            "pass": report.pass(),
        }))?,
        Format::Text => {
            let mut s = format!(
                "guide: {} x {} with t = {}\n{}\n   p  expected  actual\n",
                g.n_rows(),
                g.n_cols(),
                g.t(),
                g.pretty().trim_end()
            );
            for r in &report.rows {
                s.push_str(&format!(
                    "{:>4}  {:>8}  {:>6}  {}\n",
                    r.p,
                    r.expected,
                    r.actual,
                    if r.matches { "ok" } else { "MISMATCH" }
                ));
            }
            s.push_str(if report.pass() {
                "profile matches"
            } else {
                "profile mismatch"
            });
            s
        }
    };
    emit(&a.out, &text)?;
    Ok(if report.pass() {
        Outcome::Success
    } else {
        Outcome::Finding
    })
}

/// The inequalities named by a [`Target`], with the guide used for canonical
/// refutation when there is one.
fn resolve_target(t: &Target) -> Result<(Vec<TaggedInequality>, Option<GuideMatrix>)> {
    if let Some(path) = &t.expr {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let list = TaggedInequality::many_from_json(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        if list.is_empty() {
            bail!("{} contains no inequalities", path.display());
        }
        let guide = t.guide.as_deref().map(read_guide).transpose()?;
        return Ok((list, guide));
    }
    let class = t
        .class
        .ok_or_else(|| anyhow!("give --class with --n/--t or --guide, or --expr FILE"))?;
    let mode = NablaMode::from(t.nabla);
    let guide = match &t.guide {
        Some(path) => {
            let g = read_guide(path)?;
            match t.t {
                Some(tt) => g.with_t(tt)?,
                None => g,
            }
        }
        None => {
            let (n, tt) = require_nt(t.n, t.t)?;
            GuideMatrix::example(n, tt)?
        }
    };
    let ineq = match class {
        CheckClass::A | CheckClass::B if t.guide.is_some() => {
            bail!("--class a|b takes --n and --t; use theorem-i or theorem-ii with --guide")
        }
        CheckClass::A => gen_example_a(t.n.unwrap_or_default(), guide.t()).map_err(gen_error)?,
        CheckClass::B => gen_example_b(t.n.unwrap_or_default(), guide.t()).map_err(gen_error)?,
        CheckClass::TheoremI => {
            gen_theorem_i(&guide, mode, &Admissibility::Override).map_err(gen_error)?
        }
        CheckClass::TheoremIi => {
            gen_theorem_ii(&guide, mode, &Admissibility::Override).map_err(gen_error)?
        }
    };
    Ok((vec![ineq], Some(guide)))
}

fn report_text(r: &TrialReport) -> String {
    let mut s = r.summary();
    for v in r.violations.iter().take(3) {
        s.push_str(&format!("\n  trial {}: slack {}", v.trial, v.witness.slack));
        for (name, rows) in &v.witness.vars {
            s.push_str(&format!("\n    {name} = span {rows:?}"));
        }
    }
    if r.violations.len() > 3 {
        s.push_str(&format!("\n  ... {} more", r.violations.len() - 3));
    }
    s
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    let (list, _) = resolve_target(&a.target)?;
    let seed = parse_seed(&a.seed)?;
    let exec = execution(a.threads);
    let mut reports = Vec::new();
    for ineq in &list {
        let primes: Vec<u64> = if a.primes.is_empty() {
            DEFAULT_PRIMES
                .into_iter()
                .filter(|&p| ineq.validity.holds_over(p as u32))
                .collect()
        } else {
            a.primes.clone()
        };
        let fields = fields(&primes)?;
        let d = a.d.unwrap_or(ineq.variables.len());
        if a.exhaustive {
            for &f in &fields {
                reports.push(exhaustive_verify(ineq, f, d, a.cap, exec)?);
            }
            continue;
        }
        let policy = SamplingPolicy::new(d, a.max_dim.unwrap_or(d), a.trials, seed)?;
        match &a.zero {
            Some(var) => reports.push(zeroed_variable_check(ineq, var, &fields, &policy, exec)?),
            None => {
                for &f in &fields {
                    reports.push(sample_verify(ineq, f, &policy, exec)?);
                }
            }
        }
    }
    let text = match a.out.format {
        Format::Json => serde_json::to_string_pretty(&reports)?,
        Format::Text => reports
            .iter()
            .map(report_text)
            .collect::<Vec<_>>()
            .join("\n"),
    };
    emit(&a.out, &text)?;
    Ok(if reports.iter().all(TrialReport::passed) {
        Outcome::Success
    } else {
        Outcome::Finding
    })
}

fn cmd_refute(a: RefuteArgs) -> Result<Outcome> {
    let (list, guide) = resolve_target(&a.target)?;
    let [ineq] = list.as_slice() else {
        bail!("refute takes exactly one inequality, {} given", list.len());
    };
    let field = PrimeField::new(a.p).map_err(|e| anyhow!("{e}"))?;
    let d = a.d.unwrap_or_else(|| {
        guide
            .as_ref()
            .map_or(ineq.variables.len(), GuideMatrix::n_rows)
    });
    let budget = RefuteBudget {
        trials: a.budget,
        ambient_dim: d,
        max_subspace_dim: a.max_dim.unwrap_or(d),
        seed: parse_seed(&a.seed)?,
    };
    let found = refute(ineq, guide.as_ref(), field, &budget, execution(a.threads))?;
    let text = match (a.out.format, &found) {
        (Format::Json, Some(r)) => serde_json::to_string_pretty(r)?,
        (Format::Json, None) => "null".to_string(),
        (Format::Text, Some(r)) => {
            let source = match r.source {
                WitnessSource::Canonical => "canonical assignment".to_string(),
                WitnessSource::Random { trial } => {
                    format!("random trial {trial} (seed {})", budget.seed)
                }
            };
            let mut s = format!(
                "{} refuted over GF({}) by the {source}: slack {}",
                ineq.label(),
                a.p,
                r.witness.slack
            );
            for (name, rows) in &r.witness.vars {
                s.push_str(&format!("\n  {name} = span {rows:?}"));
            }
            s
        }
        (Format::Text, None) => format!(
            "none: no violation of {} over GF({}) within {} trials (seed {})",
            ineq.label(),
            a.p,
            a.budget,
            budget.seed
        ),
    };
    emit(&a.out, &text)?;
    Ok(if found.is_some() {
        Outcome::Success
    } else {
        Outcome::Finding
    })
}

fn cmd_selftest(a: SelftestArgs) -> Result<Outcome> {
    let outcomes = selftest::run(&SelftestConfig {
        quick: a.quick,
        ..Default::default()
    });
    for o in &outcomes {
        println!("{o}");
    }
    let ok = selftest::all_passed(&outcomes);
    println!(
        "{}",
        if ok {
            "all checks passed"
        } else {
            "some checks FAILED"
        }
    );
    Ok(if ok {
        Outcome::Success
    } else {
        Outcome::Finding
    })
}
