//! Command-line front end.
//!
//! Every subcommand reads one JSON experiment description (`--config`) and
//! differs only in what it does with it:
//!
//! * `entropy` — order-`1/(1+rho)` conditional entropy of the source;
//! * `evaluate` — build the two-hint scheme for an explicit split and
//!   check every bound, optionally appending a CSV row;
//! * `sweep` — run blocklengths `1..=n_max` at fixed rates and emit a CSV
//!   table;
//! * `oracle` — run one exhaustive oracle against its fast counterpart.
//!
//! Exit codes: 0 success (1 when an oracle disagrees with the fast path),
//! 2 unusable configuration, 3 parameter domain violation, 4 exhausted
//! budget. The `AMBIGUITY_LAB_BUDGET` environment variable overrides the
//! configured `max_configs`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::asymptotics::{sweep, RatePair, SweepOutcome};
use crate::error::{Error, Result};
use crate::guessing::{ceiled_min_guess_moment, min_guess_moment, optimal_guesser};
use crate::oracles::{
    brute_eve, brute_min_guess, brute_side_info, brute_task_encoder, Budget,
};
use crate::pmf::{tilt_order, arimoto_conditional_entropy, JointPMF};
use crate::storage::{
    bob_guess_ambiguity, bob_list_ambiguity, build_guess_encoder, build_list_encoder,
    eve_bounds, eve_feasible_pair_ambiguity, evaluate_scheme, pad_secrecy_deviation,
    AmbiguityReport, EveMode, HintEncoder, HintVersion, SplitParams,
};
use crate::task::{best_v, encoder_from_guesser, list_moment};

/// Relative agreement tolerance for printed checks.
const CHECK_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(
    name = "ambiguity-lab",
    version,
    about = "Build and audit two-hint secret storage schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the source's conditional entropy at the tilted order
    Entropy(CommonArgs),
    /// Build a scheme from an explicit split and check every bound
    Evaluate(CommonArgs),
    /// Sweep blocklengths at fixed hint rates, emitting a CSV table
    Sweep(CommonArgs),
    /// Run one exhaustive oracle against its fast counterpart
    Oracle(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment description
    #[arg(long)]
    config: PathBuf,
    /// CSV destination (appended by evaluate, rewritten by sweep)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured eavesdropper mode
    #[arg(long, value_enum)]
    eve_mode: Option<EveModeArg>,
    /// Override the configured heuristic restart count
    #[arg(long)]
    restarts: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EveModeArg {
    Formula,
    Heuristic,
    Exact,
}

impl From<EveModeArg> for EveMode {
    fn from(mode: EveModeArg) -> Self {
        match mode {
            EveModeArg::Formula => EveMode::Formula,
            EveModeArg::Heuristic => EveMode::Heuristic,
            EveModeArg::Exact => EveMode::Exact,
        }
    }
}

/// One experiment description. `split` drives `evaluate`, `rates` drives
/// `sweep`, and the `oracle_*` keys drive `oracle`; unused sections are
/// simply ignored by the other subcommands.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    source: SourceSpec,
    rho: f64,
    #[serde(default = "default_version")]
    version: HintVersion,
    #[serde(default)]
    split: Option<SplitSpec>,
    #[serde(default)]
    rates: Option<RatesSpec>,
    #[serde(default = "default_eve_mode")]
    eve_mode: EveMode,
    #[serde(default = "default_restarts")]
    restarts: u32,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    budget: BudgetSpec,
    #[serde(default)]
    oracle_kind: Option<OracleKind>,
    #[serde(default)]
    z_size: Option<usize>,
    #[serde(default)]
    m_size: Option<usize>,
}

fn default_version() -> HintVersion {
    HintVersion::Guessing
}

fn default_eve_mode() -> EveMode {
    EveMode::Formula
}

fn default_restarts() -> u32 {
    8
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum SourceSpec {
    /// The joint table itself, in the same JSON shape `JointPMF` emits.
    Inline(serde_json::Value),
    /// Path to a JSON file with that shape, relative to the working
    /// directory.
    Path(String),
}

#[derive(Deserialize)]
struct SplitSpec {
    c_s: u64,
    c_1: u64,
    c_2: u64,
    m1: u64,
    m2: u64,
}

#[derive(Deserialize)]
struct RatesSpec {
    r1: f64,
    r2: f64,
    n_max: u32,
}

#[derive(Deserialize, Default)]
struct BudgetSpec {
    max_configs: Option<u64>,
    max_seconds: Option<f64>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum OracleKind {
    MinGuess,
    SideInfo,
    TaskEncoder,
    Eve,
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn load_source(cfg: &ExperimentConfig) -> Result<JointPMF> {
    match &cfg.source {
        SourceSpec::Inline(value) => JointPMF::from_json(&value.to_string()),
        SourceSpec::Path(path) => JointPMF::load(Path::new(path)),
    }
}

fn effective_budget(cfg: &ExperimentConfig) -> Result<Budget> {
    let mut budget = Budget::default();
    if let Some(c) = cfg.budget.max_configs {
        budget.max_configs = c;
    }
    if let Some(s) = cfg.budget.max_seconds {
        budget.max_seconds = s;
    }
    if let Ok(text) = std::env::var("AMBIGUITY_LAB_BUDGET") {
        budget.max_configs = text.trim().parse().map_err(|_| {
            Error::Config(format!(
                "AMBIGUITY_LAB_BUDGET must be an unsigned integer, got {:?}",
                text
            ))
        })?;
    }
    Ok(budget)
}

fn split_params(cfg: &ExperimentConfig) -> Result<SplitParams> {
    let spec = cfg
        .split
        .as_ref()
        .ok_or_else(|| Error::Config("this subcommand needs a \"split\" section".into()))?;
    Ok(SplitParams::new(
        spec.c_s,
        spec.c_1,
        spec.c_2,
        spec.m1,
        spec.m2,
        cfg.version,
    ))
}

fn fmt(v: f64) -> String {
    format!("{:.8e}", v)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "[PASS]"
    } else {
        "[FAIL]"
    }
}

/// `a <= b` up to relative slack.
fn leq(a: f64, b: f64) -> bool {
    a <= b + CHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

fn agrees(a: f64, b: f64) -> bool {
    (a - b).abs() <= CHECK_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Distribution(_) | Error::Io(_) | Error::Json(_) => 2,
        Error::Param(_) | Error::SplitRejected(_) => 3,
        Error::Budget { .. } | Error::TimeBudget { .. } => 4,
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let (args, runner): (&CommonArgs, fn(&CommonArgs, &ExperimentConfig) -> Result<i32>) =
        match &cli.command {
            Command::Entropy(a) => (a, run_entropy),
            Command::Evaluate(a) => (a, run_evaluate),
            Command::Sweep(a) => (a, run_sweep),
            Command::Oracle(a) => (a, run_oracle),
        };
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = args.eve_mode {
        cfg.eve_mode = mode.into();
    }
    if let Some(restarts) = args.restarts {
        cfg.restarts = restarts;
    }
    runner(args, &cfg)
}

fn run_entropy(_args: &CommonArgs, cfg: &ExperimentConfig) -> Result<i32> {
    let j = load_source(cfg)?;
    let h = arimoto_conditional_entropy(&j, tilt_order(cfg.rho))?;
    println!("H={:.6} bits", h);
    println!("2^(rho*H)={:.6}", (cfg.rho * h).exp2());
    Ok(0)
}

const EVALUATE_CSV_HEADER: &str = "rho,version,c_s,c_1,c_2,m1,m2,bob_guess,bob_list,\
eve_exact,eve_feasible,eve_lower,eve_upper,bob_achievability,bob_converse";

fn evaluate_csv_row(cfg: &ExperimentConfig, p: &SplitParams, report: &AmbiguityReport) -> String {
    let version = match p.version {
        HintVersion::Guessing => "guessing",
        HintVersion::List => "list",
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        fmt(cfg.rho),
        version,
        p.c_s,
        p.c_1,
        p.c_2,
        p.m1_size,
        p.m2_size,
        fmt(report.bob_guess),
        fmt(report.bob_list),
        report.eve_exact.map(fmt).unwrap_or_default(),
        fmt(report.eve_upper_feasible),
        fmt(report.bounds.eve_lower),
        fmt(report.bounds.eve_upper),
        fmt(report.bounds.bob_achievability),
        fmt(report.bounds.bob_converse),
    )
}

fn append_csv(path: &Path, header: &str, row: &str) -> Result<()> {
    let need_header = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if need_header {
        writeln!(file, "{}", header)?;
    }
    writeln!(file, "{}", row)?;
    Ok(())
}

fn run_evaluate(args: &CommonArgs, cfg: &ExperimentConfig) -> Result<i32> {
    let j = load_source(cfg)?;
    let p = split_params(cfg)?;
    let budget = effective_budget(cfg)?;
    let (enc, report) =
        evaluate_scheme(&j, &p, cfg.rho, cfg.eve_mode, cfg.restarts, cfg.seed, &budget)?;
    let version = match p.version {
        HintVersion::Guessing => "guessing",
        HintVersion::List => "list",
    };
    println!(
        "version={} c_s={} c_1={} c_2={} m1={} m2={} rho={}",
        version,
        p.c_s,
        p.c_1,
        p.c_2,
        p.m1_size,
        p.m2_size,
        fmt(cfg.rho)
    );
    println!("bob_guess={}", fmt(report.bob_guess));
    println!("bob_list={}", fmt(report.bob_list));
    println!("eve_feasible={}", fmt(report.eve_upper_feasible));
    if let Some(exact) = report.eve_exact {
        println!("eve_exact={}", fmt(exact));
    }
    println!("eve_lower={}", fmt(report.bounds.eve_lower));
    println!("eve_upper={}", fmt(report.bounds.eve_upper));
    println!("bob_achievability={}", fmt(report.bounds.bob_achievability));
    println!("bob_converse={}", fmt(report.bounds.bob_converse));
    let bob_for_version = match p.version {
        HintVersion::Guessing => report.bob_guess,
        HintVersion::List => report.bob_list,
    };
    let eve = report.eve_value();
    println!(
        "reader_achievability {} ({} < {})",
        verdict(bob_for_version < report.bounds.bob_achievability),
        fmt(bob_for_version),
        fmt(report.bounds.bob_achievability)
    );
    println!(
        "reader_converse {} ({} >= {})",
        verdict(leq(report.bounds.bob_converse, bob_for_version)),
        fmt(bob_for_version),
        fmt(report.bounds.bob_converse)
    );
    println!(
        "eavesdropper_lower {} ({} >= {})",
        verdict(leq(report.bounds.eve_lower, eve)),
        fmt(eve),
        fmt(report.bounds.eve_lower)
    );
    println!(
        "eavesdropper_upper {} ({} <= {})",
        verdict(leq(eve, report.bounds.eve_upper)),
        fmt(eve),
        fmt(report.bounds.eve_upper)
    );
    let pad = pad_secrecy_deviation(&enc)?;
    println!("pad_uniformity {} (deviation {})", verdict(pad <= 1e-12), fmt(pad));
    if let Some(out) = &args.out {
        append_csv(out, EVALUATE_CSV_HEADER, &evaluate_csv_row(cfg, &p, &report))?;
    }
    Ok(0)
}

const SWEEP_CSV_HEADER: &str =
    "n,m1,m2,bob_guess,bob_list,eve_lo,eve_hi,exp_lo,exp_hi,exponent_target";

fn sweep_csv(outcome: &SweepOutcome) -> String {
    let mut text = String::from(SWEEP_CSV_HEADER);
    text.push('\n');
    for row in &outcome.rows {
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.n,
            row.m1,
            row.m2,
            fmt(row.bob_guess),
            fmt(row.bob_list),
            fmt(row.eve_lo),
            fmt(row.eve_hi),
            fmt(row.exp_lo),
            fmt(row.exp_hi),
            outcome.target
        ));
    }
    text
}

fn run_sweep(args: &CommonArgs, cfg: &ExperimentConfig) -> Result<i32> {
    let j = load_source(cfg)?;
    let rates_spec = cfg
        .rates
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a \"rates\" section".into()))?;
    let rates = RatePair::new(rates_spec.r1, rates_spec.r2)?;
    let budget = effective_budget(cfg)?;
    let restarts = match cfg.eve_mode {
        EveMode::Formula => None,
        EveMode::Heuristic | EveMode::Exact => Some(cfg.restarts),
    };
    let outcome = sweep(
        &j,
        rates,
        cfg.rho,
        rates_spec.n_max,
        cfg.seed,
        restarts,
        &budget,
    )?;
    let csv = sweep_csv(&outcome);
    if outcome.truncated {
        eprintln!(
            "sweep truncated after n={} by the configured budget",
            outcome.rows.len()
        );
    }
    match &args.out {
        Some(out) => {
            fs::write(out, &csv)?;
            println!("wrote {} rows to {}", outcome.rows.len(), out.display());
        }
        None => print!("{}", csv),
    }
    Ok(0)
}

fn build_configured_encoder(
    j: &JointPMF,
    cfg: &ExperimentConfig,
) -> Result<(SplitParams, HintEncoder)> {
    let p = split_params(cfg)?;
    let enc = match p.version {
        HintVersion::Guessing => build_guess_encoder(j, &p, cfg.seed)?,
        HintVersion::List => build_list_encoder(j, &p, cfg.seed)?,
    };
    Ok((p, enc))
}

fn run_oracle(_args: &CommonArgs, cfg: &ExperimentConfig) -> Result<i32> {
    let j = load_source(cfg)?;
    let budget = effective_budget(cfg)?;
    let kind = cfg
        .oracle_kind
        .ok_or_else(|| Error::Config("oracle needs an \"oracle_kind\" key".into()))?;
    let pass = match kind {
        OracleKind::MinGuess => {
            let oracle = brute_min_guess(&j, cfg.rho, &budget)?;
            let fast = min_guess_moment(&j, cfg.rho)?;
            println!("kind=min_guess");
            println!("oracle={}", fmt(oracle));
            println!("fast={}", fmt(fast));
            let ok = agrees(oracle, fast);
            println!("agreement {}", verdict(ok));
            ok
        }
        OracleKind::SideInfo => {
            let z_size = cfg
                .z_size
                .ok_or_else(|| Error::Config("side_info oracle needs a \"z_size\" key".into()))?;
            let oracle = brute_side_info(&j, z_size, cfg.rho, &budget)?;
            let fast = ceiled_min_guess_moment(&j, z_size, cfg.rho)?;
            println!("kind=side_info");
            println!("oracle={}", fmt(oracle));
            println!("fast={}", fmt(fast));
            let ok = agrees(oracle, fast);
            println!("agreement {}", verdict(ok));
            ok
        }
        OracleKind::TaskEncoder => {
            let m_size = cfg
                .m_size
                .ok_or_else(|| Error::Config("task_encoder oracle needs an \"m_size\" key".into()))?;
            let oracle = brute_task_encoder(&j, m_size, cfg.rho, &budget)?;
            let g = optimal_guesser(&j.posterior_family());
            let enc = encoder_from_guesser(&g, &j, best_v(m_size, j.x_size())?, m_size)?;
            let bound = list_moment(&enc, &j, cfg.rho)?;
            println!("kind=task_encoder");
            println!("oracle={}", fmt(oracle));
            println!("rank_split_bound={}", fmt(bound));
            let ok = leq(oracle, bound);
            println!("oracle_within_bound {}", verdict(ok));
            ok
        }
        OracleKind::Eve => {
            let (p, enc) = build_configured_encoder(&j, cfg)?;
            let oracle = brute_eve(&enc, &j, cfg.rho, &budget)?;
            let bob = match p.version {
                HintVersion::Guessing => bob_guess_ambiguity(&enc, &j, cfg.rho)?,
                HintVersion::List => bob_list_ambiguity(&enc, &j, cfg.rho)?,
            };
            let (lower, upper) = eve_bounds(&p, &j, cfg.rho, bob)?;
            let feasible = eve_feasible_pair_ambiguity(&enc, &j, cfg.rho)?;
            println!("kind=eve");
            println!("oracle={}", fmt(oracle));
            println!("feasible={}", fmt(feasible));
            println!("lower={}", fmt(lower));
            println!("upper={}", fmt(upper));
            let ok = leq(lower, oracle) && leq(oracle, feasible) && leq(oracle, upper);
            println!("sandwich {}", verdict(ok));
            ok
        }
    };
    Ok(if pass { 0 } else { 1 })
}
