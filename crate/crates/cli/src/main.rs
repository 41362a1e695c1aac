//! Command-line driver: sample, validate, enumerate, sweep, and profile
//! bipartite networks with fixed degree sequences.
//!
//! Every run derives all randomness from one master seed (drawn from entropy
//! when not given) and records it in the emitted summary, so any result can
//! be reproduced exactly from its output directory.

mod report;

use clap::{ArgGroup, Args, Parser, Subcommand};
use rand::Rng as _;
use report::{csv_quote, Summary};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use trade_sampler::datasets::{format_edgelist, format_incidence};
use trade_sampler::oracle::{
    enumerate_universe, margin_pair_family, run_sweep_capped,
    run_validation_experiment_capped, small_margin_suite, ValidationSummary,
    DEFAULT_ENUMERATION_CAP,
};
use trade_sampler::stats::{ks_two_sample, KsResult};
use trade_sampler::stopping::{
    sample_with_stopping_rule_observed, DistanceProfile, Ensemble, StoppingConfig,
};
use trade_sampler::{
    builtin, load_edgelist, load_incidence, realize, BipartiteNetwork,
    DegreeSequencePair, Error, NamedDataset, Result, TradeAlgorithm,
};

#[derive(Parser)]
#[command(
    name = "trade-sampler",
    version,
    about = "Randomly sample bipartite networks with fixed degree sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample of networks, stopping when the distance profile
    /// stabilizes.
    Sample(SampleArgs),
    /// Enumerate a small universe and measure how often stopping-rule
    /// samples are random.
    Validate(ValidateArgs),
    /// List every network realizing the given margins.
    Enumerate(EnumerateArgs),
    /// Run the validation experiment over a set of margin pairs.
    Sweep(SweepArgs),
    /// Time trading with and without stopping-rule bookkeeping.
    Profile(ProfileArgs),
}

/// Where the margins (and optionally a starting network) come from.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Bundled dataset name (finches, women).
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Incidence matrix file of 0/1 cells, rows as top nodes.
    #[arg(long, value_name = "PATH")]
    incidence: Option<PathBuf>,
    /// Edge list file, one "top bottom" label pair per line.
    #[arg(long, value_name = "PATH")]
    edgelist: Option<PathBuf>,
    /// Inline degree sequences, top then bottom.
    #[arg(long, value_name = "T1,..;B1,..")]
    degrees: Option<String>,
}

impl InputArgs {
    fn load(&self) -> Result<NamedDataset> {
        if let Some(name) = &self.builtin {
            return builtin(name);
        }
        if let Some(path) = &self.incidence {
            return load_incidence(path);
        }
        if let Some(path) = &self.edgelist {
            return load_edgelist(path);
        }
        if let Some(spec) = &self.degrees {
            let pair = parse_degrees(spec)?;
            return Ok(NamedDataset {
                name: "degrees".into(),
                pair,
                network: None,
                top_labels: None,
                bottom_labels: None,
            });
        }
        unreachable!("clap enforces exactly one input source");
    }
}

/// Parse "1,1,2;1,1,2" into a degree-sequence pair.
fn parse_degrees(spec: &str) -> Result<DegreeSequencePair> {
    let reject = |message: String| Error::RejectedInput(message);
    let Some((top, bottom)) = spec.split_once(';') else {
        return Err(reject(format!(
            "degrees {spec:?} need two ';'-separated sequences"
        )));
    };
    if bottom.contains(';') {
        return Err(reject(format!("degrees {spec:?} have more than two sequences")));
    }
    let parse_side = |side: &str| -> Result<Vec<usize>> {
        side.split(',')
            .map(|token| {
                token.trim().parse::<usize>().map_err(|_| {
                    reject(format!("degree {token:?} is not a non-negative integer"))
                })
            })
            .collect()
    };
    Ok(DegreeSequencePair::new(parse_side(top)?, parse_side(bottom)?))
}

/// Stopping-rule knobs shared by the sampling commands.
#[derive(Args)]
struct StoppingArgs {
    /// Chains in the ensemble, and networks in the sample.
    #[arg(long, default_value_t = 1000, value_name = "N")]
    sample_size: usize,
    /// Trades between checkpoints [default: twice the top-node count].
    #[arg(long, value_name = "N")]
    interval: Option<u64>,
    /// KS p-value a checkpoint must exceed to stop.
    #[arg(long, default_value_t = 0.05, value_name = "X")]
    alpha: f64,
    /// Stop only on near-identical consecutive profiles (alpha 0.95).
    #[arg(long, conflicts_with = "alpha")]
    strict: bool,
    /// Give up if no checkpoint passes before this many trades.
    #[arg(long, default_value_t = 1_000_000, value_name = "N")]
    max_trades: u64,
}

impl StoppingArgs {
    fn config(&self) -> StoppingConfig {
        StoppingConfig {
            sample_size: self.sample_size,
            interval: self.interval,
            alpha: if self.strict { 0.95 } else { self.alpha },
            max_trades: self.max_trades,
            ..StoppingConfig::default()
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Master seed; all randomness derives from it [default: entropy].
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

impl CommonArgs {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or_else(|| rand::rng().random())
    }

    fn prepare(&self) -> Result<()> {
        if let Some(threads) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| Error::RejectedInput(format!("thread pool: {e}")))?;
        }
        std::fs::create_dir_all(&self.out)?;
        Ok(())
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    stopping: StoppingArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    stopping: StoppingArgs,
    /// Independent sample-and-validate replications.
    #[arg(long, default_value_t = 200, value_name = "N")]
    reps: usize,
    /// Abort if the universe exceeds this many members.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP, value_name = "N")]
    cap: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Abort if the universe exceeds this many members.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP, value_name = "N")]
    cap: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
#[command(group = ArgGroup::new("sweep_input").required(true).multiple(false))]
struct SweepArgs {
    /// File of margin pairs, one "t1,..;b1,.." per line, '#' comments.
    #[arg(long, value_name = "PATH", group = "sweep_input")]
    pairs: Option<PathBuf>,
    /// Use the built-in ten-pair suite.
    #[arg(long, group = "sweep_input")]
    suite: bool,
    /// Generate all small-universe pairs up to these side lengths.
    #[arg(long, value_name = "T,B", group = "sweep_input")]
    family: Option<String>,
    #[command(flatten)]
    stopping: StoppingArgs,
    /// Replications per pair.
    #[arg(long, default_value_t = 50, value_name = "N")]
    reps: usize,
    /// Abort a pair if its universe exceeds this many members.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP, value_name = "N")]
    cap: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    stopping: StoppingArgs,
    /// Trades per chain for the timing run [default: 200 checkpoints].
    #[arg(long, value_name = "N")]
    budget: Option<u64>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Profile(args) => cmd_profile(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// Script-friendly exit codes: 2 usage or parse, 3 infeasible margins,
/// 4 non-convergence, 5 universe too large.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InfeasibleMargins => 3,
        Error::NonConvergence { .. } => 4,
        Error::UniverseTooLarge { .. } => 5,
        _ => 2,
    }
}

fn resolve_start(dataset: &NamedDataset) -> Result<BipartiteNetwork> {
    match &dataset.network {
        Some(network) => Ok(network.clone()),
        None => realize(&dataset.pair),
    }
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    args.common.prepare()?;
    let dataset = args.input.load()?;
    let start = resolve_start(&dataset)?;
    let cfg = args.stopping.config();
    let seed = args.common.seed();
    let out = &args.common.out;

    let started = Instant::now();
    let mut profiles: Vec<DistanceProfile> = Vec::new();
    let outcome =
        sample_with_stopping_rule_observed(&start, &cfg, seed, |p| profiles.push(p.clone()));
    let elapsed = started.elapsed().as_secs_f64();

    // The trace files are written even when the rule fails to converge.
    write_distances(&out.join("distances.csv"), &profiles)?;

    let mut summary = Summary::new();
    summary.push("command", "sample");
    summary.push("dataset", dataset.name.as_str());
    summary.push("seed", seed);
    summary.push("sample_size", cfg.sample_size as u64);
    summary.push("interval", cfg.effective_interval(start.top_count()));
    summary.push("alpha", cfg.alpha);
    summary.push("max_trades", cfg.max_trades);

    match outcome {
        Ok(report) => {
            write_ks_trace(&out.join("ks_trace.csv"), &report.ks_trace)?;
            write_archive(&out.join("networks.edges"), &report.networks, &dataset)?;
            summary.push("status", "converged");
            summary.push("trades_performed", report.trades_performed);
            summary.push("checkpoints", report.ks_trace.len() as u64);
            summary.push("unique_count", report.unique_count as u64);
            summary.push("elapsed_seconds", elapsed);
            summary.write(out)?;
            println!(
                "sampled {} networks in {} trades, {} unique; wrote {}",
                report.networks.len(),
                report.trades_performed,
                report.unique_count,
                out.display()
            );
            Ok(())
        }
        Err(Error::NonConvergence { trades, trace }) => {
            write_ks_trace(&out.join("ks_trace.csv"), &trace)?;
            summary.push("status", "non-convergence");
            summary.push("trades_performed", trades);
            summary.push("checkpoints", trace.len() as u64);
            summary.push("elapsed_seconds", elapsed);
            summary.write(out)?;
            Err(Error::NonConvergence { trades, trace })
        }
        Err(err) => Err(err),
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    args.common.prepare()?;
    let dataset = args.input.load()?;
    let cfg = args.stopping.config();
    let seed = args.common.seed();
    let out = &args.common.out;

    let started = Instant::now();
    let row =
        run_validation_experiment_capped(&dataset.pair, args.reps, &cfg, seed, args.cap)?;
    let elapsed = started.elapsed().as_secs_f64();

    std::fs::write(
        out.join("validation.csv"),
        format!("{}{}", validation_header(), validation_row(&row)),
    )?;

    let mut summary = Summary::new();
    summary.push("command", "validate");
    summary.push("dataset", dataset.name.as_str());
    summary.push("seed", seed);
    summary.push("pair", row.pair.to_string());
    summary.push("cardinality", row.cardinality as u64);
    summary.push("reps", row.reps as u64);
    summary.push("sample_size", cfg.sample_size as u64);
    summary.push("alpha", cfg.alpha);
    summary.push("mean_trades", row.mean_trades);
    summary.push("fraction_random", row.fraction_random);
    summary.push("fraction_covered", row.fraction_covered);
    summary.push("fraction_uniform", row.fraction_uniform);
    summary.push("elapsed_seconds", elapsed);
    summary.write(out)?;

    println!(
        "{} |B|={} mean_trades={:.2} random={:.2}%",
        row.pair,
        row.cardinality,
        row.mean_trades,
        100.0 * row.fraction_random
    );
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<()> {
    args.common.prepare()?;
    let dataset = args.input.load()?;
    let seed = args.common.seed();
    let out = &args.common.out;

    let started = Instant::now();
    let universe = enumerate_universe(&dataset.pair, args.cap)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut text = String::new();
    for (k, member) in universe.members().iter().enumerate() {
        text.push_str(&format!("# member {k}\n"));
        text.push_str(&format_incidence(member, None, None));
        text.push('\n');
    }
    std::fs::write(out.join("universe.txt"), text)?;

    let mut summary = Summary::new();
    summary.push("command", "enumerate");
    summary.push("dataset", dataset.name.as_str());
    summary.push("seed", seed);
    summary.push("pair", dataset.pair.to_string());
    summary.push("cardinality", universe.cardinality() as u64);
    summary.push("cap", args.cap as u64);
    summary.push("elapsed_seconds", elapsed);
    summary.write(out)?;

    println!("{} has {} member(s)", dataset.pair, universe.cardinality());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    args.common.prepare()?;
    let pairs = sweep_pairs(&args)?;
    let cfg = args.stopping.config();
    let seed = args.common.seed();
    let out = &args.common.out;

    let started = Instant::now();
    let sweep = run_sweep_capped(&pairs, args.reps, &cfg, seed, args.cap)?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut csv = validation_header();
    for row in &sweep.rows {
        csv.push_str(&validation_row(row));
    }
    std::fs::write(out.join("sweep.csv"), csv)?;

    let mut summary = Summary::new();
    summary.push("command", "sweep");
    summary.push("seed", seed);
    summary.push("pairs", pairs.len() as u64);
    summary.push("rows", sweep.rows.len() as u64);
    summary.push("skipped", sweep.skipped.len() as u64);
    summary.push("reps", args.reps as u64);
    summary.push("sample_size", cfg.sample_size as u64);
    summary.push("alpha", cfg.alpha);
    match sweep.correlation_top_vs_trades {
        Some(r) => summary.push("correlation_top_vs_trades", r),
        None => summary.push("correlation_top_vs_trades", serde_json::Value::Null),
    }
    summary.push("elapsed_seconds", elapsed);
    summary.write(out)?;

    for (pair, reason) in &sweep.skipped {
        eprintln!("skipped {pair}: {reason}");
    }
    match sweep.correlation_top_vs_trades {
        Some(r) => println!(
            "{} pair(s) validated, correlation(top count, mean trades) = {r:.3}",
            sweep.rows.len()
        ),
        None => println!(
            "{} pair(s) validated, correlation undefined",
            sweep.rows.len()
        ),
    }
    Ok(())
}

fn sweep_pairs(args: &SweepArgs) -> Result<Vec<DegreeSequencePair>> {
    if args.suite {
        return Ok(small_margin_suite());
    }
    if let Some(bounds) = &args.family {
        let Some((t, b)) = bounds.split_once(',') else {
            return Err(Error::RejectedInput(format!(
                "family bounds {bounds:?} need the form MAX_TOP,MAX_BOTTOM"
            )));
        };
        let parse = |s: &str| {
            s.trim().parse::<usize>().map_err(|_| {
                Error::RejectedInput(format!("family bound {s:?} is not an integer"))
            })
        };
        return Ok(margin_pair_family(parse(t)?, parse(b)?));
    }
    if let Some(path) = &args.pairs {
        let text = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let pair = parse_degrees(line).map_err(|e| Error::Parse {
                line: index + 1,
                message: e.to_string(),
            })?;
            pairs.push(pair);
        }
        if pairs.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "pairs file lists no margin pairs".into(),
            });
        }
        return Ok(pairs);
    }
    unreachable!("clap enforces exactly one sweep input");
}

fn cmd_profile(args: ProfileArgs) -> Result<()> {
    args.common.prepare()?;
    let dataset = args.input.load()?;
    let start = resolve_start(&dataset)?;
    let cfg = args.stopping.config();
    cfg.validate()?;
    let seed = args.common.seed();
    let out = &args.common.out;

    let interval = cfg.effective_interval(start.top_count());
    let rounds = (args.budget.unwrap_or(200 * interval) / interval).max(1);
    let trades = rounds * interval;

    // Full bookkeeping: per-checkpoint distance profiles plus the KS test,
    // exactly the per-round work of the stopping rule, for a fixed budget.
    let started = Instant::now();
    let mut ensemble = Ensemble::new(
        start.clone(),
        cfg.sample_size,
        seed,
        TradeAlgorithm::default(),
    );
    let mut previous: Option<DistanceProfile> = None;
    for _ in 0..rounds {
        ensemble.advance(interval)?;
        let profile = ensemble.profile()?;
        if let Some(prev) = &previous {
            ks_two_sample(&profile.to_f64(), &prev.to_f64())?;
        }
        previous = Some(profile);
    }
    let with_rule = started.elapsed().as_secs_f64();

    // Bare trading over the same budget.
    let started = Instant::now();
    let mut bare = Ensemble::new(start, cfg.sample_size, seed, TradeAlgorithm::default());
    bare.advance(trades)?;
    let bare_seconds = started.elapsed().as_secs_f64();

    let ratio = with_rule / bare_seconds;
    let mut summary = Summary::new();
    summary.push("command", "profile");
    summary.push("dataset", dataset.name.as_str());
    summary.push("seed", seed);
    summary.push("sample_size", cfg.sample_size as u64);
    summary.push("interval", interval);
    summary.push("trades", trades);
    summary.push("checkpoints", rounds);
    summary.push("with_rule_seconds", with_rule);
    summary.push("bare_seconds", bare_seconds);
    summary.push("overhead_ratio", ratio);
    summary.write(out)?;

    println!(
        "{trades} trades x {} chains: {with_rule:.3}s with bookkeeping, {bare_seconds:.3}s bare, ratio {ratio:.2}",
        cfg.sample_size
    );
    Ok(())
}

fn validation_header() -> String {
    "top,bottom,cardinality,reps,mean_trades,fraction_random,fraction_covered,fraction_uniform\n"
        .to_string()
}

fn validation_row(row: &ValidationSummary) -> String {
    let join = |s: &[usize]| {
        s.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "{},{},{},{},{},{},{},{}\n",
        csv_quote(&join(&row.pair.top)),
        csv_quote(&join(&row.pair.bottom)),
        row.cardinality,
        row.reps,
        row.mean_trades,
        row.fraction_random,
        row.fraction_covered,
        row.fraction_uniform,
    )
}

/// One edge-list section per sampled network, `# network <k>` delimited.
fn write_archive(
    path: &Path,
    networks: &[BipartiteNetwork],
    dataset: &NamedDataset,
) -> Result<()> {
    let mut text = String::new();
    for (k, network) in networks.iter().enumerate() {
        text.push_str(&format!("# network {k}\n"));
        text.push_str(&format_edgelist(
            network,
            dataset.top_labels.as_deref(),
            dataset.bottom_labels.as_deref(),
        ));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn write_ks_trace(path: &Path, trace: &[(u64, KsResult)]) -> Result<()> {
    let mut text = String::from("t,ks_statistic,p_value\n");
    for (t, ks) in trace {
        text.push_str(&format!("{t},{},{}\n", ks.statistic, ks.p_value));
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Long format, one row per (checkpoint, ensemble member) distance.
fn write_distances(path: &Path, profiles: &[DistanceProfile]) -> Result<()> {
    let mut text = String::from("t,distance\n");
    for profile in profiles {
        for value in profile.values() {
            text.push_str(&format!("{},{}\n", profile.t, value.value()));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
