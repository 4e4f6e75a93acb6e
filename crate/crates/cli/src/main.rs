//! `mpmab`: generate instances, run and sweep regret experiments, plot results.

mod settings;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mpmab_core::harness::emit::{to_csv, to_json};
use mpmab_core::harness::{read_csv_series, render_svg, OutputFormat, Series};
use mpmab_core::{
    run_replicated, run_sweep, Algorithm, Error, ExperimentConfig, ExperimentResult, InstanceSource, PolicySpec,
    Result, SweepConfig,
};

use settings::Layered;

const DEFAULT_EPS: f64 = 0.15;
const DEFAULT_PLAYERS: usize = 20;
const DEFAULT_ARMS: usize = 10;
const DEFAULT_SUBPAR: usize = 8;
const DEFAULT_HORIZON: u64 = 100_000;
const DEFAULT_REPS: usize = 30;

#[derive(Parser)]
#[command(name = "mpmab", version, about = "Multi-player bandit regret experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Generate(GenerateArgs),
    /// Run one replicated experiment.
    Run(RunArgs),
    /// Run every algorithm over lists of player and subpar-arm counts.
    Sweep(SweepArgs),
    /// Render a results CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Shape {
    /// Number of players M.
    #[arg(long)]
    players: Option<usize>,
    /// Number of arms K.
    #[arg(long)]
    arms: Option<usize>,
    /// Number of subpar arms in generated instances.
    #[arg(long)]
    subpar: Option<usize>,
    /// Dissimilarity of generated instances, also given to eps-aware algorithms.
    #[arg(long)]
    eps: Option<f64>,
    /// Base seed; `MPMAB_SEED` takes precedence.
    #[arg(long)]
    seed: Option<u64>,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    shape: Shape,
    /// Output path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Experiment {
    /// Rounds per episode.
    #[arg(long)]
    horizon: Option<u64>,
    /// Replications (fresh generated instance each).
    #[arg(long)]
    reps: Option<usize>,
    /// UCB-1 bonus constant for ind-ucb.
    #[arg(long)]
    ucb_bonus: Option<f64>,
    /// csv, json or svg.
    #[arg(long)]
    format: Option<String>,
    /// Output path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// robustagg, robustagg-adapted, naive-agg, ind-ucb or robustagg-agnostic.
    #[arg(long)]
    algo: Option<String>,
    #[command(flatten)]
    shape: Shape,
    #[command(flatten)]
    experiment: Experiment,
    /// Instance JSON file shared by all replications.
    #[arg(long, value_name = "FILE", conflicts_with = "example1")]
    instance: Option<PathBuf>,
    /// Two-arm instance with this gap, shared by all replications.
    #[arg(long, value_name = "DELTA")]
    example1: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated algorithm presets.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<String>,
    /// Comma-separated player counts.
    #[arg(long, value_delimiter = ',')]
    players: Vec<usize>,
    #[arg(long)]
    arms: Option<usize>,
    /// Comma-separated subpar-arm counts; all of 0..K if omitted.
    #[arg(long, value_delimiter = ',')]
    subpar: Vec<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    experiment: Experiment,
}

#[derive(Args)]
struct PlotArgs {
    /// Results CSV written by `run` or `sweep`.
    input: PathBuf,
    /// Output SVG path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

const SHAPE_KEYS: [&str; 5] = ["players", "arms", "subpar", "eps", "seed"];
const EXPERIMENT_KEYS: [&str; 5] = ["horizon", "reps", "ucb-bonus", "format", "out"];

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let layered = Layered::load(args.shape.config.as_deref(), &keys(&[&SHAPE_KEYS, &["out"]]))?;
    let shape = &args.shape;
    let source = InstanceSource::Generated {
        num_players: layered.or("players", shape.players, DEFAULT_PLAYERS)?,
        num_arms: layered.or("arms", shape.arms, DEFAULT_ARMS)?,
        num_subpar: layered.or("subpar", shape.subpar, DEFAULT_SUBPAR)?,
        eps: layered.or("eps", shape.eps, DEFAULT_EPS)?,
    };
    let instance = source.instance_for(layered.seed(shape.seed)?)?;
    let out = layered.get("out", args.out)?;
    write_output(out.as_deref(), &(instance.to_json_string() + "\n"))
}

struct Output {
    format: OutputFormat,
    out: Option<PathBuf>,
}

/// Resolved experiment flags shared by `run` and `sweep`.
struct ExperimentSettings {
    horizon: u64,
    reps: usize,
    ucb_bonus: Option<f64>,
    output: Output,
}

fn experiment_settings(layered: &Layered, args: Experiment) -> Result<ExperimentSettings> {
    Ok(ExperimentSettings {
        horizon: layered.or("horizon", args.horizon, DEFAULT_HORIZON)?,
        reps: layered.or("reps", args.reps, DEFAULT_REPS)?,
        ucb_bonus: layered.get("ucb-bonus", args.ucb_bonus)?,
        output: Output {
            format: layered.or("format", args.format, "csv".to_string())?.parse()?,
            out: layered.get("out", args.out)?,
        },
    })
}

fn policy(algo: &str, eps: f64, ucb_bonus: Option<f64>) -> Result<PolicySpec> {
    let mut spec = PolicySpec::new(algo.parse::<Algorithm>()?, eps);
    if let Some(bonus) = ucb_bonus {
        spec.ucb_bonus = bonus;
    }
    Ok(spec)
}

fn emit(results: &[ExperimentResult], output: &Output) -> Result<()> {
    for result in results {
        let last = result.aggregate.mean.len().saturating_sub(1);
        eprintln!(
            "{}: final regret {:.1} +/- {:.1}",
            Series::from_result(result).label,
            result.mean_final_regret(),
            result.aggregate.stderr.get(last).copied().unwrap_or(0.0),
        );
    }
    let text = match output.format {
        OutputFormat::Csv => to_csv(results),
        OutputFormat::Json => to_json(results),
        OutputFormat::Svg => render_svg(&results.iter().map(Series::from_result).collect::<Vec<_>>()),
    };
    write_output(output.out.as_deref(), &text)
}

fn run(args: RunArgs) -> Result<()> {
    let allowed = keys(&[&SHAPE_KEYS, &EXPERIMENT_KEYS, &["algo", "instance", "example1"]]);
    let layered = Layered::load(args.shape.config.as_deref(), &allowed)?;
    let shape = &args.shape;
    let eps = layered.or("eps", shape.eps, DEFAULT_EPS)?;
    let instance_file: Option<PathBuf> = layered.get("instance", args.instance)?;
    let example1: Option<f64> = layered.get("example1", args.example1)?;
    let instance = match (instance_file, example1) {
        (Some(_), Some(_)) => return Err(Error::Argument("--instance and --example1 are exclusive".into())),
        (Some(path), None) => InstanceSource::File { path },
        (None, Some(delta)) => InstanceSource::Example1 {
            num_players: layered.or("players", shape.players, DEFAULT_PLAYERS)?,
            delta,
        },
        (None, None) => InstanceSource::Generated {
            num_players: layered.or("players", shape.players, DEFAULT_PLAYERS)?,
            num_arms: layered.or("arms", shape.arms, DEFAULT_ARMS)?,
            num_subpar: layered.or("subpar", shape.subpar, DEFAULT_SUBPAR)?,
            eps,
        },
    };
    let algo = layered.or("algo", args.algo, Algorithm::RobustAggAdapted.to_string())?;
    let settings = experiment_settings(&layered, args.experiment)?;
    let config = ExperimentConfig {
        horizon: settings.horizon,
        policy: policy(&algo, eps, settings.ucb_bonus)?,
        instance,
        num_replications: settings.reps,
        base_seed: layered.seed(shape.seed)?,
        eps,
    };
    emit(&[run_replicated(&config)?], &settings.output)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let allowed = keys(&[&SHAPE_KEYS, &EXPERIMENT_KEYS, &["algo"]]);
    let layered = Layered::load(args.config.as_deref(), &allowed)?;
    let eps = layered.or("eps", args.eps, DEFAULT_EPS)?;
    let num_arms = layered.or("arms", args.arms, DEFAULT_ARMS)?;
    let default_algos = [Algorithm::RobustAggAdapted, Algorithm::IndUcb, Algorithm::NaiveAgg]
        .map(|a| a.to_string())
        .to_vec();
    let algos = layered.list("algo", args.algo, default_algos)?;
    let settings = experiment_settings(&layered, args.experiment)?;
    let sweep = SweepConfig {
        algorithms: algos
            .iter()
            .map(|a| policy(a, eps, settings.ucb_bonus))
            .collect::<Result<_>>()?,
        num_players: layered.list("players", args.players, vec![DEFAULT_PLAYERS])?,
        num_arms,
        num_subpar: layered.list("subpar", args.subpar, (0..num_arms).collect())?,
        eps,
        horizon: settings.horizon,
        num_replications: settings.reps,
        base_seed: layered.seed(args.seed)?,
    };
    emit(&run_sweep(&sweep)?, &settings.output)
}

fn plot(args: PlotArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).map_err(|e| Error::Io {
        path: args.input.clone(),
        source: e,
    })?;
    let series = read_csv_series(&text).map_err(|e| match e {
        Error::Format { message, .. } => Error::Format {
            path: args.input.clone(),
            message,
        },
        other => other,
    })?;
    write_output(args.out.as_deref(), &render_svg(&series))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Usage errors exit 2, help and version exit 0.
        Err(e) => e.exit(),
    };
    let outcome = match cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Plot(args) => plot(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Argument(_)) => {
            eprintln!("error: {e}");
            eprintln!("run `mpmab --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
