//! `tsarules` command-line front end.

mod commands;
mod config;
mod rundir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "tsarules",
    version,
    about = "ELM training, ant-colony rule extraction and evaluation for transient stability assessment",
    after_help = "Exit codes: 0 success, 2 configuration error, 1 runtime error.\n\
                  Module seeds are derived as seed + FNV-1a(subcommand tag), tags: gen, train, extract, eval, sweep."
)]
struct Cli {
    /// Global seed; overrides the config file's `seed` key [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for folds, sweep cells and scenarios
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Parent directory of the timestamped run directories
    #[arg(long, global = true, default_value = "runs")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate fault scenarios and write a labeled feature dataset
    Gen(GenArgs),
    /// Train an ELM on a dataset
    Train(TrainArgs),
    /// Extract a rule list from a trained ELM
    Extract(ExtractArgs),
    /// Cross-validate a pipeline and write metrics, ROC and table
    Eval(EvalArgs),
    /// Cross-validated accuracy over a (rho, n_ants) grid
    Sweep(SweepArgs),
    /// Generate, train, extract and evaluate in one run directory
    Pipeline(PipelineArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// JSON config, or a bare network fixture file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write the dataset CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV (config key `data`)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Hidden nodes L (config key `elm.hidden_nodes`)
    #[arg(long = "hidden-nodes", short = 'L')]
    hidden_nodes: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model JSON written by `train` (config key `model`)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dataset CSV the model was trained on (config key `data`)
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV (config key `data`)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Number of folds (config key `k`)
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV (config key `data`)
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use this dataset instead of generating one (config key `data`)
    #[arg(long)]
    data: Option<PathBuf>,
}

pub struct Globals {
    seed: Option<u64>,
    out_dir: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(tsarules::Error),
    Io(std::io::Error),
}

impl From<tsarules::Error> for CliError {
    fn from(e: tsarules::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(tsarules::Error::InvalidConfig(_) | tsarules::Error::BadFoldSpec(_)) => 2,
            _ => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("config error: {m}"),
            CliError::Core(e) => format!("{}: {e}", e.name()),
            CliError::Io(e) => format!("Io: {e}"),
        }
    }
}

fn command() -> clap::Command {
    use config::*;
    Cli::command()
        .mut_subcommand("gen", |c| c.after_help(defaults_help::<GenConfig>()))
        .mut_subcommand("train", |c| c.after_help(defaults_help::<TrainConfig>()))
        .mut_subcommand("extract", |c| c.after_help(defaults_help::<ExtractConfig>()))
        .mut_subcommand("eval", |c| c.after_help(defaults_help::<EvalConfig>()))
        .mut_subcommand("sweep", |c| c.after_help(defaults_help::<SweepConfig>()))
        .mut_subcommand("pipeline", |c| c.after_help(defaults_help::<PipelineConfig>()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Config("--jobs must be >= 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let g = Globals {
        seed: cli.seed,
        out_dir: cli.out_dir,
    };
    match &cli.command {
        Command::Gen(a) => commands::gen(&g, a),
        Command::Train(a) => commands::train(&g, a),
        Command::Extract(a) => commands::extract_cmd(&g, a),
        Command::Eval(a) => commands::eval(&g, a),
        Command::Sweep(a) => commands::sweep(&g, a),
        Command::Pipeline(a) => commands::pipeline(&g, a),
    }
}

fn main() -> ExitCode {
    let matches = match command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
