//! `tabletitle`: generate natural-language titles for HTML web tables.

mod commands;
mod config;
mod error;

use clap::Parser;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "tabletitle",
    version = config::VERSION,
    about = "Generates natural-language titles for HTML web tables",
    propagate_version = true
)]
struct Cli {
    /// Config file with `key = value` lines; command-line flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Increase log verbosity (-v debug, -vv trace); logs go to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Extract one record per table from HTML pages.
    Extract(commands::extract::ExtractArgs),
    /// Prepare extracted records for training.
    #[command(subcommand)]
    Dataset(commands::dataset::DatasetCommand),
    /// Train a model and save a checkpoint.
    Train(commands::train::TrainArgs),
    /// Decode titles with a trained checkpoint.
    Generate(commands::generate::GenerateArgs),
    /// Score prediction files against references.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Run extract, dataset, train, generate and evaluate end to end.
    Pipeline(commands::pipeline::PipelineArgs),
}

fn main() {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    if let Err(e) = run(&cli) {
        eprintln!("error[{}]: {e}", e.name());
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> error::Result<()> {
    let cfg = config::ConfigFile::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Extract(args) => commands::extract::run(args, &cfg),
        Command::Dataset(cmd) => commands::dataset::run(cmd, &cfg),
        Command::Train(args) => commands::train::run(args, &cfg),
        Command::Generate(args) => commands::generate::run(args, &cfg),
        Command::Evaluate(args) => commands::evaluate::run(args, &cfg),
        Command::Pipeline(args) => commands::pipeline::run(args, &cfg),
    }
}

fn init_logging(verbosity: u8) {
    let level = match verbosity {
        0 => log::LevelFilter::Info,
        1 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .parse_default_env()
        .init();
}
