mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ConfigArgs, RunConfig};
use crate::error::{exit, CliError};
use crate::manifest::Manifest;

/// Weighted reduced-order models for the stochastic thermal block.
#[derive(Debug, Parser)]
#[command(name = "wrom", version)]
struct Cli {
    /// Worker threads (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weighted POD on a training set; writes model.json.
    OfflinePod(ConfigArgs),
    /// Weighted greedy over a node pool; writes model.json.
    OfflineGreedy(ConfigArgs),
    /// Monte-Carlo mean-square error curve of a stored model.
    Evaluate(ConfigArgs),
    /// Sample mean of the reduced solution and of its output.
    Expectation(ConfigArgs),
    /// Reduced solve at one parameter point.
    Solve(ConfigArgs),
    /// Nodes and weights of a tensor or Smolyak rule.
    QuadratureDump(ConfigArgs),
    /// Error curves behind one figure (fig3 … fig11).
    Reproduce {
        figure: String,
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let threads = rayon::current_num_threads();
    let (name, config) = match cli.command {
        Command::OfflinePod(a) => ("offline-pod", RunConfig::resolve(&a)?),
        Command::OfflineGreedy(a) => ("offline-greedy", RunConfig::resolve(&a)?),
        Command::Evaluate(a) => ("evaluate", RunConfig::resolve(&a)?),
        Command::Expectation(a) => ("expectation", RunConfig::resolve(&a)?),
        Command::Solve(a) => ("solve", RunConfig::resolve(&a)?),
        Command::QuadratureDump(a) => {
            let c = RunConfig::resolve(&a)?;
            if c.out.is_none() {
                commands::dump_rule(&c, std::io::stdout().lock())?;
                return Ok(());
            }
            ("quadrature-dump", c)
        }
        Command::Reproduce { figure, args } => {
            let mut c = RunConfig::resolve(&args)?;
            c.figure = Some(figure.parse()?);
            ("reproduce", c)
        }
        Command::Replay { manifest, out } => {
            let m = Manifest::read(&manifest)?;
            let mut c = m.config;
            if out.is_some() {
                c.out = out;
            }
            commands::execute(&m.command, c, threads)?;
            return Ok(());
        }
    };
    commands::execute(name, config, threads)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error class={} message={msg:?}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
