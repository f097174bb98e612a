use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qkd_budget::cli::{parse_config, run_compare, run_evaluate, run_sweep, SweepScale, SweepSpec, SweepVariable};
use qkd_budget::montecarlo::{simulate, simulate_with_workers};
use qkd_budget::system::PhotonMode;
use qkd_budget::{ModelError, SystemConfig};

#[derive(Parser)]
#[command(name = "qkd-budget", version, about = "Key-generation budget of a QKD link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lumped,
    Exact,
}

#[derive(clap::Args)]
struct Common {
    /// JSON link configuration
    #[arg(long)]
    config: PathBuf,
    /// Photon statistics; overrides engine.mode
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Event-tree metrics for one configuration
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Append the leaf list after the report
        #[arg(long)]
        dump_tree: bool,
    },
    /// CSV of metrics over a parameter range
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        var: SweepVariable,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        #[arg(long)]
        steps: usize,
        /// Logarithmic spacing
        #[arg(long)]
        log: bool,
    },
    /// Monte Carlo run
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pulses: u64,
        #[arg(long)]
        seed: u64,
        /// Worker threads (the result does not depend on it)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Analytic engine against Monte Carlo
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pulses: u64,
        #[arg(long)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config { .. } | ModelError::Parse { .. } => Failure::Usage(e.to_string()),
            ModelError::Domain(_) | ModelError::NoSiftedKey => Failure::Numerical(e.to_string()),
        }
    }
}

fn load(common: &Common) -> Result<SystemConfig, Failure> {
    let text = fs::read_to_string(&common.config)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", common.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(mode) = common.mode {
        config.engine.mode = match mode {
            Mode::Lumped => PhotonMode::Lumped,
            Mode::Exact => PhotonMode::Exact,
        };
    }
    Ok(config)
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Evaluate { common, dump_tree } => {
            let config = load(&common)?;
            let (report, tree) = run_evaluate(&config)?;
            let mut text = report.to_json();
            text.push('\n');
            if dump_tree {
                text.push_str(&tree.dump());
            }
            emit(&common, &text)
        }
        Command::Sweep { common, var, start, stop, steps, log } => {
            let config = load(&common)?;
            let scale = if log { SweepScale::Logarithmic } else { SweepScale::Linear };
            let spec = SweepSpec::new(var, start, stop, steps, scale)?;
            emit(&common, &run_sweep(&config, &spec)?)
        }
        Command::Simulate { common, pulses, seed, workers } => {
            let config = load(&common)?;
            let result = match workers {
                Some(w) => simulate_with_workers(&config, pulses, seed, w)?,
                None => simulate(&config, pulses, seed)?,
            };
            emit(&common, &(serde_json::to_string_pretty(&result).expect("result serializes") + "\n"))
        }
        Command::Compare { common, pulses, seed } => {
            let config = load(&common)?;
            emit(&common, &(run_compare(&config, pulses, seed)?.to_json() + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
