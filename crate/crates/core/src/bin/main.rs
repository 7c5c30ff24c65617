use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dualprecode::cli::{self, CliError, ScenarioConfig};

/// BD / BDS precoding experiments for dual-polarized massive MIMO.
///
/// Set DUALPRECODE_THREADS to limit the worker threads.
#[derive(Parser)]
#[command(name = "dualprecode", version)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a config file and write CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a built-in experiment.
    Preset {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Print the preset's config text instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// List built-in experiments.
    ListPresets,
}

#[derive(clap::Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output file (appended to if it already has the same header); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DUALPRECODE_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("DUALPRECODE_THREADS: expected a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("DUALPRECODE_THREADS: {e}")))
}

fn execute(mut cfg: ScenarioConfig, o: Overrides) -> Result<(), CliError> {
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(t) = o.trials {
        cfg.n_trials = t;
    }
    cfg.validate()?;
    let mut sink = match &o.out {
        Some(p) => cli::file_sink(p)?,
        None => cli::stdout_sink()?,
    };
    cli::run_to_sink(&cfg, &mut sink)
}

fn main_inner(args: Args) -> Result<(), CliError> {
    init_threads()?;
    match args.cmd {
        Cmd::Run { config, overrides } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", config.display())))?;
            execute(ScenarioConfig::parse(&text)?, overrides)
        }
        Cmd::Preset { name, overrides, print_config } => {
            if print_config {
                print!("{}", cli::preset_text(&name)?);
                return Ok(());
            }
            execute(cli::preset(&name)?, overrides)
        }
        Cmd::ListPresets => {
            for (name, about, _) in cli::PRESETS {
                println!("{name:<6} {about}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dualprecode: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
