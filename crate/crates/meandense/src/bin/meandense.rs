use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use meandense::{parse_config, run, CliError, Command, RayonExecutor};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Exact,
    Estimate,
    Study,
    Minkowski,
    Simulate,
    Oracle,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Exact => Command::Exact,
            Sub::Estimate => Command::Estimate,
            Sub::Study => Command::Study,
            Sub::Minkowski => Command::Minkowski,
            Sub::Simulate => Command::Simulate,
            Sub::Oracle => Command::Oracle,
        }
    }
}

/// Mean densities of inhomogeneous Boolean models with lower-dimensional grains.
#[derive(Debug, Parser)]
#[command(name = "meandense", version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// Scenario config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 or unset uses every core.
    #[arg(long, env = "MEANDENSE_THREADS")]
    threads: Option<usize>,
    /// Output directory; overrides the config `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| CliError::io(&cli.config, e))?;
    let cfg = parse_config(&text)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(meandense::run::DEFAULT_SEED);
    let out = cli.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let exec = RayonExecutor::new(cli.threads.unwrap_or(0))
        .map_err(|e| CliError::Usage(format!("cannot start the thread pool: {e}")))?;
    let summary = run(cli.command.into(), &cfg, seed, &out, &exec)?;
    for f in &summary.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""));
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
