use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use landau_cli::{load_config, run_command, CliError, Command, Paths, Suite};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Coeffs,
    Evolve,
    Ladder,
    Verify,
    Report,
}

#[derive(Debug, Parser)]
#[command(name = "landau", version, about = "Linearized Landau operator: coefficients, evolution, derivative ladders and estimate verification")]
struct Args {
    #[arg(value_enum)]
    cmd: Cmd,
    /// Run configuration (TOML, dotted keys).
    #[arg(long)]
    config: PathBuf,
    /// Restrict `verify` to one suite (repeatable).
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Output directory; overrides `io.out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let suites = args
        .suites
        .iter()
        .map(|s| {
            Suite::parse(s).ok_or_else(|| {
                CliError::Config(landau_cli::ConfigError::Invalid(format!(
                    "unknown suite {s:?} (expected one of kernel, coefficients, coercivity, bilinear, energy, smoothing)"
                )))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cmd = match args.cmd {
        Cmd::Coeffs => Command::Coeffs,
        Cmd::Evolve => Command::Evolve,
        Cmd::Ladder => Command::Ladder,
        Cmd::Verify => Command::Verify,
        Cmd::Report => Command::Report,
    };
    let paths = Paths::resolve(&cfg, args.out.as_deref());
    run_command(cmd, &cfg, &paths, (!suites.is_empty()).then_some(suites.as_slice()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
