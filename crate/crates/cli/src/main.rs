use std::path::PathBuf;
use std::process::ExitCode;

use ajja::{configure_threads, execute, Request, RunError};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Subcommand {
    Spectrum,
    Wavefunction,
    Splitting,
    CouplingSweep,
    Gate,
    TwoQubit,
    Ramp,
    Readout,
    Loss,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

/// Spectra, gates, readout and loss of the three-mode atomic flux qubit.
#[derive(Debug, Parser)]
#[command(name = "ajja", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Subcommand,
    /// Flat TOML config; see config-schema.txt.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Target gate for `gate` and `two-qubit`.
    #[arg(long)]
    target: Option<String>,
    /// Pulse count for `gate` and `two-qubit`.
    #[arg(long)]
    pulses: Option<i64>,
}

fn name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("named variant")
        .get_name()
        .to_string()
}

fn fail(e: RunError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(RunError::Usage(e.render().to_string().trim().to_string())),
    };
    if let Err(e) = configure_threads() {
        return fail(e);
    }
    let request = Request {
        subcommand: name(cli.subcommand),
        config: cli.config,
        sets: cli.sets,
        out: cli.out,
        seed: cli.seed,
        format: cli.format.map(name),
        target: cli.target,
        pulses: cli.pulses,
    };
    match execute(&request) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
