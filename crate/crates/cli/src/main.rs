use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcomb_cli::{exit, load_config, run, Command, Format, Overrides};

/// Frequency-comb PSD, oracle and quantum-state tool.
///
/// Exit codes: 0 success, 1 I/O error, 2 invalid configuration or arguments,
/// 3 oracle gate failure.
#[derive(Parser)]
#[command(name = "qcomb", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo draws (overrides oracle.n_samples).
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Restrict output to these formats; repeatable.
    #[arg(long, global = true, value_enum)]
    format: Vec<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Analytic power spectral density and peak table.
    Psd,
    /// Monte Carlo ensemble estimate scored against the closed form.
    Oracle,
    /// Single-photon and coherent-state diagnostics (needs alpha_sq).
    State,
    /// Worked-example spectrum with its envelope.
    Fig1,
    /// Mutual coherence function and coherence time.
    Coherence,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Psd => Command::Psd,
            Cmd::Oracle => Command::Oracle,
            Cmd::State => Command::State,
            Cmd::Fig1 => Command::Fig1,
            Cmd::Coherence => Command::Coherence,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = Command::from(cli.command);
    let overrides = Overrides {
        out: cli.out,
        seed: cli.seed,
        samples: cli.samples,
        formats: cli.format,
    };
    let result = load_config(cmd, cli.config.as_deref()).and_then(|cfg| run(cmd, &cfg, &overrides));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::from(exit::SUCCESS)
        }
        Err(e) => {
            eprintln!("qcomb: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
