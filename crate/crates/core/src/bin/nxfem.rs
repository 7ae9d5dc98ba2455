use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;

use nxfem::study::{exit_code, run_study, StudyConfig};
use nxfem::{Error, Result};

/// Convergence studies for two-phase Stokes interface problems.
#[derive(Parser, Debug)]
#[command(name = "nxfem", version)]
struct Cli {
    /// example1, example2 or patch.
    #[arg(long)]
    example: Option<String>,
    /// Comma-separated subdivisions per side of [-1,1]^2.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu2: Option<String>,
    /// Comma-separated outer viscosities, or `default`.
    #[arg(long, num_args = 0..=1, default_missing_value = "default")]
    sweep_mu1: Option<String>,
    /// Subdivisions used by the sweep.
    #[arg(long)]
    sweep_n: Option<String>,
    /// Interface center displacement `dx,dy`.
    #[arg(long, allow_hyphen_values = true)]
    center_offset: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    let mut config = StudyConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        config.apply_file(&text)?;
    }
    let flags = [
        ("example", &cli.example),
        ("n-list", &cli.n_list),
        ("gamma0", &cli.gamma0),
        ("gamma1", &cli.gamma1),
        ("gamma2", &cli.gamma2),
        ("mu1", &cli.mu1),
        ("mu2", &cli.mu2),
        ("sweep-mu1", &cli.sweep_mu1),
        ("sweep-n", &cli.sweep_n),
        ("center-offset", &cli.center_offset),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config.set(key, v)?;
        }
    }
    if let Some(out) = cli.out {
        config.out = Some(out);
    }

    let output = run_study(&config)?;
    print!("{}", output.table());
    if let Some(path) = &config.out {
        std::fs::write(path, output.csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(3);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
