mod cli;
mod commands;
mod error;
mod output;

use clap::Parser;
use cli::{Cli, Command, FileConfig};
use commands::Context;
use error::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    let mut file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let workers = cli.workers.or(file.workers);
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Config("workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let ctx = Context {
        out: cli.out.or(file.out.take()).unwrap_or_else(|| PathBuf::from(".")),
        large: cli.large || file.large.unwrap_or(false),
    };
    match cli.command {
        Command::Scan(a) => commands::scan(&ctx, a.merge(file.scan.unwrap_or_default())),
        Command::Floquet(a) => commands::floquet(&ctx, a.merge(file.floquet.unwrap_or_default())),
        Command::Propagate(a) => commands::propagate(&ctx, a.merge(file.propagate.unwrap_or_default())),
        Command::Contours(a) => commands::contours(&ctx, a.merge(file.contours.unwrap_or_default())),
        Command::DipoleSpectrum(a) => commands::dipole_spectrum(&ctx, a.merge(file.dipole_spectrum.unwrap_or_default())),
        Command::ConvertUnits(a) => commands::convert_units(&ctx, a.merge(file.convert_units.unwrap_or_default())),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
