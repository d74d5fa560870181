use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};
use wigner_mra::cli::{apply_document, run, CliError, RunConfig, Subcommand};

#[derive(Parser)]
#[command(name = "wigner-mra", version, about = "Wavelet evolution and analysis of Wigner functions")]
struct Args {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override one key, e.g. `--set dt=0.001`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Integrate the Moyal equation and write snapshots and diagnostics.
    Evolve,
    /// Solve space-time windows and compare with the method of lines.
    Gdr,
    /// Diagnostics and scale energies of one snapshot CSV.
    Analyze { snapshot: PathBuf },
    /// Check the core invariants on small problems.
    Selftest,
}

fn build_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        apply_document(&mut config, &text)?;
    }
    for item in &args.overrides {
        let (key, value) = item.split_once('=').ok_or_else(|| CliError::Config {
            key: item.clone(),
            line: None,
            message: "--set expects key=value".into(),
        })?;
        config.set(key.trim(), value, None)?;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    config.subcommand = match &args.command {
        Command::Evolve => Subcommand::Evolve,
        Command::Gdr => Subcommand::Gdr,
        Command::Analyze { snapshot } => {
            config.input = Some(snapshot.clone());
            Subcommand::Analyze
        }
        Command::Selftest => Subcommand::Selftest,
    };
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match build_config(&args).and_then(|c| run(&c)) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
