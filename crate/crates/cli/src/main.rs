use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use anyonpt_cli::{run, Experiment, ExperimentConfig, RunError};

/// Environment variable that overrides the configured output directory.
const OUTPUT_ENV: &str = "ANYONPT_OUTPUT";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Runner {
    Spectrum,
    Delocalize,
    Scatter,
    Amplify,
    Lasermap,
}

impl Runner {
    fn experiment(self) -> Experiment {
        match self {
            Runner::Spectrum => Experiment::Spectrum,
            Runner::Delocalize => Experiment::Delocalize,
            Runner::Scatter => Experiment::Scatter,
            Runner::Amplify => Experiment::Amplify,
            Runner::Lasermap => Experiment::Lasermap,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anyonpt", version, about = "Spectra, scattering and amplification of drifting anyonic PT-symmetric potentials")]
struct Cli {
    runner: Runner,
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory; takes precedence over ANYONPT_OUTPUT and the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn execute(cli: &Cli) -> Result<(PathBuf, usize), RunError> {
    let config = ExperimentConfig::from_path(&cli.config)?;
    if config.experiment != cli.runner.experiment() {
        return Err(RunError::config(format!(
            "{} describes a '{}' experiment, not '{}'",
            cli.config.display(),
            config.experiment.name(),
            cli.runner.experiment().name()
        )));
    }
    if cli.jobs == 0 {
        return Err(RunError::config("--jobs must be at least 1"));
    }
    let dir = cli
        .output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("anyonpt-out").join(config.experiment.name()));
    let outputs = run(&config, cli.jobs).map_err(|e| e.context(cli.config.display()))?;
    let written = outputs.write_atomic(&dir)?;
    Ok((dir, written.len()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((dir, count)) => {
            println!("wrote {count} files to {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("anyonpt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
