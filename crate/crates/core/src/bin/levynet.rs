use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use levynet::construct::Mode;
use levynet::experiments::{run, Command, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "levynet", version, about = "ReLU network approximations of option prices in exponential Levy models")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; falls back to LEVYNET_THREADS, then to 1.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<CliMode>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Reference prices from the Fourier, closed-form or Monte Carlo oracle.
    Price,
    /// Build one averaging network and measure its sup error.
    Construct,
    /// Sup error against the sample count.
    RateStudy,
    /// Network size at fixed error across dimensions.
    DimSweep,
    /// Chebyshev interpolation, its ReLU emulation and Gevrey bounds.
    Spectral,
    /// Sparse Taylor expansion in log coordinates.
    Chaos,
    /// Barron norms and two-layer fits.
    Barron,
    /// Nonparametric calibration to call prices.
    Calib,
}

#[derive(ValueEnum, Clone, Copy)]
enum CliMode {
    Paper,
    Practical,
}

fn threads(flag: Option<usize>) -> Result<usize, String> {
    if let Some(t) = flag {
        return if t == 0 { Err("--threads must be at least 1".into()) } else { Ok(t) };
    }
    match std::env::var("LEVYNET_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(t),
            _ => Err(format!("LEVYNET_THREADS={v:?} is not a positive integer")),
        },
        Err(_) => Ok(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Price => Command::Price,
        Sub::Construct => Command::Construct,
        Sub::RateStudy => Command::RateStudy,
        Sub::DimSweep => Command::DimSweep,
        Sub::Spectral => Command::Spectral,
        Sub::Chaos => Command::Chaos,
        Sub::Barron => Command::Barron,
        Sub::Calib => Command::Calib,
    };
    let threads = match threads(cli.threads) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    let opts = RunOptions {
        seed: cli.seed,
        out: cli.out,
        threads,
        mode: cli.mode.map(|m| match m {
            CliMode::Paper => Mode::Paper,
            CliMode::Practical => Mode::Practical,
        }),
    };
    match run(command, &cfg, &opts) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
