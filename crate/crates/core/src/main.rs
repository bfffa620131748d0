use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qbzzb::cli::{self, Command, H0Choice, OutputFormat, RatioGrid, RunConfig};

#[derive(Parser)]
#[command(name = "qbzzb", version, about = "Quantum Bell-Ziv-Zakai error bounds and Heisenberg limits")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// Relative tolerance for numerical quadrature.
    #[arg(long, global = true, default_value_t = 1e-8)]
    rel_tol: f64,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the cosine-bound constants phi and lambda.
    Lambda,
    /// Bound on uᵀΣu for a prior, probe spectrum and direction.
    Bound {
        /// Prior file (.json or row-major .csv covariance).
        #[arg(long)]
        prior: PathBuf,
        /// Probe spectrum JSON.
        #[arg(long)]
        spectrum: PathBuf,
        /// Direction u as a comma-separated list.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        u: Vec<f64>,
        /// Offset H0, or `median`.
        #[arg(long, default_value = "median")]
        h0: H0Choice,
    },
    /// Tabulate Z against tau0/tau_F.
    Scan {
        /// Geometric grid start:stop:count.
        #[arg(long, default_value = "1e-3:1e3:25")]
        ratios: RatioGrid,
    },
    /// Time-resolved Heisenberg limits for an Ornstein-Uhlenbeck prior.
    Waveform {
        /// Flux CSV with columns t,flux.
        #[arg(long)]
        flux: PathBuf,
        /// OU variance sigma0.
        #[arg(long)]
        sigma0_var: f64,
        /// OU correlation time T0.
        #[arg(long)]
        t_corr: f64,
    },
    /// Check computed bounds against brute-force oracles.
    Verify {
        #[arg(long, default_value = "default")]
        suite: String,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Lambda => Command::Lambda,
        Cmd::Bound {
            prior,
            spectrum,
            u,
            h0,
        } => Command::Bound {
            prior,
            spectrum,
            u,
            h0,
        },
        Cmd::Scan { ratios } => Command::Scan { ratios },
        Cmd::Waveform {
            flux,
            sigma0_var,
            t_corr,
        } => Command::Waveform {
            flux,
            sigma0_var,
            t_corr,
        },
        Cmd::Verify { suite } => Command::Verify { suite },
    };
    let config = RunConfig {
        command,
        rel_tol: args.rel_tol,
        format: match args.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        out: args.out,
    };
    match cli::run(&config) {
        Ok(code) => {
            if code == cli::EXIT_VERIFY {
                eprintln!("error: verification failed");
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
