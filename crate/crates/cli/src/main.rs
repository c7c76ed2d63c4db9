mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] nodal_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "nodal-shoot", version, about = "Sign-changing radial solutions by shooting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Boundary solution with exactly `n` interior zeros.
    Solve {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Zero-count map over a geometric grid of slopes.
    Scan {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        a_min: Option<f64>,
        #[arg(long)]
        a_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Closed-form solution of the linear problem.
    Oracle {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1e-3)]
        t_min: f64,
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Checks a profile CSV against every trajectory-level property.
    Verify {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Require extrema above gamma (valid once R > R0 is known).
        #[arg(long)]
        r_above_r0: bool,
        /// Evaluate the zero-to-extremum identity even above gamma.
        #[arg(long)]
        force_pohozaev: bool,
        /// Directory for `report.json`; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Outward integration from u(R) = 0 for a grid of slopes.
    Nonexist {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        b_min: Option<f64>,
        #[arg(long)]
        b_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        r_far: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn configure_threads() -> CliResult<()> {
    let n = match std::env::var("NODAL_SHOOT_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("NODAL_SHOOT_THREADS must be a non-negative integer, got `{s}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Solve { n, config, out } => commands::solve(n, config.as_deref(), &out),
        Command::Scan {
            config,
            a_min,
            a_max,
            points,
            out,
        } => commands::scan(config.as_deref(), a_min, a_max, points, &out),
        Command::Oracle {
            delta,
            t_min,
            t_max,
            points,
            out,
        } => commands::oracle(delta, t_min, t_max, points, &out),
        Command::Verify {
            profile,
            config,
            r_above_r0,
            force_pohozaev,
            out,
        } => commands::verify(&profile, config.as_deref(), r_above_r0, force_pohozaev, out.as_deref()),
        Command::Nonexist {
            config,
            b_min,
            b_max,
            points,
            r_far,
            out,
        } => commands::nonexist(config.as_deref(), b_min, b_max, points, r_far, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
