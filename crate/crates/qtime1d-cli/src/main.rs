//! Command-line surface over the characteristic-times library: scattering
//! amplitude sweeps, stationary time quantities, wave-packet passage records,
//! survival curves, source transients, the w-function self-test and the
//! bundled figure recipes.

mod commands;
mod emit;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "qtime1d", version, about = "Characteristic times of 1D quantum collisions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for emit::Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => emit::Format::Csv,
            FormatArg::Json => emit::Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TimesQuantity {
    Dwell,
    Phase,
    Delay,
    Qmatrix,
    Bounds,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AmpChoice {
    Gauss,
    Suppressed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering amplitudes and unwrapped transmission phase over a
    /// momentum sweep.
    Amplitudes {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        pmin: f64,
        #[arg(long)]
        pmax: f64,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Stationary time quantities keyed by momentum or energy.
    Times {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, value_enum)]
        quantity: TimesQuantity,
        #[arg(long)]
        pmin: Option<f64>,
        #[arg(long)]
        pmax: Option<f64>,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: Option<f64>,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Dwell interval start (defaults to the support edge).
        #[arg(long)]
        a: Option<f64>,
        /// Dwell interval end (defaults to the support edge).
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Edge fluxes and interval probability of a Gaussian packet collision.
    Packet {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        xc: f64,
        #[arg(long)]
        pc: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Average passage instants with dual-route residuals, as JSON.
    PacketTimes {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        xc: f64,
        #[arg(long)]
        pc: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Long-time log-log slope of the free density at a fixed point.
    DecaySlope {
        #[arg(long, value_enum)]
        amp: AmpChoice,
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
        #[arg(long, default_value_t = -10.0)]
        x0: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 1.0)]
        tmin: f64,
        #[arg(long, default_value_t = 1e4)]
        tmax: f64,
        #[arg(long, default_value_t = 61)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Survival amplitude of a pole expansion with the quadrature residual.
    Survival {
        #[arg(long)]
        poles: PathBuf,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Sharp-onset source field, its saddle/front split and their ratio.
    Source {
        #[arg(long)]
        omega0: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
    /// Characteristic transient scales of the sharp-onset source, as JSON.
    SourceScales {
        #[arg(long)]
        omega0: f64,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Max residuals of the w-function identities, as JSON.
    FaddeevaSelftest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bundled figure recipes with canonical parameters.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<FormatArg>,
    },
}

fn main() {
    if let Ok(threads) = std::env::var("QTIME1D_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
            }
            _ => {
                eprintln!("QTIME1D_THREADS must be a positive integer, got {threads:?}");
                std::process::exit(2);
            }
        }
    }
    let cli = Cli::parse();
    if let Err(e) = commands::run(cli.command) {
        eprintln!("{e}");
        std::process::exit(2);
    }
}
