mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::Axis;
use config::{NamedPhi, PhiConfig, Problem, ProblemConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "lk", version, about = "Lyapunov-Krasovskii functionals for linear single-delay systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file, or builtin:example1 | builtin:example2 | builtin:delay-free
    #[arg(long)]
    config: String,
    #[arg(long)]
    scheme: Option<String>,
    /// Discretization order
    #[arg(short = 'N')]
    order: Option<usize>,
    /// Overrides the delay of the config
    #[arg(long)]
    delay: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    #[value(name = "N")]
    Order,
    #[value(name = "h")]
    Delay,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the approximating ODE as CSV
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Both schemes side by side
        #[arg(long)]
        both: bool,
    },
    /// Write P as binary plus a .meta.json sidecar
    Build {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the functional at the config's initial function
    Eval {
        #[command(flatten)]
        common: Common,
        /// one | sin | exp-decay, overriding the config
        #[arg(long)]
        phi: Option<String>,
    },
    /// Quadratic lower-bound coefficient
    K1 {
        #[command(flatten)]
        common: Common,
    },
    /// Smallest delay at which the model loses the Hurwitz property
    CriticalDelay {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "0.1:10")]
        range: String,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// k1 and stability data over a grid of orders or delays
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: AxisArg,
        #[arg(long)]
        range: Option<String>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Explicit comma-separated grid, instead of --range/--steps
        #[arg(long)]
        values: Option<String>,
    },
    /// Compare both schemes against the quadrature route
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Config(format!("range must look like a:b, got '{text}'"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let mut values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad grid value '{v}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

fn problem(common: &Common) -> Result<Problem, CliError> {
    let mut p = ProblemConfig::load(&common.config)?.into_problem()?;
    if let Some(s) = &common.scheme {
        p.scheme = s.parse().map_err(|e: lk_core::Error| CliError::Config(e.to_string()))?;
    }
    if let Some(order) = common.order {
        if order == 0 {
            return Err(CliError::Config("-N must be at least 1".into()));
        }
        p.order = order;
    }
    if let Some(h) = common.delay {
        p = p.with_delay(h)?;
    }
    Ok(p)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { common, both } => commands::spectrum(&problem(&common)?, both, common.out.as_deref()),
        Command::Build { common } => {
            let out = common.out.clone().ok_or_else(|| CliError::Config("build needs --out".into()))?;
            commands::build_artifact(&problem(&common)?, &out)
        }
        Command::Eval { common, phi } => {
            let mut p = problem(&common)?;
            if let Some(name) = phi {
                let named = NamedPhi::parse(&name)
                    .ok_or_else(|| CliError::Config(format!("unknown phi '{name}' (one, sin, exp-decay)")))?;
                p.phi = Some(PhiConfig::Named(named));
            }
            commands::eval(&p, common.out.as_deref())
        }
        Command::K1 { common } => commands::k1(&problem(&common)?, common.out.as_deref()),
        Command::CriticalDelay { common, range, tol } => {
            if !(tol > 0.0) {
                return Err(CliError::Config("--tol must be positive".into()));
            }
            commands::critical(&problem(&common)?, parse_range(&range)?, tol, common.out.as_deref())
        }
        Command::Sweep { common, axis, range, steps, values } => {
            let axis = match axis {
                AxisArg::Order => Axis::Order,
                AxisArg::Delay => Axis::Delay,
            };
            let grid = match (values, range) {
                (Some(v), _) => parse_values(&v)?,
                (None, Some(r)) => commands::grid(axis, parse_range(&r)?, steps)?,
                (None, None) => return Err(CliError::Config("sweep needs --range or --values".into())),
            };
            if axis == Axis::Order && grid.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
                return Err(CliError::Config("orders must be positive integers".into()));
            }
            if axis == Axis::Delay && grid.iter().any(|&v| !(v > 0.0)) {
                return Err(CliError::Config("delays must be positive".into()));
            }
            commands::sweep(&problem(&common)?, axis, &grid, common.out.as_deref())
        }
        Command::Validate { common } => commands::validate(&problem(&common)?, common.out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lk: {e}");
            e.exit_code()
        }
    }
}
