//! `rlattract` command-line front end.
//!
//! Exit codes: 0 success or certified, 1 not certified, 2 input error,
//! 3 accuracy error, 4 solver failure.

mod config;
mod output;
mod repro;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use rlattract_core::attractivity::{certify, kernel_double_conv_sup, kernel_tail_bound, sector_check, TAIL_T0};
use rlattract_core::solver::{
    solve_ivp, solve_linear_voc, trajectory_defects, IvProblem, NegativeCube, Rhs, WeightedTrajectory, ZeroRhs,
};
use rlattract_core::special::{ml_scalar, MlIndex, DEFAULT_ML_TOL};
use rlattract_core::Error;

use config::{Method, RhsKind, RunConfig};
use output::{certificate_json, kernel_csv, pretty, trajectory_columns, trajectory_rows, Csv};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: msg.into(),
        }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self::input(msg)
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Accuracy { .. } => 3,
        Error::Convergence { .. } | Error::Numerical(_) | Error::InvariantViolation(_) => 4,
        Error::Domain(_) | Error::Input(_) | Error::Parse(_) | Error::CoefficientEval { .. } => 2,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: error_code(&e),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rlattract",
    version,
    about = "Riemann-Liouville fractional systems: solver and attractivity certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Evaluate the Mittag-Leffler function E_{alpha,beta}(z).
    MlEval {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Complex argument as "re,im" or "re".
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = DEFAULT_ML_TOL)]
        tol: f64,
    },
    /// Solve the initial value problem of a config and write the trajectory CSV.
    Solve {
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify global attractivity and write the certificate JSON.
    Certify {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan G(t) and the kernel tail bound for the config's A and alpha.
    ScanKernel {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce a reference scenario into ./repro_<name>/.
    Repro {
        name: repro::Scenario,
        /// Directory in which repro_<name>/ is created.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => output::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let bad = || CliError::input(format!("--z expects \"re,im\" or \"re\", got {s:?}"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = match parts.next() {
        Some(v) => v.map_err(|_| bad())?,
        None => 0.0,
    };
    if parts.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn cmd_ml_eval(alpha: f64, beta: f64, z: &str, tol: f64) -> Result<u8, CliError> {
    let z = parse_complex(z)?;
    let v = ml_scalar(MlIndex::new(alpha, beta)?, z, tol)?;
    println!(
        "value={},{} error_estimate={:.3e} method={}",
        output::num(v.value.re),
        output::num(v.value.im),
        v.error_estimate,
        format!("{:?}", v.method).to_lowercase()
    );
    Ok(0)
}

/// Solver result; a failure keeps the partial trajectory when there is one.
pub type SolveOutcome = Result<(WeightedTrajectory, Box<dyn Rhs>), (Option<WeightedTrajectory>, CliError)>;

pub fn metadata(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    vec![
        ("config_sha256", cfg.hash()),
        ("config", serde_json::to_string(cfg).expect("config serialises")),
    ]
}

/// Runs the configured solver. A convergence failure still yields the
/// partial trajectory together with the error.
pub fn run_solver(cfg: &RunConfig) -> SolveOutcome {
    let no_partial = |e: CliError| (None, e);
    let mesh = cfg.mesh().map_err(no_partial)?;
    let x0 = cfg.x0();
    let tol = cfg.tolerances.solver;
    let rhs: Box<dyn Rhs> = match cfg.rhs {
        RhsKind::Linear => Box::new(cfg.system().map_err(no_partial)?),
        RhsKind::NegativeCube => Box::new(NegativeCube { dim: cfg.dim() }),
        RhsKind::Zero => Box::new(ZeroRhs { dim: cfg.dim() }),
    };
    let result = match cfg.method {
        Method::Voc => {
            let sys = cfg.system().map_err(no_partial)?;
            solve_linear_voc(&sys, &x0, &mesh, tol)
        }
        Method::Stepper => {
            let p = IvProblem::new(cfg.alpha, x0, rhs.as_ref()).map_err(|e| (None, e.into()))?;
            solve_ivp(&p, &mesh, tol, cfg.tolerances.max_inner)
        }
    };
    match result {
        Ok(traj) => Ok((traj, rhs)),
        Err(e) => {
            let failure = CliError {
                code: error_code(&e),
                message: e.to_string(),
            };
            let partial = match e {
                Error::Convergence { partial, .. } => Some(*partial),
                _ => None,
            };
            Err((partial, failure))
        }
    }
}

/// Trajectory CSV text for a solver outcome, with a FAILED trailer when the
/// solver stopped early.
pub fn trajectory_csv(cfg: &RunConfig, outcome: &SolveOutcome) -> Result<Csv, CliError> {
    let mut csv = Csv::new(&metadata(cfg), &trajectory_columns(cfg.dim()));
    match outcome {
        Ok((traj, rhs)) => {
            let res = trajectory_defects(traj, rhs.as_ref())?;
            trajectory_rows(&mut csv, traj, Some(&res));
        }
        Err((partial, e)) => {
            if let Some(p) = partial {
                trajectory_rows(&mut csv, p, None);
            }
            csv.comment(&format!("FAILED: {}", e.message));
        }
    }
    Ok(csv)
}

fn cmd_solve(config: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let cfg = RunConfig::load(config)?;
    let outcome = run_solver(&cfg);
    if let Err((None, e)) = &outcome {
        return Err(CliError {
            code: e.code,
            message: e.message.clone(),
        });
    }
    let csv = trajectory_csv(&cfg, &outcome)?;
    emit(out, csv.as_str())?;
    match outcome {
        Ok(_) => Ok(0),
        Err((_, e)) => Err(e),
    }
}

fn cmd_certify(config: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let cfg = RunConfig::load(config)?;
    let cert = certify(&cfg.system()?, &cfg.grid()?)?;
    emit(out, &pretty(&certificate_json(&cert)))?;
    if out.is_some() {
        println!("verdict: {}", cert.verdict.as_str());
    }
    Ok(if cert.verdict.is_certified() { 0 } else { 1 })
}

fn cmd_scan_kernel(config: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let cfg = RunConfig::load(config)?;
    let a = cfg.a_matrix();
    let grid = cfg.grid()?;
    let sector = sector_check(&a, cfg.alpha)?;
    if !sector.in_sector {
        let eig: Vec<String> = sector
            .eigenvalues
            .iter()
            .map(|z| format!("{}{:+}i", z.re, z.im))
            .collect();
        println!(
            "not in sector: margin {:.6} rad, eigenvalues [{}]",
            sector.margin,
            eig.join(", ")
        );
        return Ok(1);
    }
    let g = kernel_double_conv_sup(&a, cfg.alpha, &grid)?;
    let tail = kernel_tail_bound(&a, cfg.alpha, TAIL_T0, &grid)?;
    let mut meta = metadata(&cfg);
    meta.push(("G_sup", output::num(g.sup)));
    meta.push(("G_stabilized", g.stabilized.to_string()));
    meta.push(("tail_M", output::num(tail.m)));
    meta.push(("tail_t0", output::num(tail.t0)));
    meta.push(("tail_stabilized", tail.stabilized.to_string()));
    let csv = kernel_csv(&meta, &g, Some(&tail));
    emit(out, csv.as_str())?;
    Ok(0)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RLATTRACT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::input(format!("RLATTRACT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::input(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.cmd {
        Cmd::MlEval { alpha, beta, z, tol } => cmd_ml_eval(alpha, beta, &z, tol),
        Cmd::Solve { config, out } => cmd_solve(&config, out.as_deref()),
        Cmd::Certify { config, out } => cmd_certify(&config, out.as_deref()),
        Cmd::ScanKernel { config, out } => cmd_scan_kernel(&config, out.as_deref()),
        Cmd::Repro { name, dir } => repro::run(name, &dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
