//! Reference scenarios written to `repro_<name>/`.

use std::path::{Path, PathBuf};

use clap::ValueEnum;

use rlattract_core::attractivity::{certify, corollary_threshold, qin_probe, AttractivityCertificate};
use rlattract_core::linalg::Norm;
use rlattract_core::solver::WeightedTrajectory;

use crate::config::RunConfig;
use crate::output::{self, certificate_json, kernel_csv, pretty, scan_csv, Csv};
use crate::{metadata, run_solver, trajectory_csv, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// A = −1, constant Q at 0.9 of the uniform bound, g = 1/(1+√t).
    Example1,
    /// Piecewise Q decaying like 1/t; certified at the stated constants,
    /// simulated at reduced constants.
    Example2,
    /// A = −1, Q ≡ 2: the perturbation cancels the stable part.
    Cong,
    /// The kernel t^{α−1}E_{α,α}(t^αA) is unbounded near 0.
    Qin,
}

impl Scenario {
    fn name(self) -> &'static str {
        match self {
            Scenario::Example1 => "example1",
            Scenario::Example2 => "example2",
            Scenario::Cong => "cong",
            Scenario::Qin => "qin",
        }
    }
}

const EXAMPLE2_LITERAL: &str = r#"{
  "alpha": 0.5, "A": [[-1]],
  "Q": [["piecewise(t<=1000: 1000, else: 1000000/t)"]],
  "g": ["1/(1+sqrt(t))"],
  "method": "voc",
  "mesh": {"T": 100, "N": 1024},
  "scan": {"t_min": 0.01, "t_max": 1e8}
}"#;

const EXAMPLE2_SCALED: &str = r#"{
  "alpha": 0.5, "A": [[-1]],
  "Q": [["piecewise(t<=10: 5, else: 50/t)"]],
  "g": ["1/(1+sqrt(t))"],
  "method": "voc",
  "mesh": {"T": 100, "N": 4096},
  "scan": {"t_min": 0.01, "t_max": 1e6}
}"#;

const CONG: &str = r#"{
  "alpha": 0.5, "A": [[-1]], "Q": [["2"]],
  "method": "voc",
  "mesh": {"T": 20, "N": 1024}
}"#;

const QIN: &str = r#"{
  "alpha": 0.5, "A": [[-1]],
  "method": "voc",
  "mesh": {"T": 1, "N": 1024}
}"#;

fn example1() -> Result<RunConfig, CliError> {
    let base = RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1]]}"#)?;
    let thr = corollary_threshold(&base.a_matrix(), base.alpha, &base.grid()?)?;
    RunConfig::from_json(&format!(
        r#"{{
  "alpha": 0.5, "A": [[-1]],
  "Q": [["{:?}"]],
  "g": ["1/(1+sqrt(t))"],
  "method": "voc",
  "mesh": {{"T": 100, "N": 1024}}
}}"#,
        0.9 * thr
    ))
}

struct Writer {
    dir: PathBuf,
    written: Vec<String>,
}

impl Writer {
    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        output::write_text(&self.dir.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Writes config, certificate and scan files; returns the certificate.
fn certify_into(w: &mut Writer, cfg: &RunConfig, suffix: &str) -> Result<AttractivityCertificate, CliError> {
    w.text(&format!("config{suffix}.json"), &format!("{}\n", cfg.to_json()))?;
    let cert = certify(&cfg.system()?, &cfg.grid()?)?;
    w.text(&format!("cert{suffix}.json"), &pretty(&certificate_json(&cert)))?;
    let meta = metadata(cfg);
    if let Some(g) = &cert.g_sup {
        w.text(
            &format!("g_scan{suffix}.csv"),
            kernel_csv(&meta, g, cert.lemma_m.as_ref()).as_str(),
        )?;
    }
    if let Some(q) = &cert.q {
        w.text(&format!("q_scan{suffix}.csv"), scan_csv(&meta, "q", q).as_str())?;
    }
    if let Some(gb) = &cert.g_bound {
        w.text(
            &format!("g_bound_scan{suffix}.csv"),
            scan_csv(&meta, "g_bound", gb).as_str(),
        )?;
    }
    println!("{}: verdict {}", cfg_label(suffix), cert.verdict.as_str());
    Ok(cert)
}

fn cfg_label(suffix: &str) -> &str {
    if suffix.is_empty() {
        "certificate"
    } else {
        "certificate (scaled)"
    }
}

fn norm_at(traj: &WeightedTrajectory, t: f64) -> f64 {
    Norm::Two.vector(&traj.x_at(traj.index_at_or_before(t)))
}

/// Simulates and writes trajectory.csv. Prints ‖x‖ at the given times.
fn simulate_into(w: &mut Writer, cfg: &RunConfig, probes: &[f64]) -> Result<(), CliError> {
    let outcome = run_solver(cfg);
    let csv = trajectory_csv(cfg, &outcome)?;
    w.text("trajectory.csv", csv.as_str())?;
    match outcome {
        Ok((traj, _)) => {
            let parts: Vec<String> = probes
                .iter()
                .map(|&t| format!("|x({t})| = {:.6e}", norm_at(&traj, t)))
                .collect();
            println!("trajectory: {}", parts.join(", "));
            Ok(())
        }
        Err((_, e)) => Err(e),
    }
}

pub fn run(scenario: Scenario, base: &Path) -> Result<u8, CliError> {
    let dir = base.join(format!("repro_{}", scenario.name()));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    let mut w = Writer {
        dir,
        written: Vec::new(),
    };
    let result = match scenario {
        Scenario::Example1 => {
            let cfg = example1()?;
            certify_into(&mut w, &cfg, "")?;
            simulate_into(&mut w, &cfg, &[10.0, 25.0, 100.0])
        }
        Scenario::Example2 => {
            certify_into(&mut w, &RunConfig::from_json(EXAMPLE2_LITERAL)?, "")?;
            let scaled = RunConfig::from_json(EXAMPLE2_SCALED)?;
            certify_into(&mut w, &scaled, "_scaled")?;
            simulate_into(&mut w, &scaled, &[10.0, 25.0, 100.0])
        }
        Scenario::Cong => {
            let cfg = RunConfig::from_json(CONG)?;
            certify_into(&mut w, &cfg, "")?;
            simulate_into(&mut w, &cfg, &[5.0, 20.0])
        }
        Scenario::Qin => {
            let cfg = RunConfig::from_json(QIN)?;
            certify_into(&mut w, &cfg, "")?;
            let samples = qin_probe(&cfg.a_matrix(), cfg.alpha, 1e-6, cfg.norm.into())?;
            let cols = ["t", "kernel_norm", "leading_term", "ratio"].map(String::from);
            let mut csv = Csv::new(&metadata(&cfg), &cols);
            for s in &samples {
                csv.row(&[s.t, s.value, s.predicted, s.value / s.predicted]);
            }
            w.text("qin.csv", csv.as_str())?;
            if let Some(s) = samples.first() {
                println!(
                    "kernel norm at t = {:e}: {:.6e} (leading term {:.6e})",
                    s.t, s.value, s.predicted
                );
            }
            simulate_into(&mut w, &cfg, &[1e-3, 1.0])
        }
    };
    println!("wrote {} files to {}", w.written.len(), w.dir.display());
    result.map(|()| 0)
}
