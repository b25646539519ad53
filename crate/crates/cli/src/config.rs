//! JSON run configuration.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rlattract_core::attractivity::{LinearSystem, ScanGrid};
use rlattract_core::expr::{ExprMatrix, ExprVector};
use rlattract_core::linalg::Norm;
use rlattract_core::quadrature::GradedMesh;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsKind {
    /// f(t, x) = (A + Q(t))x + g(t).
    #[default]
    Linear,
    /// f(t, x) = −x³ componentwise; A, Q and g are ignored by the solver.
    NegativeCube,
    /// f ≡ 0.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Product-integration time stepper, any right-hand side.
    #[default]
    Stepper,
    /// Variation of constants, linear systems only.
    Voc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NormChoice {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "inf")]
    Inf,
}

impl From<NormChoice> for Norm {
    fn from(n: NormChoice) -> Norm {
        match n {
            NormChoice::Two => Norm::Two,
            NormChoice::One => Norm::One,
            NormChoice::Inf => Norm::Inf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(rename = "T", default = "default_horizon")]
    pub horizon: f64,
    #[serde(rename = "N", default = "default_intervals")]
    pub intervals: usize,
    /// Defaults to the grading suggested for alpha.
    #[serde(default)]
    pub grading: Option<f64>,
}

fn default_horizon() -> f64 {
    10.0
}

fn default_intervals() -> usize {
    1024
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            intervals: default_intervals(),
            grading: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(rename = "inner_N", default = "default_inner_n")]
    pub inner_n: usize,
}

fn default_t_min() -> f64 {
    ScanGrid::default().t_min
}

fn default_t_max() -> f64 {
    ScanGrid::default().t_max
}

fn default_per_decade() -> usize {
    ScanGrid::default().per_decade
}

fn default_inner_n() -> usize {
    ScanGrid::default().inner_n
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            t_min: default_t_min(),
            t_max: default_t_max(),
            per_decade: default_per_decade(),
            inner_n: default_inner_n(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_solver_tol")]
    pub solver: f64,
    #[serde(default = "default_ml_tol")]
    pub ml: f64,
    /// Inner fixed-point iterations per step of the stepper.
    #[serde(default = "default_max_inner")]
    pub max_inner: usize,
}

fn default_solver_tol() -> f64 {
    1e-10
}

fn default_ml_tol() -> f64 {
    ScanGrid::default().ml_tol
}

fn default_max_inner() -> usize {
    200
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: default_solver_tol(),
            ml: default_ml_tol(),
            max_inner: default_max_inner(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    /// Entries of Q(t); zero when absent.
    #[serde(rename = "Q", default)]
    pub q: Option<Vec<Vec<String>>>,
    /// Entries of g(t); zero when absent.
    #[serde(default)]
    pub g: Option<Vec<String>>,
    /// Limit of t^{1−α}x(t) at 0; all ones when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub rhs: RhsKind,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub norm: NormChoice,
}

/// Byte offset of a 1-based (line, column) position.
fn byte_offset(src: &str, line: usize, column: usize) -> usize {
    let start: usize = src
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (start + column.saturating_sub(1)).min(src.len())
}

impl RunConfig {
    pub fn from_json(src: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(src).map_err(|e| {
            let offset = byte_offset(src, e.line(), e.column());
            CliError::input(format!(
                "invalid config at byte {offset} (line {}, column {}): {e}",
                e.line(),
                e.column()
            ))
        })?;
        cfg.resolved()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&src).map_err(|e| CliError {
            code: e.code,
            message: format!("{}: {}", path.display(), e.message),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Fills every optional field and checks shapes, so that serialising the
    /// result echoes the full configuration that was run.
    fn resolved(mut self) -> Result<Self, CliError> {
        let s = self.a.len();
        if s == 0 || self.a.iter().any(|r| r.len() != s) {
            return Err(CliError::input(format!(
                "A must be a nonempty square matrix, got {} rows",
                s
            )));
        }
        if self.a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CliError::input("A must have finite entries"));
        }
        let zero = || "0".to_string();
        self.q.get_or_insert_with(|| vec![vec![zero(); s]; s]);
        self.g.get_or_insert_with(|| vec![zero(); s]);
        self.x0.get_or_insert_with(|| vec![1.0; s]);
        self.mesh
            .grading
            .get_or_insert_with(|| GradedMesh::default_grading(self.alpha));
        if self.x0.as_ref().is_some_and(|x| x.len() != s) {
            return Err(CliError::input(format!("x0 must have {s} entries")));
        }
        if self.method == Method::Voc && self.rhs != RhsKind::Linear {
            return Err(CliError::input("method \"voc\" needs rhs \"linear\""));
        }
        Ok(self)
    }

    pub fn a_matrix(&self) -> DMatrix<f64> {
        let s = self.dim();
        DMatrix::from_fn(s, s, |i, j| self.a[i][j])
    }

    pub fn x0(&self) -> Vec<f64> {
        self.x0.clone().unwrap_or_else(|| vec![1.0; self.dim()])
    }

    pub fn system(&self) -> Result<LinearSystem, CliError> {
        let s = self.dim();
        let q = match &self.q {
            Some(q) => ExprMatrix::parse("Q", q)?,
            None => ExprMatrix::constant("Q", &DMatrix::zeros(s, s)),
        };
        let g = match &self.g {
            Some(g) => ExprVector::parse("g", g)?,
            None => ExprVector::zeros("g", s),
        };
        Ok(LinearSystem::new(self.alpha, self.a_matrix(), q, g)?)
    }

    pub fn mesh(&self) -> Result<GradedMesh, CliError> {
        let grading = self
            .mesh
            .grading
            .unwrap_or_else(|| GradedMesh::default_grading(self.alpha));
        Ok(GradedMesh::new(self.mesh.horizon, self.mesh.intervals, grading)?)
    }

    pub fn grid(&self) -> Result<ScanGrid, CliError> {
        let grid = ScanGrid {
            t_min: self.scan.t_min,
            t_max: self.scan.t_max,
            per_decade: self.scan.per_decade,
            inner_n: self.scan.inner_n,
            norm: self.norm.into(),
            ml_tol: self.tolerances.ml,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// SHA-256 of the compact JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(compact.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let cfg = RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1]]}"#).unwrap();
        assert_eq!(cfg.q, Some(vec![vec!["0".to_string()]]));
        assert_eq!(cfg.x0, Some(vec![1.0]));
        assert_eq!(cfg.mesh.grading, Some(GradedMesh::default_grading(0.5)));
        assert_eq!(cfg.scan.inner_n, 1024);
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1]], "mesh": {"T": 1, "n": 8}}"#).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("unknown field"), "{}", e.message);
        assert!(RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1]], "Norm": "2"}"#).is_err());
    }

    #[test]
    fn syntax_errors_report_byte_offsets() {
        let src = "{\n  \"alpha\": 0.5,\n  \"A\": [[-1]],,\n}";
        let e = RunConfig::from_json(src).unwrap_err();
        let at = src.find(",,").unwrap() + 1;
        assert!(e.message.contains(&format!("byte {at}")), "{}", e.message);
    }

    #[test]
    fn shapes_are_checked() {
        assert!(RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1, 0]]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1]], "x0": [1, 2]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"alpha": 0.5, "A": [[-1]], "rhs": "zero", "method": "voc"}"#).is_err());
    }
}
