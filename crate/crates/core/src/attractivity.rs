//! Attractivity certification for D^α x = Ax + Q(t)x + g(t).
//!
//! Every supremum over t ≥ 0 is replaced by a maximum over a geometric scan
//! grid, and a scan is called stabilized when extending the grid to twice its
//! horizon raises the maximum by less than 1%. The verdicts are therefore
//! numerical evidence, not proofs.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{ExprMatrix, ExprVector};
use crate::linalg::{check_square, eigenvalues, Norm};
use crate::quadrature::{GradedMesh, ProductKernel};
use crate::solver::Rhs;
use crate::special::{gamma, MatrixMl, MlIndex, DEFAULT_ML_TOL};

/// Relative growth allowed between a scan and its doubled-horizon extension.
pub const STABILIZATION_TOL: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    alpha: f64,
    a: DMatrix<f64>,
    q: ExprMatrix,
    g: ExprVector,
}

impl LinearSystem {
    pub fn new(alpha: f64, a: DMatrix<f64>, q: ExprMatrix, g: ExprVector) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("order must lie in (0, 1), got {alpha}")));
        }
        check_square(&a, "A")?;
        let s = a.nrows();
        if q.shape() != (s, s) {
            return Err(Error::Input(format!("Q is {:?}, expected {s}x{s}", q.shape())));
        }
        if g.len() != s {
            return Err(Error::Input(format!("g has {} entries, expected {s}", g.len())));
        }
        Ok(Self { alpha, a, q, g })
    }

    /// System with Q ≡ 0 and g ≡ 0.
    pub fn homogeneous(alpha: f64, a: DMatrix<f64>) -> Result<Self> {
        let s = a.nrows();
        let q = ExprMatrix::constant("Q", &DMatrix::zeros(s, s));
        Self::new(alpha, a, q, ExprVector::zeros("g", s))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn q(&self) -> &ExprMatrix {
        &self.q
    }

    pub fn g(&self) -> &ExprVector {
        &self.g
    }
}

impl Rhs for LinearSystem {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let xv = nalgebra::DVector::from_column_slice(x);
        let v = (&self.a + self.q.eval(t)?) * xv + self.g.eval(t)?;
        Ok(v.as_slice().to_vec())
    }

    /// τ^{1−α}(A + Q(τ))τ^{α−1}y + τ^{1−α}g(τ) → (A + Q(0))y.
    fn weighted_limit_at_zero(&self, _alpha: f64, y: &[f64]) -> Option<Vec<f64>> {
        let q0 = self.q.eval(0.0).ok()?;
        self.g.eval(0.0).ok()?;
        let v = (&self.a + q0) * nalgebra::DVector::from_column_slice(y);
        Some(v.as_slice().to_vec())
    }
}

/// Geometric grid of scan times plus the inner quadrature resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub per_decade: usize,
    /// Intervals of the two-sided mesh used for each convolution integral.
    pub inner_n: usize,
    pub norm: Norm,
    pub ml_tol: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            t_min: 1e-2,
            t_max: 1e4,
            per_decade: 20,
            inner_n: 1024,
            norm: Norm::Two,
            ml_tol: DEFAULT_ML_TOL,
        }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Input(format!("scan needs 0 < t_min, got {}", self.t_min)));
        }
        if !(self.t_max / self.t_min >= 100.0) {
            return Err(Error::Input(format!(
                "scan must span at least two decades, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.per_decade == 0 {
            return Err(Error::Input("scan needs at least one point per decade".into()));
        }
        if self.inner_n < 16 || !self.inner_n.is_multiple_of(4) {
            return Err(Error::Input(format!(
                "inner_N must be a multiple of 4 and >= 16, got {}",
                self.inner_n
            )));
        }
        if !(self.ml_tol > 0.0 && self.ml_tol <= 1e-6) {
            return Err(Error::Input(format!(
                "ml tolerance must lie in (0, 1e-6], got {}",
                self.ml_tol
            )));
        }
        Ok(())
    }

    fn step(&self) -> f64 {
        10f64.powf(1.0 / self.per_decade as f64)
    }

    /// Scan times from t_min to t_max inclusive.
    pub fn points(&self) -> Vec<f64> {
        let decades = (self.t_max / self.t_min).log10();
        let n = (decades * self.per_decade as f64 - 1e-9).ceil() as usize;
        let mut pts: Vec<f64> = (0..n)
            .map(|i| self.t_min * 10f64.powf(i as f64 / self.per_decade as f64))
            .collect();
        pts.push(self.t_max);
        pts
    }

    /// Points in (t_max, 2 t_max] used for the stabilization check.
    pub fn extension_points(&self) -> Vec<f64> {
        let step = self.step();
        let mut pts = Vec::new();
        let mut t = self.t_max * step;
        while t < 2.0 * self.t_max {
            pts.push(t);
            t *= step;
        }
        pts.push(2.0 * self.t_max);
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorReport {
    pub in_sector: bool,
    /// min |arg λ| − απ/2 over the spectrum, in radians.
    pub margin: f64,
    pub eigenvalues: Vec<Complex64>,
}

/// Checks σ(A) ⊂ {λ ≠ 0 : |arg λ| > απ/2}.
pub fn sector_check(a: &DMatrix<f64>, alpha: f64) -> Result<SectorReport> {
    let ev = eigenvalues(a)?;
    let half = alpha * PI / 2.0;
    let scale = ev.iter().fold(0.0_f64, |m, l| m.max(l.norm())).max(a.amax());
    let mut margin = f64::INFINITY;
    for l in &ev {
        let m = if l.norm() <= 1e-14 * scale.max(1e-300) || l.norm() == 0.0 {
            -half
        } else {
            l.arg().abs() - half
        };
        margin = margin.min(m);
    }
    Ok(SectorReport {
        in_sector: margin > 0.0,
        margin,
        eigenvalues: ev,
    })
}

fn require_sector(a: &DMatrix<f64>, alpha: f64) -> Result<()> {
    let rep = sector_check(a, alpha)?;
    if rep.in_sector {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "spectrum of A is outside the stability sector (margin {:.4} rad)",
            rep.margin
        )))
    }
}

/// Result of a scanned supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub sup: f64,
    pub stabilized: bool,
    /// (t, value) over the base grid followed by the extension.
    pub samples: Vec<(f64, f64)>,
    /// Number of leading samples that belong to the base grid.
    pub base_len: usize,
}

impl ScanResult {
    fn from_samples(samples: Vec<(f64, f64)>, base_len: usize) -> Self {
        let sup = samples[..base_len].iter().fold(0.0_f64, |m, s| m.max(s.1));
        let ext = samples[base_len..].iter().fold(0.0_f64, |m, s| m.max(s.1));
        let stabilized = sup.is_finite() && ext <= sup * (1.0 + STABILIZATION_TOL) + 1e-300;
        Self {
            sup,
            stabilized,
            samples,
            base_len,
        }
    }

    pub fn base_samples(&self) -> &[(f64, f64)] {
        &self.samples[..self.base_len]
    }
}

/// Convolution t^{1−α} ∫₀ᵗ (t−τ)^{α−1} τ^{b−1} h(t, τ) dτ evaluated on a
/// two-sided graded mesh of [0, t]. The weights scale as t^{α+b−1}, so one
/// row computed at t = 1 serves every scan point.
///
/// The product rule is second order in the mesh size, so the row is the
/// Richardson combination (4·w_N − w_{N/2})/3. The coarse nodes are a subset
/// of the fine ones and the combination costs no extra evaluations.
struct ConvolutionScan {
    alpha: f64,
    b: f64,
    unit_nodes: Vec<f64>,
    unit_weights: Vec<f64>,
}

impl ConvolutionScan {
    fn new(alpha: f64, b: f64, inner_n: usize) -> Result<Self> {
        let kernel = ProductKernel::new(alpha, b)?;
        let grading = GradedMesh::default_grading(alpha);
        let row = |n: usize| -> Result<(Vec<f64>, Vec<f64>)> {
            let mesh = GradedMesh::two_sided(1.0, n, grading)?;
            let nodes = mesh.nodes().to_vec();
            let weights = kernel.row(&nodes, nodes.len() - 1);
            Ok((nodes, weights))
        };
        let (fine, fine_w) = row(inner_n)?;
        let (coarse, coarse_w) = row(inner_n / 2)?;
        let mut combined: BTreeMap<u64, f64> = fine
            .iter()
            .zip(&fine_w)
            .map(|(u, w)| (u.to_bits(), 4.0 * w / 3.0))
            .collect();
        for (u, w) in coarse.iter().zip(&coarse_w) {
            *combined.entry(u.to_bits()).or_insert(0.0) -= w / 3.0;
        }
        let (unit_nodes, unit_weights) = combined.into_iter().map(|(k, w)| (f64::from_bits(k), w)).unzip();
        Ok(Self {
            alpha,
            b,
            unit_nodes,
            unit_weights,
        })
    }

    /// `h(s, τ)` receives s = t − τ and τ.
    fn value<H>(&self, t: f64, h: &H) -> Result<f64>
    where
        H: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let mut sum = 0.0;
        for (u, w) in self.unit_nodes.iter().zip(&self.unit_weights) {
            if *w == 0.0 {
                continue;
            }
            let s = t * (1.0 - u);
            sum += w * h(s, t * u)?;
        }
        Ok(t.powf(1.0 - self.alpha) * t.powf(self.alpha + self.b - 1.0) * sum)
    }

    fn scan<H>(&self, grid: &ScanGrid, h: &H) -> Result<ScanResult>
    where
        H: Fn(f64, f64) -> Result<f64> + Sync,
    {
        let base = grid.points();
        let base_len = base.len();
        let all: Vec<f64> = base.into_iter().chain(grid.extension_points()).collect();
        let samples: Vec<(f64, f64)> = all
            .par_iter()
            .map(|&t| Ok((t, self.value(t, h)?)))
            .collect::<Result<_>>()?;
        Ok(ScanResult::from_samples(samples, base_len))
    }
}

/// E_{α,α}(s^α A), with E(0) = I/Γ(α) exactly.
fn resolvent(ml: &MatrixMl, alpha: f64, s: f64, tol: f64) -> Result<DMatrix<f64>> {
    if s == 0.0 {
        let n = ml.dim();
        return Ok(DMatrix::identity(n, n) / gamma(alpha)?);
    }
    ml.eval(MlIndex::new(alpha, alpha)?, s.powf(alpha), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailBound {
    /// max over scan points t ≥ t0 of t^{α+1} |||t^{α−1}E_{α,α}(t^αA)|||.
    pub m: f64,
    pub t0: f64,
    pub samples: Vec<(f64, f64)>,
    /// The maximum sits at the last grid point.
    pub max_at_right_end: bool,
    /// The extension to twice the horizon does not exceed the maximum by
    /// more than 1%.
    pub stabilized: bool,
}

/// Scanned constant M of the kernel tail bound |||t^{α−1}E_{α,α}(t^αA)||| ≤ M/t^{α+1}.
pub fn kernel_tail_bound(a: &DMatrix<f64>, alpha: f64, t0: f64, grid: &ScanGrid) -> Result<TailBound> {
    grid.validate()?;
    require_sector(a, alpha)?;
    if !(t0 > 0.0) {
        return Err(Error::domain(format!("t0 must be positive, got {t0}")));
    }
    let ml = MatrixMl::new(a)?;
    let mut pts: Vec<f64> = grid.points().into_iter().filter(|&t| t >= t0).collect();
    if pts.first() != Some(&t0) {
        pts.insert(0, t0);
    }
    let base_len = pts.len();
    pts.extend(grid.extension_points());
    let samples: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|&t| {
            let k = ml.kernel(alpha, t, grid.ml_tol)?;
            Ok((t, t.powf(alpha + 1.0) * grid.norm.matrix(&k)))
        })
        .collect::<Result<_>>()?;
    let res = ScanResult::from_samples(samples, base_len);
    let argmax = res
        .base_samples()
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if s.1 > res.samples[best].1 { i } else { best });
    Ok(TailBound {
        m: res.sup,
        t0,
        max_at_right_end: argmax + 1 == base_len,
        stabilized: res.stabilized,
        samples: res.samples,
    })
}

/// G(t) = t^{1−α} ∫₀ᵗ (t−τ)^{α−1} |||E_{α,α}((t−τ)^αA)||| τ^{α−1} dτ over the scan.
pub fn kernel_double_conv_sup(a: &DMatrix<f64>, alpha: f64, grid: &ScanGrid) -> Result<ScanResult> {
    grid.validate()?;
    require_sector(a, alpha)?;
    let ml = MatrixMl::new(a)?;
    let conv = ConvolutionScan::new(alpha, alpha, grid.inner_n)?;
    conv.scan(grid, &|s, _tau| {
        Ok(grid.norm.matrix(&resolvent(&ml, alpha, s, grid.ml_tol)?))
    })
}

/// Contraction constant q = sup_t t^{1−α}∫(t−τ)^{α−1}|||E_{α,α}((t−τ)^αA)Q(τ)|||τ^{α−1}dτ.
pub fn contraction_q(sys: &LinearSystem, grid: &ScanGrid) -> Result<ScanResult> {
    q_scan(sys, grid, sys.alpha())
}

/// The same quantity without the τ^{α−1} weight.
pub fn contraction_q_unweighted(sys: &LinearSystem, grid: &ScanGrid) -> Result<ScanResult> {
    q_scan(sys, grid, 1.0)
}

fn q_scan(sys: &LinearSystem, grid: &ScanGrid, b: f64) -> Result<ScanResult> {
    grid.validate()?;
    let alpha = sys.alpha();
    require_sector(sys.a(), alpha)?;
    let ml = MatrixMl::new(sys.a())?;
    let conv = ConvolutionScan::new(alpha, b, grid.inner_n)?;
    if let Some(qc) = sys.q().is_constant().then(|| sys.q().eval(0.0)).transpose()? {
        if qc.iter().all(|&v| v == 0.0) {
            let all = grid.points().len();
            let samples: Vec<(f64, f64)> = grid
                .points()
                .into_iter()
                .chain(grid.extension_points())
                .map(|t| (t, 0.0))
                .collect();
            return Ok(ScanResult::from_samples(samples, all));
        }
    }
    conv.scan(grid, &|s, tau| {
        let e = resolvent(&ml, alpha, s, grid.ml_tol)?;
        Ok(grid.norm.matrix(&(e * sys.q().eval(tau)?)))
    })
}

/// 1/G_sup: any Q with sup|||Q||| below this value has q < 1.
pub fn corollary_threshold(a: &DMatrix<f64>, alpha: f64, grid: &ScanGrid) -> Result<f64> {
    Ok(1.0 / kernel_double_conv_sup(a, alpha, grid)?.sup)
}

/// sup_t t^{1−α} ∫₀ᵗ (t−τ)^{α−1} ‖E_{α,α}((t−τ)^αA) g(τ)‖ dτ over the scan.
pub fn g_forcing_bound(sys: &LinearSystem, grid: &ScanGrid) -> Result<ScanResult> {
    grid.validate()?;
    let alpha = sys.alpha();
    require_sector(sys.a(), alpha)?;
    if sys.g().is_zero() {
        let base = grid.points().len();
        let samples = grid
            .points()
            .into_iter()
            .chain(grid.extension_points())
            .map(|t| (t, 0.0))
            .collect();
        return Ok(ScanResult::from_samples(samples, base));
    }
    let ml = MatrixMl::new(sys.a())?;
    let conv = ConvolutionScan::new(alpha, 1.0, grid.inner_n)?;
    conv.scan(grid, &|s, tau| {
        let e = resolvent(&ml, alpha, s, grid.ml_tol)?;
        let v = e * sys.g().eval(tau)?;
        Ok(grid.norm.vector(v.as_slice()))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub decay_verified: bool,
    pub k: f64,
    /// First time from which |||Q(t)||| ≤ 1/K on the (extended) grid;
    /// infinite if no such time was found.
    pub t: f64,
    pub head_sup: f64,
    pub tail_sup: f64,
    pub q_sup: f64,
    pub e_sup: f64,
}

/// Numerical check of lim |||Q(t)||| = 0 and the constants K, T.
pub fn decay_check(sys: &LinearSystem, grid: &ScanGrid, g_sup: f64) -> Result<DecayReport> {
    grid.validate()?;
    let alpha = sys.alpha();
    require_sector(sys.a(), alpha)?;
    let pts = grid.points();
    let qn = |t: f64| -> Result<f64> { Ok(grid.norm.matrix(&sys.q().eval(t)?)) };
    let qvals: Vec<f64> = pts.iter().map(|&t| qn(t)).collect::<Result<_>>()?;
    let q_sup = qvals.iter().copied().fold(qn(0.0)?, f64::max);
    let head_end = grid.t_min * 10.0;
    let tail_start = grid.t_max / 10.0;
    let head_sup = pts
        .iter()
        .zip(&qvals)
        .filter(|(t, _)| **t <= head_end * (1.0 + 1e-12))
        .fold(0.0_f64, |m, (_, v)| m.max(*v));
    let tail_sup = pts
        .iter()
        .zip(&qvals)
        .filter(|(t, _)| **t >= tail_start * (1.0 - 1e-12))
        .fold(0.0_f64, |m, (_, v)| m.max(*v));
    let decay_verified = (tail_sup == 0.0 || tail_sup < 0.1 * head_sup) && tail_sup < 1e-3 * (1.0 + q_sup);

    let ml = MatrixMl::new(sys.a())?;
    let e_vals: Vec<f64> = pts
        .par_iter()
        .map(|&t| Ok(grid.norm.matrix(&resolvent(&ml, alpha, t, grid.ml_tol)?)))
        .collect::<Result<_>>()?;
    let e_sup = e_vals
        .iter()
        .copied()
        .fold(grid.norm.matrix(&resolvent(&ml, alpha, 0.0, grid.ml_tol)?), f64::max);
    let k = (e_sup * q_sup).max(4.0 * g_sup);

    // T: start of the final run of grid points with |||Q||| ≤ 1/K, extending
    // the grid geometrically past t_max until the last point satisfies it.
    let limit = 1.0 / k;
    let mut times = pts.clone();
    let mut vals = qvals.clone();
    let step = grid.step();
    while vals.last().is_some_and(|v| *v > limit) && times.last().is_some_and(|t| *t < grid.t_max * 1e12) {
        let t = times.last().unwrap() * step;
        vals.push(qn(t)?);
        times.push(t);
    }
    let t = if vals.last().is_some_and(|v| *v <= limit) {
        let mut i = vals.len() - 1;
        while i > 0 && vals[i - 1] <= limit {
            i -= 1;
        }
        times[i]
    } else {
        f64::INFINITY
    };
    Ok(DecayReport {
        decay_verified,
        k,
        t,
        head_sup,
        tail_sup,
        q_sup,
        e_sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CertifiedThm2,
    CertifiedThm3,
    NotCertified,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedThm2 => "certified_thm2",
            Verdict::CertifiedThm3 => "certified_thm3",
            Verdict::NotCertified => "not_certified",
        }
    }

    pub fn is_certified(self) -> bool {
        self != Verdict::NotCertified
    }
}

#[derive(Debug, Clone)]
pub struct AttractivityCertificate {
    pub verdict: Verdict,
    /// Stage at which certification stopped, when not certified.
    pub failing_stage: Option<String>,
    pub sector: SectorReport,
    pub g_sup: Option<ScanResult>,
    pub q_threshold: Option<f64>,
    pub q: Option<ScanResult>,
    pub q_unweighted: Option<f64>,
    pub lemma_m: Option<TailBound>,
    pub g_bound: Option<ScanResult>,
    pub theorem3: Option<DecayReport>,
    pub grid: ScanGrid,
    /// All scans used for the verdict were stabilized.
    pub stabilized: bool,
    pub notes: Vec<String>,
}

/// Default t0 of the tail bound.
pub const TAIL_T0: f64 = 1.0;

/// Runs the sector test, the contraction test and, if that fails, the decay
/// test. Component failures do not abort: they produce a not_certified
/// certificate naming the stage.
pub fn certify(sys: &LinearSystem, grid: &ScanGrid) -> Result<AttractivityCertificate> {
    grid.validate()?;
    let alpha = sys.alpha();
    let sector = sector_check(sys.a(), alpha)?;
    let mut cert = AttractivityCertificate {
        verdict: Verdict::NotCertified,
        failing_stage: None,
        sector: sector.clone(),
        g_sup: None,
        q_threshold: None,
        q: None,
        q_unweighted: None,
        lemma_m: None,
        g_bound: None,
        theorem3: None,
        grid: grid.clone(),
        stabilized: false,
        notes: Vec::new(),
    };
    cert.notes.push(
        "initial condition lim t^(1-alpha) x(t) = x0; homogeneous solution carries the factor Gamma(alpha)".into(),
    );
    cert.notes
        .push("q and Q_threshold use the tau^(alpha-1)-weighted integrand".into());
    cert.notes
        .push(format!("matrix norm: operator {}-norm", grid.norm.name()));
    for jump in sys.q().discontinuities().into_iter().chain(sys.g().discontinuities()) {
        cert.notes.push(format!("warning: {jump}; continuity is assumed"));
    }
    if !sector.in_sector {
        cert.failing_stage = Some("sector".into());
        return Ok(cert);
    }

    let stage = |cert: &mut AttractivityCertificate, name: &str, e: Error| {
        cert.failing_stage = Some(name.to_string());
        cert.notes.push(format!("{name} failed: {e}"));
    };

    let g_scan = match kernel_double_conv_sup(sys.a(), alpha, grid) {
        Ok(r) => r,
        Err(e) => {
            stage(&mut cert, "kernel_double_conv", e);
            return Ok(cert);
        }
    };
    cert.q_threshold = Some(1.0 / g_scan.sup);
    let g_sup = g_scan.sup;
    let g_stab = g_scan.stabilized;
    cert.g_sup = Some(g_scan);

    match kernel_tail_bound(sys.a(), alpha, TAIL_T0, grid) {
        Ok(tb) => {
            if tb.max_at_right_end && !tb.stabilized {
                cert.notes
                    .push("warning: kernel tail bound still growing at t_max".into());
            }
            cert.lemma_m = Some(tb);
        }
        Err(e) => cert.notes.push(format!("kernel tail bound failed: {e}")),
    }

    let forcing = match g_forcing_bound(sys, grid) {
        Ok(r) => r,
        Err(e) => {
            stage(&mut cert, "g_forcing_bound", e);
            return Ok(cert);
        }
    };
    let forcing_ok = forcing.stabilized;
    if !forcing_ok {
        cert.notes.push("g_bound not stabilized under horizon doubling".into());
    }
    cert.g_bound = Some(forcing);

    let q = match contraction_q(sys, grid) {
        Ok(r) => r,
        Err(e) => {
            stage(&mut cert, "contraction_q", e);
            return Ok(cert);
        }
    };
    match contraction_q_unweighted(sys, grid) {
        Ok(u) => {
            cert.notes.push(format!(
                "unweighted q (integrand without tau^(alpha-1)) = {:e}{}",
                u.sup,
                if u.stabilized { "" } else { " (not stabilized)" }
            ));
            cert.q_unweighted = Some(u.sup);
        }
        Err(e) => cert.notes.push(format!("unweighted q failed: {e}")),
    }
    let q_val = q.sup;
    let q_stab = q.stabilized;
    cert.q = Some(q);

    if q_val < 1.0 && q_stab && forcing_ok && g_stab {
        cert.verdict = Verdict::CertifiedThm2;
        cert.stabilized = true;
        return Ok(cert);
    }

    let decay = match decay_check(sys, grid, g_sup) {
        Ok(d) => d,
        Err(e) => {
            stage(&mut cert, "decay_check", e);
            return Ok(cert);
        }
    };
    let verified = decay.decay_verified;
    cert.theorem3 = Some(decay);
    if verified && forcing_ok && g_stab {
        cert.verdict = Verdict::CertifiedThm3;
        cert.stabilized = true;
    } else {
        cert.failing_stage = Some(if !forcing_ok || !g_stab {
            "stabilization".into()
        } else {
            "decay_check".into()
        });
        cert.stabilized = forcing_ok && g_stab && q_stab;
    }
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QinSample {
    pub t: f64,
    /// |||t^{α−1} E_{α,α}(t^α A)|||
    pub value: f64,
    /// Leading term t^{α−1}/Γ(α)·|||I|||.
    pub predicted: f64,
}

/// Kernel norms on t = t_min·4^k ≤ 1, showing the t^{α−1} blow-up at 0.
pub fn qin_probe(a: &DMatrix<f64>, alpha: f64, t_min: f64, norm: Norm) -> Result<Vec<QinSample>> {
    check_square(a, "A")?;
    if !(t_min > 0.0 && t_min < 1.0) {
        return Err(Error::domain(format!("t_min must lie in (0, 1), got {t_min}")));
    }
    let ml = MatrixMl::new(a)?;
    let n = a.nrows();
    let id_norm = norm.matrix(&DMatrix::identity(n, n));
    let ga = gamma(alpha)?;
    let mut out = Vec::new();
    let mut t = t_min;
    while t <= 1.0 {
        let k = ml.kernel(alpha, t, DEFAULT_ML_TOL)?;
        out.push(QinSample {
            t,
            value: norm.matrix(&k),
            predicted: t.powf(alpha - 1.0) / ga * id_norm,
        });
        t *= 4.0;
    }
    Ok(out)
}
