//! Initial-value problems D^α x = f(t, x), lim_{t→0} t^{1−α} x(t) = x₀.
//!
//! The problem is solved as the equivalent integral equation in the weighted
//! unknown y(t) = t^{1−α} x(t):
//!
//! y(t) = x₀ + t^{1−α}/Γ(α) ∫₀ᵗ (t−τ)^{α−1} τ^{α−1} F(τ, y(τ)) dτ,
//! F(τ, y) = τ^{1−α} f(τ, τ^{α−1} y),
//!
//! discretized by product integration on a graded mesh. Each step is implicit
//! in y(t_j) and solved by (damped) fixed-point iteration.
//!
//! Convention: the weighted initial value is x₀, so the homogeneous linear
//! solution is x(t) = Γ(α) t^{α−1} E_{α,α}(t^α A) x₀.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::attractivity::LinearSystem;
use crate::error::{Error, Result};
use crate::linalg::Norm;
use crate::quadrature::{rl_derivative_defects, weights_double, GradedMesh, ProductKernel};
use crate::special::{gamma, MatrixMl, MlIndex};

/// Right-hand side f(t, x) of the differential equation.
pub trait Rhs: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>>;

    /// lim_{τ→0} τ^{1−α} f(τ, τ^{α−1} y), when it is known in closed form.
    /// Otherwise the solver uses the value at the first positive node.
    fn weighted_limit_at_zero(&self, _alpha: f64, _y: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// Adapter turning a closure into an [`Rhs`].
pub struct FnRhs<F> {
    dim: usize,
    f: F,
}

impl<F> FnRhs<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Rhs for FnRhs<F>
where
    F: Fn(f64, &[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(t, x))
    }
}

/// f(t, x) = −x³ componentwise.
#[derive(Debug, Clone, Copy)]
pub struct NegativeCube {
    pub dim: usize,
}

impl Rhs for NegativeCube {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _t: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(x.iter().map(|v| -v * v * v).collect())
    }
}

/// f ≡ 0.
#[derive(Debug, Clone, Copy)]
pub struct ZeroRhs {
    pub dim: usize,
}

impl Rhs for ZeroRhs {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _t: f64, _x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.dim])
    }

    fn weighted_limit_at_zero(&self, _alpha: f64, _y: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }
}

pub struct IvProblem<'a> {
    pub alpha: f64,
    pub x0: Vec<f64>,
    pub rhs: &'a dyn Rhs,
    /// Constant L with ‖f(t,x) − f(t,y)‖ ≤ L ‖x − y‖.
    pub lipschitz: Option<f64>,
}

impl<'a> IvProblem<'a> {
    pub fn new(alpha: f64, x0: Vec<f64>, rhs: &'a dyn Rhs) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("order must lie in (0, 1), got {alpha}")));
        }
        if x0.len() != rhs.dim() {
            return Err(Error::Input(format!(
                "x0 has {} components, right-hand side has dimension {}",
                x0.len(),
                rhs.dim()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("x0 must be finite".into()));
        }
        Ok(Self {
            alpha,
            x0,
            rhs,
            lipschitz: None,
        })
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    /// F(τ, y) = τ^{1−α} f(τ, τ^{α−1} y) for τ > 0.
    fn weighted_rhs(&self, tau: f64, y: &[f64]) -> Result<Vec<f64>> {
        let up = tau.powf(self.alpha - 1.0);
        let x: Vec<f64> = y.iter().map(|v| v * up).collect();
        let down = tau.powf(1.0 - self.alpha);
        Ok(self.rhs.eval(tau, &x)?.into_iter().map(|v| v * down).collect())
    }

    fn weighted_rhs_at_zero(&self, t1: f64, y: &[f64]) -> Result<Vec<f64>> {
        match self.rhs.weighted_limit_at_zero(self.alpha, y) {
            Some(v) => Ok(v),
            None => self.weighted_rhs(t1, y),
        }
    }
}

/// Samples of y(t) = t^{1−α} x(t) on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTrajectory {
    alpha: f64,
    mesh: GradedMesh,
    y: Vec<Vec<f64>>,
}

impl WeightedTrajectory {
    pub fn new(alpha: f64, mesh: GradedMesh, y: Vec<Vec<f64>>) -> Self {
        Self { alpha, mesh, y }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mesh(&self) -> &GradedMesh {
        &self.mesh
    }

    /// Number of computed nodes; equals the mesh node count unless the
    /// trajectory is a partial result.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.y.first().map_or(0, |v| v.len())
    }

    pub fn t(&self, j: usize) -> f64 {
        self.mesh.nodes()[j]
    }

    pub fn y_at(&self, j: usize) -> &[f64] {
        &self.y[j]
    }

    /// x(t_j) = t_j^{α−1} y(t_j); infinite components at t = 0 unless y is 0.
    pub fn x_at(&self, j: usize) -> Vec<f64> {
        let t = self.t(j);
        let s = t.powf(self.alpha - 1.0);
        self.y[j].iter().map(|v| if *v == 0.0 { 0.0 } else { v * s }).collect()
    }

    pub fn y_values(&self) -> &[Vec<f64>] {
        &self.y
    }

    /// Index of the last node with t_j ≤ t.
    pub fn index_at_or_before(&self, t: f64) -> usize {
        let nodes = &self.mesh.nodes()[..self.y.len()];
        nodes.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// Multiplies every sample by c.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            alpha: self.alpha,
            mesh: self.mesh.clone(),
            y: self.y.iter().map(|v| v.iter().map(|x| x * c).collect()).collect(),
        }
    }
}

/// Exponentially weighted norm sup_t t^{1−α}‖x(t)‖ e^{−γt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BieleckiNorm {
    gamma: f64,
}

impl BieleckiNorm {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::domain(format!("Bielecki weight must be positive, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

pub fn bielecki_norm(traj: &WeightedTrajectory, nrm: BieleckiNorm, norm: Norm) -> f64 {
    (0..traj.len())
        .map(|j| norm.vector(traj.y_at(j)) * (-nrm.gamma * traj.t(j)).exp())
        .fold(0.0, f64::max)
}

pub fn weighted_sup_norm(traj: &WeightedTrajectory, norm: Norm) -> f64 {
    traj.y.iter().map(|v| norm.vector(v)).fold(0.0, f64::max)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves the weighted integral equation on `mesh`. At every node the fixed
/// point iteration stops once successive iterates differ by at most
/// tol·(1 + |y|∞).
pub fn solve_ivp(p: &IvProblem<'_>, mesh: &GradedMesh, tol: f64, max_inner: usize) -> Result<WeightedTrajectory> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let alpha = p.alpha;
    let nodes = mesh.nodes();
    let w = weights_double(alpha, mesh)?;
    let ga = gamma(alpha)?;
    let s = p.x0.len();

    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    let mut fs: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    ys.push(p.x0.clone());
    fs.push(p.weighted_rhs_at_zero(nodes[1], &p.x0)?);

    for j in 1..nodes.len() {
        let t = nodes[j];
        let c = t.powf(1.0 - alpha) / ga;
        let row = w.row(j);
        let mut base = p.x0.clone();
        for (wk, fk) in row[..j].iter().zip(&fs) {
            for i in 0..s {
                base[i] += c * wk * fk[i];
            }
        }
        let diag = c * row[j];

        let mut y = ys[j - 1].clone();
        let mut omega = 1.0;
        let mut prev_defect = f64::INFINITY;
        let mut converged = false;
        let mut defect = f64::INFINITY;
        for _ in 0..max_inner {
            let f = p.weighted_rhs(t, &y)?;
            let next: Vec<f64> = (0..s).map(|i| base[i] + diag * f[i]).collect();
            defect = max_diff(&next, &y);
            if !defect.is_finite() {
                break;
            }
            if defect <= tol * (1.0 + max_abs(&next)) {
                y = next;
                converged = true;
                break;
            }
            if defect > 0.9 * prev_defect && omega > 1.0 / 32.0 {
                omega *= 0.5;
            }
            prev_defect = defect;
            for i in 0..s {
                y[i] += omega * (next[i] - y[i]);
            }
        }
        if !converged {
            return Err(Error::Convergence {
                node: j,
                t,
                defect,
                partial: Box::new(WeightedTrajectory::new(alpha, mesh.clone(), ys)),
            });
        }
        fs.push(p.weighted_rhs(t, &y)?);
        ys.push(y);
    }
    Ok(WeightedTrajectory::new(alpha, mesh.clone(), ys))
}

/// Largest rl_derivative_residual defect over the components of a solver
/// trajectory of `rhs`.
pub fn trajectory_residual(traj: &WeightedTrajectory, rhs: &dyn Rhs) -> Result<f64> {
    Ok(trajectory_defects(traj, rhs)?.into_iter().fold(0.0, f64::max))
}

/// Per-node defects of [`trajectory_residual`], maximised over components.
pub fn trajectory_defects(traj: &WeightedTrajectory, rhs: &dyn Rhs) -> Result<Vec<f64>> {
    let alpha = traj.alpha();
    let mesh = traj.mesh();
    if traj.len() != mesh.nodes().len() {
        return Err(Error::domain("residual needs a complete trajectory"));
    }
    let n = traj.len();
    let xs: Vec<Vec<f64>> = (0..n).map(|j| traj.x_at(j)).collect();
    let mut fs: Vec<Vec<f64>> = Vec::with_capacity(n);
    // x and f are singular at t = 0; the residual extrapolates there.
    fs.push(vec![f64::NAN; traj.dim()]);
    for (j, x) in xs.iter().enumerate().skip(1) {
        fs.push(rhs.eval(traj.t(j), x)?);
    }
    let mut worst = vec![0.0_f64; n];
    for i in 0..traj.dim() {
        let mut x: Vec<f64> = xs.iter().map(|v| v[i]).collect();
        x[0] = f64::NAN;
        let f: Vec<f64> = fs.iter().map(|v| v[i]).collect();
        for (w, d) in worst.iter_mut().zip(rl_derivative_defects(alpha, mesh, &x, &f)?) {
            *w = w.max(d);
        }
    }
    Ok(worst)
}

/// E_{α,α}(uA) tabulated on a uniform grid in u and interpolated by cubic
/// Lagrange polynomials. The function is entire in u, so the spacing is
/// halved until midpoint checks against direct evaluation meet `tol`.
struct ResolventTable {
    du: f64,
    s2: usize,
    len: usize,
    values: Vec<f64>,
}

const TABLE_MAX_ENTRIES: usize = 1 << 24;
const TABLE_CHECKS: usize = 256;

impl ResolventTable {
    fn build(ml: &MatrixMl, alpha: f64, u_max: f64, tol: f64) -> Result<Self> {
        let idx = MlIndex::new(alpha, alpha)?;
        let s2 = ml.dim() * ml.dim();
        let rho = Norm::Inf.matrix(ml.matrix()).max(1e-3);
        let mut du = (0.02 / rho).min(u_max / 8.0);
        loop {
            let len = (u_max / du).ceil() as usize + 3;
            if len * s2 > TABLE_MAX_ENTRIES {
                return Err(Error::Accuracy {
                    requested: tol,
                    estimate: f64::NAN,
                    context: "resolvent table exceeds its size limit".into(),
                });
            }
            let rows: Vec<DMatrix<f64>> = (0..len)
                .into_par_iter()
                .map(|i| ml.eval(idx, i as f64 * du, tol))
                .collect::<Result<_>>()?;
            let mut values = Vec::with_capacity(len * s2);
            for r in &rows {
                values.extend_from_slice(r.as_slice());
            }
            let table = Self { du, s2, len, values };
            let step = ((len - 1) / TABLE_CHECKS).max(1);
            let mut buf = vec![0.0; s2];
            let mut worst: f64 = 0.0;
            for i in (0..len - 1).step_by(step) {
                let u = (i as f64 + 0.5) * du;
                let exact = ml.eval(idx, u, tol)?;
                table.interp(u, &mut buf);
                let scale = 1.0 + exact.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                for (a, b) in buf.iter().zip(exact.iter()) {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
            if worst <= tol {
                return Ok(table);
            }
            du *= 0.5;
        }
    }

    fn interp(&self, u: f64, out: &mut [f64]) {
        let x = u / self.du;
        let i = (x.floor() as usize).clamp(1, self.len - 3);
        let f = x - i as f64;
        // Lagrange basis on the stencil -1, 0, 1, 2.
        let l = [
            -f * (f - 1.0) * (f - 2.0) / 6.0,
            (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
            -(f + 1.0) * f * (f - 2.0) / 2.0,
            (f + 1.0) * f * (f - 1.0) / 6.0,
        ];
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, lk) in l.iter().enumerate() {
            let row = &self.values[(i - 1 + k) * self.s2..(i + k) * self.s2];
            for (o, v) in out.iter_mut().zip(row) {
                *o += lk * v;
            }
        }
    }
}

/// Σ over panels [t_i, t_{i+1}], i < last, of ∫ k(τ) E((t−τ)^α A) v(τ) dτ
/// with v linear between the nodal values `v`. Returns the vector sum and
/// the matrix ∫ k E φ_last over the final panel for the implicit node.
fn voc_row(
    kernel: &ProductKernel,
    table: &ResolventTable,
    alpha: f64,
    nodes: &[f64],
    j: usize,
    v: &[DVector<f64>],
    include_last: bool,
) -> (DVector<f64>, DMatrix<f64>) {
    let s = v[0].len();
    let t = nodes[j];
    let panel = |i: usize, acc: &mut Vec<f64>, pts: &mut Vec<(f64, f64)>, e: &mut Vec<f64>, last: &mut Vec<f64>| {
        let (lo, hi) = (nodes[i], nodes[i + 1]);
        let h = hi - lo;
        pts.clear();
        kernel.emit(t, lo, hi, pts);
        for &(tau, w) in pts.iter() {
            let l = (tau - lo) / h;
            table.interp((t - tau).max(0.0).powf(alpha), e);
            for c in 0..s {
                for r in 0..s {
                    let m = e[c * s + r] * w;
                    acc[r] += m * (1.0 - l) * v[i][c];
                    if i + 1 < j || include_last {
                        acc[r] += m * l * v[i + 1][c];
                    }
                    if i + 1 == j {
                        last[c * s + r] += m * l;
                    }
                }
            }
        }
    };
    let (acc, last) = (0..j)
        .into_par_iter()
        .fold(
            || (vec![0.0; s], vec![0.0; s * s], Vec::new(), vec![0.0; s * s]),
            |(mut acc, mut last, mut pts, mut e), i| {
                panel(i, &mut acc, &mut pts, &mut e, &mut last);
                (acc, last, pts, e)
            },
        )
        .map(|(acc, last, _, _)| (acc, last))
        .reduce(
            || (vec![0.0; s], vec![0.0; s * s]),
            |(mut a, mut la), (b, lb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                la.iter_mut().zip(&lb).for_each(|(x, y)| *x += y);
                (a, la)
            },
        );
    (DVector::from_vec(acc), DMatrix::from_vec(s, s, last))
}

/// Variation-of-constants solution of D^α x = Ax + Q(t)x + g(t):
///
/// y(t) = Γ(α) E_{α,α}(t^α A) x₀
///      + t^{1−α} ∫ (t−τ)^{α−1} E_{α,α}((t−τ)^α A) τ^{α−1} Q(τ) y(τ) dτ
///      + t^{1−α} ∫ (t−τ)^{α−1} E_{α,α}((t−τ)^α A) g(τ) dτ.
///
/// Q·y and g are interpolated linearly between nodes; the kernel including
/// the Mittag-Leffler factor is integrated by Gauss rules on each panel.
/// Each step is a linear solve. `tol` is the Mittag-Leffler accuracy.
pub fn solve_linear_voc(sys: &LinearSystem, x0: &[f64], mesh: &GradedMesh, tol: f64) -> Result<WeightedTrajectory> {
    let alpha = sys.alpha();
    let s = sys.dim();
    if x0.len() != s {
        return Err(Error::Input(format!("x0 has {} components, system has {s}", x0.len())));
    }
    let ml_tol = tol.clamp(1e-12, 1e-6);
    let nodes = mesh.nodes();
    let ga = gamma(alpha)?;
    let ml = MatrixMl::new(sys.a())?;
    let idx = MlIndex::new(alpha, alpha)?;
    let table = ResolventTable::build(&ml, alpha, mesh.horizon().powf(alpha), ml_tol)?;
    let kq = ProductKernel::new(alpha, alpha)?;
    let kg = ProductKernel::new(alpha, 1.0)?;
    let x0v = DVector::from_column_slice(x0);

    let qs: Vec<DMatrix<f64>> = nodes.iter().map(|&t| sys.q().eval(t)).collect::<Result<_>>()?;
    let gs: Option<Vec<DVector<f64>>> = if sys.g().is_zero() {
        None
    } else {
        Some(nodes.iter().map(|&t| sys.g().eval(t)).collect::<Result<_>>()?)
    };

    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(nodes.len());
    let mut qy: Vec<DVector<f64>> = Vec::with_capacity(nodes.len());
    ys.push(x0v.clone());
    qy.push(&qs[0] * &x0v);

    for j in 1..nodes.len() {
        let t = nodes[j];
        let c = t.powf(1.0 - alpha);
        let mut rhs = ml.eval(idx, t.powf(alpha), ml_tol)? * &x0v * ga;
        let (conv, last) = voc_row(&kq, &table, alpha, nodes, j, &qy, false);
        rhs += conv * c;
        if let Some(gs) = &gs {
            let (conv, _) = voc_row(&kg, &table, alpha, nodes, j, gs, true);
            rhs += conv * c;
        }
        let local = &qs[j] * (last * c);
        let reach = local
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if reach >= 1.0 {
            return Err(Error::Numerical(format!(
                "step at t = {t:e} does not resolve Q: local weight times ‖Q‖ is {reach:.3e}, refine the mesh"
            )));
        }
        let lhs = DMatrix::<f64>::identity(s, s) - local;
        let y = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical(format!("singular step matrix at t = {t:e}")))?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Convergence {
                node: j,
                t,
                defect: f64::INFINITY,
                partial: Box::new(WeightedTrajectory::new(
                    alpha,
                    mesh.clone(),
                    ys.iter().map(|v| v.as_slice().to_vec()).collect(),
                )),
            });
        }
        qy.push(&qs[j] * &y);
        ys.push(y);
    }
    Ok(WeightedTrajectory::new(
        alpha,
        mesh.clone(),
        ys.iter().map(|v| v.as_slice().to_vec()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// d_k = ‖ξ_{k+1} − ξ_k‖ in the Bielecki norm.
    pub distances: Vec<f64>,
    /// d_{k+1}/d_k.
    pub ratios: Vec<f64>,
    /// L·2^{2−α}/γ^α when a Lipschitz constant was given.
    pub bound: Option<f64>,
}

/// Runs the Picard iteration ξ_{k+1} = x₀t^{α−1} + I^α f(·, ξ_k) from
/// ξ₀ = x₀t^{α−1} and records Bielecki distances between iterates. Stops early
/// once the distance reaches rounding level.
pub fn picard_diagnostics(p: &IvProblem<'_>, mesh: &GradedMesh, gamma_w: f64, n_iters: usize) -> Result<PicardReport> {
    let nrm = BieleckiNorm::new(gamma_w)?;
    let alpha = p.alpha;
    let nodes = mesh.nodes();
    let w = weights_double(alpha, mesh)?;
    let ga = gamma(alpha)?;
    let s = p.x0.len();
    let bound = p.lipschitz.map(|l| l * 2f64.powf(2.0 - alpha) / gamma_w.powf(alpha));

    let weights_exp: Vec<f64> = nodes.iter().map(|&t| (-nrm.gamma * t).exp()).collect();
    let mut cur: Vec<Vec<f64>> = vec![p.x0.clone(); nodes.len()];
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut over = 0;
    for _ in 0..n_iters {
        let mut fs = Vec::with_capacity(nodes.len());
        fs.push(p.weighted_rhs_at_zero(nodes[1], &cur[0])?);
        for j in 1..nodes.len() {
            fs.push(p.weighted_rhs(nodes[j], &cur[j])?);
        }
        let next: Vec<Vec<f64>> = (0..nodes.len())
            .into_par_iter()
            .map(|j| {
                let mut y = p.x0.clone();
                if j > 0 {
                    let c = nodes[j].powf(1.0 - alpha) / ga;
                    for (wk, fk) in w.row(j).iter().zip(&fs) {
                        for i in 0..s {
                            y[i] += c * wk * fk[i];
                        }
                    }
                }
                y
            })
            .collect();
        let d = (0..nodes.len())
            .map(|j| {
                let diff: Vec<f64> = next[j].iter().zip(&cur[j]).map(|(a, b)| a - b).collect();
                Norm::Two.vector(&diff) * weights_exp[j]
            })
            .fold(0.0, f64::max);
        let scale = (0..nodes.len())
            .map(|j| Norm::Two.vector(&next[j]) * weights_exp[j])
            .fold(0.0, f64::max);
        if let Some(&last) = distances.last() {
            let r: f64 = d / last;
            ratios.push(r);
            if r > 1.0 && bound.is_some_and(|b| b < 1.0) {
                over += 1;
                if over >= 3 {
                    return Err(Error::InvariantViolation(format!(
                        "Picard iteration diverges: three consecutive ratios above 1 (last {r:.3}) \
                         although the contraction bound is {:.3}",
                        bound.unwrap_or(f64::NAN)
                    )));
                }
            } else {
                over = 0;
            }
        }
        distances.push(d);
        cur = next;
        if d <= 1e-13 * (1.0 + scale) {
            break;
        }
    }
    Ok(PicardReport {
        distances,
        ratios,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ml_real;

    #[test]
    fn zero_rhs_keeps_weighted_value() {
        let rhs = ZeroRhs { dim: 2 };
        let p = IvProblem::new(0.6, vec![1.0, -2.0], &rhs).unwrap();
        let mesh = GradedMesh::new(5.0, 32, 2.0).unwrap();
        let traj = solve_ivp(&p, &mesh, 1e-12, 50).unwrap();
        for j in 0..traj.len() {
            assert_eq!(traj.y_at(j), &[1.0, -2.0]);
        }
        assert_eq!(weighted_sup_norm(&traj, Norm::Two), 5f64.sqrt());
        assert_eq!(weighted_sup_norm(&traj.scaled(2.0), Norm::Two), 2.0 * 5f64.sqrt());
    }

    #[test]
    fn linear_decay_matches_mittag_leffler() {
        let rhs = FnRhs::new(1, |_t, x: &[f64]| vec![-x[0]]);
        let p = IvProblem::new(0.5, vec![1.0], &rhs).unwrap();
        let mesh = GradedMesh::new(2.0, 256, 4.0).unwrap();
        let traj = solve_ivp(&p, &mesh, 1e-12, 100).unwrap();
        let idx = MlIndex::new(0.5, 0.5).unwrap();
        let g = gamma(0.5).unwrap();
        let err = (0..traj.len())
            .map(|j| {
                let t = traj.t(j);
                let exact = g * ml_real(idx, -t.sqrt(), 1e-12).unwrap();
                (traj.y_at(j)[0] - exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "error {err}");
    }

    #[test]
    fn solver_is_deterministic() {
        let rhs = NegativeCube { dim: 1 };
        let p = IvProblem::new(0.8, vec![1.0], &rhs).unwrap();
        let mesh = GradedMesh::new(2.0, 64, 2.5).unwrap();
        let a = solve_ivp(&p, &mesh, 1e-10, 200).unwrap();
        let b = solve_ivp(&p, &mesh, 1e-10, 200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn convergence_failure_reports_partial_trajectory() {
        let rhs = FnRhs::new(1, |_t, x: &[f64]| vec![x[0] * x[0] * x[0] * 50.0]);
        let p = IvProblem::new(0.5, vec![3.0], &rhs).unwrap();
        let mesh = GradedMesh::new(5.0, 64, 4.0).unwrap();
        match solve_ivp(&p, &mesh, 1e-10, 30) {
            Err(Error::Convergence { node, partial, .. }) => {
                assert!(node >= 1);
                assert_eq!(partial.len(), node);
            }
            other => panic!("expected convergence error, got {:?}", other.map(|t| t.len())),
        }
    }

    #[test]
    fn bielecki_norm_cases() {
        let mesh = GradedMesh::new(3.0, 8, 1.0).unwrap();
        let c = BieleckiNorm::new(0.7).unwrap();
        let flat = WeightedTrajectory::new(0.5, mesh.clone(), vec![vec![2.0]; 9]);
        assert_eq!(bielecki_norm(&flat, c, Norm::Two), 2.0);
        let grow = WeightedTrajectory::new(
            0.5,
            mesh.clone(),
            mesh.nodes().iter().map(|t| vec![3.0 * (0.7 * t).exp()]).collect(),
        );
        assert!((bielecki_norm(&grow, c, Norm::Two) - 3.0).abs() < 1e-14);
        assert!(BieleckiNorm::new(0.0).is_err());
    }

    #[test]
    fn picard_constant_rhs_reaches_fixed_point() {
        let rhs = FnRhs::new(1, |_t, _x: &[f64]| vec![2.0]);
        let p = IvProblem::new(0.5, vec![1.0], &rhs).unwrap();
        let mesh = GradedMesh::new(1.0, 32, 4.0).unwrap();
        let rep = picard_diagnostics(&p, &mesh, 4.0, 5).unwrap();
        assert!(rep.distances[0] > 0.0);
        assert!(rep.distances[1] == 0.0);
    }

    #[test]
    fn rejects_bad_problems() {
        let rhs = ZeroRhs { dim: 1 };
        assert!(IvProblem::new(1.0, vec![1.0], &rhs).is_err());
        assert!(IvProblem::new(0.5, vec![1.0, 2.0], &rhs).is_err());
        assert!(IvProblem::new(0.5, vec![f64::NAN], &rhs).is_err());
    }
}
