//! Graded meshes and product-integration weights for weakly singular
//! convolutions
//!
//! The weights integrate the kernel k(τ) = (t−τ)^{a−1} τ^{b−1} exactly (to
//! quadrature accuracy) against the piecewise-linear hat functions of a mesh,
//! so that Σ_k w_k φ(t_k) = ∫₀ᵗ k(τ) φ̂(τ) dτ where φ̂ interpolates φ.
//!
//! Panel moments are computed by recursive subdivision: pieces that touch a
//! singular endpoint use Gauss–Jacobi with the matching power weight, pieces
//! well separated from both singularities use Gauss–Legendre, everything else
//! is bisected. The one-panel case [0, t] is the Beta integral.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{beta, gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// t_j = T (j/N)^p, clustered at 0.
    OneSided,
    /// Graded towards both 0 and T; used where the integrand is rough at
    /// both ends of the integration range.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    horizon: f64,
    grading: f64,
    kind: MeshKind,
    nodes: Vec<f64>,
}

impl GradedMesh {
    pub fn new(horizon: f64, n: usize, grading: f64) -> Result<Self> {
        Self::validate(horizon, n, grading)?;
        let nodes = (0..=n)
            .map(|j| {
                if j == n {
                    horizon
                } else {
                    horizon * (j as f64 / n as f64).powf(grading)
                }
            })
            .collect();
        Ok(Self {
            horizon,
            grading,
            kind: MeshKind::OneSided,
            nodes,
        })
    }

    /// Mesh symmetric about T/2, each half graded with exponent p towards its
    /// outer end. `n` must be even. Nodes within 64 ulp of T are omitted, so
    /// strongly graded meshes can have fewer than `n` intervals.
    pub fn two_sided(horizon: f64, n: usize, grading: f64) -> Result<Self> {
        Self::validate(horizon, n, grading)?;
        if !n.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "two-sided mesh needs an even node count, got {n}"
            )));
        }
        let half = n / 2;
        let mut nodes: Vec<f64> = (0..=half)
            .map(|j| 0.5 * horizon * (j as f64 / half as f64).powf(grading))
            .collect();
        // Near T the gaps are limited by the spacing of doubles around T;
        // nodes closer to T than that would collapse, so they are dropped.
        let min_gap = 64.0 * f64::EPSILON * horizon;
        for j in half + 1..n {
            let d = 0.5 * horizon * ((n - j) as f64 / half as f64).powf(grading);
            if d >= min_gap {
                nodes.push(horizon - d);
            }
        }
        nodes.push(horizon);
        Ok(Self {
            horizon,
            grading,
            kind: MeshKind::TwoSided,
            nodes,
        })
    }

    fn validate(horizon: f64, n: usize, grading: f64) -> Result<()> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::domain(format!("mesh horizon must be positive, got {horizon}")));
        }
        if n < 2 {
            return Err(Error::domain(format!("mesh needs at least 2 intervals, got {n}")));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::domain(format!("mesh grading must be >= 1, got {grading}")));
        }
        Ok(())
    }

    /// max(2, 2/α).
    pub fn default_grading(alpha: f64) -> f64 {
        (2.0 / alpha).max(2.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Number of intervals N (there are N+1 nodes).
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Gauss rule for ∫₀¹ x^c g(x) dx.
#[derive(Debug, Clone)]
pub(crate) struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    /// Golub–Welsch on the Jacobi matrix of the weight (1+y)^c on [−1, 1],
    /// mapped to [0, 1].
    pub(crate) fn jacobi01(n: usize, c: f64) -> Result<Self> {
        if !(c > -1.0) {
            return Err(Error::domain(format!("Gauss-Jacobi exponent must exceed -1, got {c}")));
        }
        // Jacobi parameters: (1-y)^a (1+y)^b with a = 0, b = c.
        let (a, b) = (0.0_f64, c);
        let mut jm = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let k = i as f64;
            let s = 2.0 * k + a + b;
            jm[(i, i)] = if i == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            if i + 1 < n {
                let k1 = k + 1.0;
                let s1 = 2.0 * k1 + a + b;
                let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b);
                let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
                let off = (num / den).sqrt();
                jm[(i, i + 1)] = off;
                jm[(i + 1, i)] = off;
            }
        }
        let mu0 = 2f64.powf(a + b + 1.0) * gamma(a + 1.0)? * gamma(b + 1.0)? / gamma(a + b + 2.0)?;
        let eig = SymmetricEigen::new(jm);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let y = eig.eigenvalues[i];
                let v0 = eig.eigenvectors[(0, i)];
                // Map to [0, 1]: x = (1+y)/2, (1+y)^c = 2^c x^c, dy = 2 dx.
                ((1.0 + y) / 2.0, mu0 * v0 * v0 / 2f64.powf(c + 1.0))
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }
}

const LEGENDRE_POINTS: usize = 8;
const JACOBI_POINTS: usize = 16;

/// Kernel (t−τ)^{a−1} τ^{b−1} with a, b ∈ (0, 1].
#[derive(Debug, Clone)]
pub(crate) struct ProductKernel {
    a: f64,
    b: f64,
    legendre: GaussRule,
    left: Option<GaussRule>,
    right: Option<GaussRule>,
    substitution: GaussRule,
}

fn pow_m1(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        1.0
    } else {
        x.powf(e - 1.0)
    }
}

impl ProductKernel {
    pub(crate) fn new(a: f64, b: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::domain(format!(
                    "kernel exponent {name} must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(Self {
            a,
            b,
            legendre: GaussRule::jacobi01(LEGENDRE_POINTS, 0.0)?,
            left: if b < 1.0 {
                Some(GaussRule::jacobi01(JACOBI_POINTS, b - 1.0)?)
            } else {
                None
            },
            right: if a < 1.0 {
                Some(GaussRule::jacobi01(JACOBI_POINTS, a - 1.0)?)
            } else {
                None
            },
            substitution: GaussRule::jacobi01(JACOBI_POINTS, 0.0)?,
        })
    }

    /// (∫ k, ∫ k·(τ−τ0)) over [lo, hi] ⊂ [0, t].
    fn piece(&self, t: f64, lo: f64, hi: f64, tau0: f64) -> (f64, f64) {
        let w = hi - lo;
        if w <= 0.0 {
            return (0.0, 0.0);
        }
        let touches_left = self.left.is_some() && lo == 0.0;
        let touches_right = self.right.is_some() && hi == t;
        let dl = if self.left.is_some() { lo } else { f64::INFINITY };
        let dr = if self.right.is_some() { t - hi } else { f64::INFINITY };
        let t_minus_lo = t - lo;

        if touches_left && touches_right {
            // Whole range [0, t]: Beta integrals.
            let s = t.powf(self.a + self.b - 1.0);
            let m0 = s * beta(self.a, self.b).unwrap_or(f64::NAN);
            let m_tau = s * t * beta(self.a, self.b + 1.0).unwrap_or(f64::NAN);
            return (m0, m_tau - tau0 * m0);
        }
        if touches_left && dr >= w {
            let rule = self.left.as_ref().unwrap();
            let scale = w.powf(self.b);
            let (mut m0, mut m1) = (0.0, 0.0);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let tau = w * x;
                let k = wt * pow_m1(t_minus_lo - tau, self.a);
                m0 += k;
                m1 += k * (tau - tau0);
            }
            return (scale * m0, scale * m1);
        }
        if touches_right && dl >= w {
            let rule = self.right.as_ref().unwrap();
            let scale = w.powf(self.a);
            let (mut m0, mut m1) = (0.0, 0.0);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let d = w * x;
                let tau = hi - d;
                let k = wt * pow_m1(tau, self.b);
                m0 += k;
                m1 += k * (tau - tau0);
            }
            return (scale * m0, scale * m1);
        }
        if !touches_left && !touches_right && dl.min(dr) >= 2.0 * w {
            let (mut m0, mut m1) = (0.0, 0.0);
            for (x, wt) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                let off = w * x;
                let tau = lo + off;
                let k = wt * pow_m1(t_minus_lo - off, self.a) * pow_m1(tau, self.b);
                m0 += k;
                m1 += k * (tau - tau0);
            }
            return (w * m0, w * m1);
        }
        let mid = lo + 0.5 * w;
        let l = self.piece(t, lo, mid, tau0);
        let r = self.piece(t, mid, hi, tau0);
        (l.0 + r.0, l.1 + r.1)
    }

    /// Quadrature nodes (τ, weight) for ∫ k(τ) F(τ) dτ over [lo, hi] ⊂ [0, t]
    /// where F may contain powers (t−τ)^{a·m}. Next to τ = t the substitution
    /// t − τ = w·u^{1/a} makes such F smooth in u.
    pub(crate) fn emit(&self, t: f64, lo: f64, hi: f64, out: &mut Vec<(f64, f64)>) {
        let w = hi - lo;
        if w <= 0.0 {
            return;
        }
        let touches_left = self.left.is_some() && lo == 0.0;
        let touches_right = self.right.is_some() && hi == t;
        let dl = if self.left.is_some() { lo } else { f64::INFINITY };
        let dr = if self.right.is_some() { t - hi } else { f64::INFINITY };

        if touches_left && !touches_right && dr >= w {
            let rule = self.left.as_ref().unwrap();
            let scale = w.powf(self.b);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                let tau = w * x;
                out.push((tau, scale * wt * pow_m1(t - tau, self.a)));
            }
            return;
        }
        if touches_right && !touches_left && dl >= w {
            let scale = w.powf(self.a) / self.a;
            let inv = 1.0 / self.a;
            for (u, wt) in self.substitution.nodes.iter().zip(&self.substitution.weights) {
                let tau = hi - w * u.powf(inv);
                out.push((tau, scale * wt * pow_m1(tau, self.b)));
            }
            return;
        }
        if !touches_left && !touches_right && dl.min(dr) >= 2.0 * w {
            for (x, wt) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
                let tau = lo + w * x;
                out.push((tau, w * wt * pow_m1(t - tau, self.a) * pow_m1(tau, self.b)));
            }
            return;
        }
        let mid = lo + 0.5 * w;
        self.emit(t, lo, mid, out);
        self.emit(t, mid, hi, out);
    }

    /// Weights for the hat functions of nodes[0..=j] with t = nodes[j].
    pub(crate) fn row(&self, nodes: &[f64], j: usize) -> Vec<f64> {
        let mut w = vec![0.0; j + 1];
        if j == 0 {
            return w;
        }
        let t = nodes[j];
        for i in 0..j {
            let (lo, hi) = (nodes[i], nodes[i + 1]);
            let h = hi - lo;
            let (m0, m1) = self.piece(t, lo, hi, lo);
            let m1 = m1 / h;
            w[i] += m0 - m1;
            w[i + 1] += m1;
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// (t−τ)^{α−1}
    Single,
    /// (t−τ)^{α−1} τ^{α−1}
    Double,
}

/// Triangular table w[j][k], k ≤ j, for one kernel on one mesh.
#[derive(Debug, Clone)]
pub struct ConvolutionWeights {
    alpha: f64,
    kind: KernelKind,
    mesh: GradedMesh,
    rows: Vec<Vec<f64>>,
}

impl ConvolutionWeights {
    fn build(alpha: f64, kind: KernelKind, mesh: &GradedMesh) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("order must lie in (0, 1), got {alpha}")));
        }
        let b = match kind {
            KernelKind::Single => 1.0,
            KernelKind::Double => alpha,
        };
        let rows = triangular_weights(alpha, b, mesh.nodes())?;
        Ok(Self {
            alpha,
            kind,
            mesh: mesh.clone(),
            rows,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn mesh(&self) -> &GradedMesh {
        &self.mesh
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    /// Σ_k w[j][k] values[k].
    pub fn apply(&self, j: usize, values: &[f64]) -> f64 {
        self.rows[j].iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub(crate) fn triangular_weights(a: f64, b: f64, nodes: &[f64]) -> Result<Vec<Vec<f64>>> {
    let kernel = ProductKernel::new(a, b)?;
    Ok((0..nodes.len()).into_par_iter().map(|j| kernel.row(nodes, j)).collect())
}

/// Weights for ∫₀^{t_j} (t_j−τ)^{α−1} φ(τ) dτ.
pub fn weights_single(alpha: f64, mesh: &GradedMesh) -> Result<ConvolutionWeights> {
    ConvolutionWeights::build(alpha, KernelKind::Single, mesh)
}

/// Weights for ∫₀^{t_j} (t_j−τ)^{α−1} τ^{α−1} ψ(τ) dτ.
pub fn weights_double(alpha: f64, mesh: &GradedMesh) -> Result<ConvolutionWeights> {
    ConvolutionWeights::build(alpha, KernelKind::Double, mesh)
}

/// I^β at every mesh node. A non-finite first sample (an integrable blow-up
/// at 0) is replaced by its neighbour.
pub fn rl_integral(beta_order: f64, mesh: &GradedMesh, samples: &[f64]) -> Result<Vec<f64>> {
    if !(beta_order > 0.0 && beta_order <= 1.0) {
        return Err(Error::domain(format!(
            "integral order must lie in (0, 1], got {beta_order}"
        )));
    }
    check_len(mesh, samples.len(), "samples")?;
    let mut f = samples.to_vec();
    if !f[0].is_finite() {
        f[0] = f[1];
    }
    let rows = triangular_weights(beta_order, 1.0, mesh.nodes())?;
    let g = gamma(beta_order)?;
    Ok(rows
        .iter()
        .map(|w| w.iter().zip(&f).map(|(w, v)| w * v).sum::<f64>() / g)
        .collect())
}

fn check_len(mesh: &GradedMesh, len: usize, what: &str) -> Result<()> {
    if len != mesh.nodes().len() {
        return Err(Error::domain(format!(
            "{what} has {len} entries, mesh has {} nodes",
            mesh.nodes().len()
        )));
    }
    Ok(())
}

/// Value at t₀ = 0 by linear extrapolation from the next two nodes.
fn extrapolate_to_zero(t: &[f64], v: &[f64]) -> f64 {
    let slope = (v[2] - v[1]) / (t[2] - t[1]);
    v[1] - slope * t[1]
}

/// Checks D^α x = rhs in integrated form: for every node j ≥ 2,
/// I^{1−α}x(t_j) − I^{1−α}x(t₁) = ∫_{t₁}^{t_j} rhs, and returns the largest
/// defect. Both sides are computed in weighted form: x = τ^{α−1}y and
/// rhs = τ^{α−1}R, which keeps the quadrature on bounded data.
pub fn rl_derivative_residual(alpha: f64, mesh: &GradedMesh, x_samples: &[f64], rhs_samples: &[f64]) -> Result<f64> {
    Ok(rl_derivative_defects(alpha, mesh, x_samples, rhs_samples)?
        .into_iter()
        .fold(0.0, f64::max))
}

/// Per-node defects of [`rl_derivative_residual`]; nodes 0 and 1 are 0.
pub fn rl_derivative_defects(
    alpha: f64,
    mesh: &GradedMesh,
    x_samples: &[f64],
    rhs_samples: &[f64],
) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("order must lie in (0, 1), got {alpha}")));
    }
    if mesh.intervals() < 8 {
        return Err(Error::domain(format!(
            "residual check needs at least 8 intervals, got {}",
            mesh.intervals()
        )));
    }
    check_len(mesh, x_samples.len(), "x samples")?;
    check_len(mesh, rhs_samples.len(), "rhs samples")?;
    let t = mesh.nodes();
    let weight = |k: usize, v: f64| t[k].powf(1.0 - alpha) * v;
    let mut y: Vec<f64> = (0..t.len()).map(|k| weight(k, x_samples[k])).collect();
    let mut r: Vec<f64> = (0..t.len()).map(|k| weight(k, rhs_samples[k])).collect();
    // At t = 0 the weighted values are limits; use them if finite and
    // nonzero-weight data was supplied, otherwise extrapolate.
    if !x_samples[0].is_finite() || !y[0].is_finite() {
        y[0] = extrapolate_to_zero(t, &y);
    }
    if !rhs_samples[0].is_finite() || !r[0].is_finite() {
        r[0] = extrapolate_to_zero(t, &r);
    }
    if y.iter().chain(&r).any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite samples away from t = 0"));
    }

    let frac = triangular_weights(1.0 - alpha, alpha, t)?;
    let cumulative = triangular_weights(1.0, alpha, t)?;
    let g = gamma(1.0 - alpha)?;
    let dot = |w: &[f64], v: &[f64]| w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let j_int: Vec<f64> = frac.iter().map(|w| dot(w, &y) / g).collect();
    let c_int: Vec<f64> = cumulative.iter().map(|w| dot(w, &r)).collect();
    Ok((0..t.len())
        .map(|j| {
            if j < 2 {
                0.0
            } else {
                ((j_int[j] - j_int[1]) - (c_int[j] - c_int[1])).abs()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn uniform_and_graded_nodes() {
        let m = GradedMesh::new(1.0, 4, 1.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = GradedMesh::new(1.0, 4, 2.0).unwrap();
        assert_eq!(m.nodes(), &[0.0, 1.0 / 16.0, 0.25, 9.0 / 16.0, 1.0]);
        let m = GradedMesh::new(10.0, 1024, GradedMesh::default_grading(0.5)).unwrap();
        assert_eq!(m.grading(), 4.0);
        assert!(rel(m.nodes()[1], 10.0 * (1.0f64 / 1024.0).powi(4)) < 1e-15);
        assert!(GradedMesh::new(0.0, 4, 1.0).is_err());
        assert!(GradedMesh::new(1.0, 1, 1.0).is_err());
        assert!(GradedMesh::new(1.0, 4, 0.5).is_err());
    }

    #[test]
    fn two_sided_mesh_is_symmetric() {
        let m = GradedMesh::two_sided(1.0, 16, 3.0).unwrap();
        let n = m.nodes();
        assert_eq!(n[0], 0.0);
        assert_eq!(n[16], 1.0);
        assert_eq!(n[8], 0.5);
        for k in 0..=16 {
            assert!((n[k] + n[16 - k] - 1.0).abs() < 1e-15);
        }
        assert!(n.windows(2).all(|w| w[0] < w[1]));
        assert!(GradedMesh::two_sided(1.0, 15, 3.0).is_err());
    }

    #[test]
    fn gauss_jacobi_moments() {
        // ∫₀¹ x^c x^k dx = 1/(c+k+1)
        for c in [0.0, -0.5, -0.3, -0.8] {
            let rule = GaussRule::jacobi01(16, c).unwrap();
            for k in 0..20 {
                let q: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(k)).sum();
                assert!(rel(q, 1.0 / (c + k as f64 + 1.0)) < 1e-13, "c={c} k={k}");
            }
        }
    }

    #[test]
    fn single_kernel_moments_are_exact() {
        for &alpha in &[0.2, 0.5, 0.85] {
            let mesh = GradedMesh::new(3.0, 64, GradedMesh::default_grading(alpha)).unwrap();
            let w = weights_single(alpha, &mesh).unwrap();
            for (j, &t) in mesh.nodes().iter().enumerate().skip(1) {
                let ones: f64 = w.row(j).iter().sum();
                assert!(rel(ones, t.powf(alpha) / alpha) < 1e-12, "alpha={alpha} j={j}");
                let lin = w.apply(j, mesh.nodes());
                let exact = t.powf(alpha + 1.0) / (alpha * (alpha + 1.0));
                assert!(rel(lin, exact) < 1e-12, "alpha={alpha} j={j}");
            }
        }
    }

    #[test]
    fn single_kernel_linear_moment_at_one() {
        let mesh = GradedMesh::new(1.0, 16, 4.0).unwrap();
        let w = weights_single(0.5, &mesh).unwrap();
        assert!((w.apply(16, mesh.nodes()) - 4.0 / 3.0).abs() < 1e-13);
        assert!(w.row(16).iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn double_kernel_constant_moment() {
        let mesh = GradedMesh::new(5.0, 40, 4.0).unwrap();
        let w = weights_double(0.5, &mesh).unwrap();
        assert_eq!(w.row(0), &[0.0]);
        for j in 1..=40 {
            assert!(rel(w.row(j).iter().sum(), PI) < 1e-10, "j={j}");
        }
        let mesh = GradedMesh::new(2.0, 50, 2.0 / 0.3).unwrap();
        let w = weights_double(0.3, &mesh).unwrap();
        let exact = 2f64.powf(-0.4) * beta(0.3, 0.3).unwrap();
        assert!(rel(w.row(50).iter().sum(), exact) < 1e-10);
    }

    #[test]
    fn quadratic_error_decreases_under_refinement() {
        let alpha = 0.5;
        // ∫₀¹ (1−τ)^{-1/2} τ² dτ = B(3, 1/2) = 16/15
        let mut last = f64::INFINITY;
        for n in [8, 16, 32, 64] {
            let mesh = GradedMesh::new(1.0, n, 1.0).unwrap();
            let w = weights_single(alpha, &mesh).unwrap();
            let sq: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
            let err = (w.apply(n, &sq) - 16.0 / 15.0).abs();
            assert!(err < last);
            last = err;
        }
    }

    #[test]
    fn rl_integral_of_constant() {
        let mesh = GradedMesh::new(2.0, 32, 2.0).unwrap();
        let ones = vec![1.0; 33];
        let i1 = rl_integral(1.0, &mesh, &ones).unwrap();
        let ih = rl_integral(0.5, &mesh, &ones).unwrap();
        for (k, &t) in mesh.nodes().iter().enumerate() {
            assert!((i1[k] - t).abs() < 1e-13);
            assert!((ih[k] - t.sqrt() / gamma(1.5).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn residual_rejects_coarse_mesh() {
        let mesh = GradedMesh::new(1.0, 4, 1.0).unwrap();
        assert!(rl_derivative_residual(0.5, &mesh, &[1.0; 5], &[0.0; 5]).is_err());
    }
}
