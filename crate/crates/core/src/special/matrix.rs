//! Mittag-Leffler functions of real square matrices.
//!
//! A diagonalisable matrix with a well-conditioned eigenvector basis is
//! handled spectrally, E(sA) = V diag(E(sλ_i)) V⁻¹. Everything else falls
//! back to the defining power series.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gamma::{gamma_sign, ln_gamma, rgamma};
use super::mittag_leffler::{ml_best_effort, MlIndex, DEFAULT_ML_TOL};
use crate::error::{Error, Result};
use crate::linalg::{check_square, eigenvalues, to_complex};

/// Eigenvector bases with a larger condition number are not trusted.
pub const EIGENVECTOR_COND_LIMIT: f64 = 1e6;
const SERIES_MAX_TERMS: usize = 2000;

#[derive(Debug, Clone)]
enum Path {
    Scalar(f64),
    Spectral {
        eig: Vec<Complex64>,
        v: DMatrix<Complex64>,
        v_inv: DMatrix<Complex64>,
        cond: f64,
    },
    Series,
}

/// Reusable evaluator of E_{α,β}(sA) for a fixed matrix A and varying scale
/// s. The spectral analysis of A is done once in [`MatrixMl::new`].
#[derive(Debug, Clone)]
pub struct MatrixMl {
    a: DMatrix<f64>,
    path: Path,
}

impl MatrixMl {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        check_square(a, "Mittag-Leffler matrix argument")?;
        let path = if a.nrows() == 1 {
            Path::Scalar(a[(0, 0)])
        } else {
            spectral_path(a)?.unwrap_or(Path::Series)
        };
        Ok(Self { a: a.clone(), path })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Condition number of the eigenvector basis, `None` when the series
    /// fallback is in use.
    pub fn eigenvector_condition(&self) -> Option<f64> {
        match &self.path {
            Path::Scalar(_) => Some(1.0),
            Path::Spectral { cond, .. } => Some(*cond),
            Path::Series => None,
        }
    }

    /// E_{α,β}(scale·A) with entrywise error at most tol·(1 + max entry).
    pub fn eval(&self, idx: MlIndex, scale: f64, tol: f64) -> Result<DMatrix<f64>> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(Error::domain(format!("tolerance must lie in (0, 1e-6], got {tol:e}")));
        }
        if !scale.is_finite() {
            return Err(Error::domain(format!("non-finite scale {scale}")));
        }
        match &self.path {
            Path::Scalar(a) => {
                let v = ml_best_effort(idx, Complex64::new(scale * a, 0.0), tol)?;
                check_accuracy(v.error_estimate, v.value.re.abs(), tol, "scalar")?;
                Ok(DMatrix::from_element(1, 1, v.value.re))
            }
            Path::Spectral { eig, v, v_inv, cond } => {
                let scalar_tol = (tol / cond).max(1e-14);
                let mut worst = 0.0_f64;
                let mut d = Vec::with_capacity(eig.len());
                for &lambda in eig {
                    let r = ml_best_effort(idx, lambda * scale, scalar_tol)?;
                    worst = worst.max(r.error_estimate);
                    d.push(r.value);
                }
                let mut scaled = v.clone();
                for (j, dj) in d.iter().enumerate() {
                    for i in 0..scaled.nrows() {
                        scaled[(i, j)] *= *dj;
                    }
                }
                let full = scaled * v_inv;
                let out = full.map(|c| c.re);
                let size = out.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                check_accuracy(worst * cond, size, tol, "eigendecomposition")?;
                Ok(out)
            }
            Path::Series => series(&(&self.a * scale), idx, tol),
        }
    }

    /// Resolvent kernel t^{α-1} E_{α,α}(t^α A).
    pub fn kernel(&self, alpha: f64, t: f64, tol: f64) -> Result<DMatrix<f64>> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("kernel requires t > 0, got {t}")));
        }
        let idx = MlIndex::new(alpha, alpha)?;
        let e = self.eval(idx, t.powf(alpha), tol)?;
        Ok(e * t.powf(alpha - 1.0))
    }
}

fn check_accuracy(estimate: f64, size: f64, tol: f64, route: &str) -> Result<()> {
    if estimate <= tol * (1.0 + size) {
        Ok(())
    } else {
        Err(Error::Accuracy {
            requested: tol,
            estimate: estimate / (1.0 + size),
            context: format!("matrix Mittag-Leffler via {route}"),
        })
    }
}

/// Groups eigenvalues that coincide up to a relative tolerance.
fn clusters(eig: &[Complex64], scale: f64) -> Vec<(Complex64, usize)> {
    let tol = 1e-8 * (1.0 + scale);
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &l in eig {
        if let Some(c) = out.iter_mut().find(|(c, _)| (*c - l).norm() <= tol) {
            c.1 += 1;
        } else {
            out.push((l, 1));
        }
    }
    out
}

fn spectral_path(a: &DMatrix<f64>) -> Result<Option<Path>> {
    let n = a.nrows();
    let eig = eigenvalues(a)?;
    let scale = eig.iter().fold(0.0_f64, |m, l| m.max(l.norm())).max(a.amax());
    let ac = to_complex(a);
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    let mut ordered = Vec::with_capacity(n);
    let mut col = 0;
    for (lambda, mult) in clusters(&eig, scale) {
        let shifted = &ac - DMatrix::<Complex64>::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let null_tol = 1e-9 * (1.0 + scale);
        let null_dim = order.iter().filter(|&&i| svd.singular_values[i] <= null_tol).count();
        if null_dim < mult {
            // Defective: no eigenvector basis.
            return Ok(None);
        }
        for &i in order.iter().take(mult) {
            let vec = v_t.row(i).adjoint();
            v.set_column(col, &vec);
            ordered.push(lambda);
            col += 1;
        }
    }
    let sv = v.clone().svd(false, false).singular_values;
    let (smax, smin) = sv
        .iter()
        .fold((0.0_f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let cond = smax / smin;
    if !(cond < EIGENVECTOR_COND_LIMIT) {
        return Ok(None);
    }
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvector basis is singular".into()))?;
    Ok(Some(Path::Spectral {
        eig: ordered,
        v,
        v_inv,
        cond,
    }))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Straight power series Σ M^k / Γ(αk+β), accumulated without squaring.
fn series(m: &DMatrix<f64>, idx: MlIndex, tol: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let (a, b) = (idx.alpha(), idx.beta());
    let reach = crate::linalg::Norm::Inf.matrix(m).powf(1.0 / a);
    // Powers are kept as unit-size matrices times exp(log_scale).
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut log_scale = 0.0_f64;
    let mut acc = DMatrix::<f64>::zeros(n, n);
    let mut abs_sum = 0.0;
    let mut small_run = 0;
    let mut converged = false;
    let mut tail = 0.0;
    let mut used = 0;
    for k in 0..SERIES_MAX_TERMS {
        let x = a * k as f64 + b;
        let coeff = if log_scale == 0.0 && x < 170.0 {
            rgamma(x)
        } else {
            gamma_sign(x) * (log_scale - ln_gamma(x)).exp()
        };
        let term = &power * coeff;
        let mag = max_abs(&term);
        if !mag.is_finite() {
            break;
        }
        acc += &term;
        abs_sum += mag;
        used = k + 1;
        if x > reach + 1.0 && k >= 2 {
            if mag <= 0.25 * f64::EPSILON * max_abs(&acc).max(f64::MIN_POSITIVE) || mag < 1e-300 {
                small_run += 1;
                if small_run >= 2 {
                    converged = true;
                    tail = 2.0 * mag;
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        power = &power * m;
        let p = max_abs(&power);
        if p > 1e100 {
            power /= p;
            log_scale += p.ln();
        } else if p == 0.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Accuracy {
            requested: tol,
            estimate: f64::INFINITY,
            context: format!("matrix Mittag-Leffler series did not converge in {SERIES_MAX_TERMS} terms"),
        });
    }
    let estimate = abs_sum * f64::EPSILON * (8.0 + 0.5 * (used as f64).sqrt()) * n as f64 + tail;
    check_accuracy(estimate, max_abs(&acc), tol, "power series")?;
    Ok(acc)
}

/// E_{α,β}(M).
pub fn ml_matrix(idx: MlIndex, m: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    MatrixMl::new(m)?.eval(idx, 1.0, tol)
}

/// t^{α-1} E_{α,α}(t^α A), evaluated at the default tolerance.
pub fn ml_kernel(alpha: f64, a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    MatrixMl::new(a)?.kernel(alpha, t, DEFAULT_ML_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::mittag_leffler::ml_real;

    fn idx(a: f64, b: f64) -> MlIndex {
        MlIndex::new(a, b).unwrap()
    }

    /// Plain truncated series with no scaling, the brute-force reference.
    fn brute_series(m: &DMatrix<f64>, a: f64, b: f64, terms: usize) -> DMatrix<f64> {
        let n = m.nrows();
        let mut p = DMatrix::<f64>::identity(n, n);
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for k in 0..terms {
            acc += &p * rgamma(a * k as f64 + b);
            p = &p * m;
        }
        acc
    }

    #[test]
    fn zero_matrix_gives_scaled_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        let e = ml_matrix(idx(0.5, 0.7), &z, 1e-10).unwrap();
        let expected = DMatrix::<f64>::identity(3, 3) * rgamma(0.7);
        assert!((e - expected).amax() < 1e-15);
    }

    #[test]
    fn diagonal_matches_scalar() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let e = ml_matrix(idx(0.5, 0.5), &m, 1e-10).unwrap();
        assert!((e[(0, 0)] - ml_real(idx(0.5, 0.5), -1.0, 1e-12).unwrap()).abs() < 1e-12);
        assert!((e[(1, 1)] - ml_real(idx(0.5, 0.5), -2.0, 1e-12).unwrap()).abs() < 1e-12);
        assert!(e[(0, 1)].abs() < 1e-14 && e[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn triangular_matches_brute_series() {
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
        let e = ml_matrix(idx(0.5, 0.5), &m, 1e-10).unwrap();
        let reference = brute_series(&m, 0.5, 0.5, 200);
        assert!((e - reference).amax() < 1e-9);
    }

    #[test]
    fn defective_matrix_uses_series() {
        // Jordan block: E(J) = [[E(λ), E'(λ)], [0, E(λ)]]
        let m = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let ml = MatrixMl::new(&m).unwrap();
        assert!(ml.eigenvector_condition().is_none());
        let e = ml.eval(idx(1.0, 1.0), 1.0, 1e-12).unwrap();
        let em1 = (-1.0f64).exp();
        assert!((e[(0, 0)] - em1).abs() < 1e-14);
        assert!((e[(0, 1)] - em1).abs() < 1e-14);
        assert!(e[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn rotation_gives_cosine_and_sine() {
        // exp of [[0, θ], [-θ, 0]]
        let th = 1.3;
        let m = DMatrix::from_row_slice(2, 2, &[0.0, th, -th, 0.0]);
        let e = ml_matrix(idx(1.0, 1.0), &m, 1e-12).unwrap();
        assert!((e[(0, 0)] - th.cos()).abs() < 1e-13);
        assert!((e[(0, 1)] - th.sin()).abs() < 1e-13);
        assert!((e[(1, 0)] + th.sin()).abs() < 1e-13);
    }

    #[test]
    fn kernel_rejects_nonpositive_time() {
        let a = DMatrix::from_element(1, 1, -1.0);
        assert!(ml_kernel(0.5, &a, 0.0).is_err());
        assert!(ml_kernel(0.5, &a, -1.0).is_err());
        let k = ml_kernel(0.5, &a, 1.0).unwrap()[(0, 0)];
        assert!((k - ml_real(idx(0.5, 0.5), -1.0, 1e-12).unwrap()).abs() < 1e-12);
    }
}
