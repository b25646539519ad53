//! Scalar two-parameter Mittag-Leffler function
//!
//! E_{α,β}(z) = Σ_{k≥0} z^k / Γ(αk + β)
//!
//! Three evaluation routes are available and each reports its own error
//! estimate; the evaluator picks the best one and cross-checks routes that
//! overlap:
//!
//! * the power series, summed with Neumaier compensation; accurate until the
//!   terms start cancelling (roughly |z|^{1/α} ≲ 12 on the negative axis);
//! * the large-|z| expansion: residues of the Laplace transform (the
//!   "exponential" terms, present when |arg z| ≤ απ) plus the algebraic series
//!   −Σ z^{-k}/Γ(β−αk), truncated at its smallest term;
//! * numerical inversion of the Laplace transform s^{α-β}/(s^α − z) with the
//!   trapezoidal rule on a parabolic contour, which closes the gap between the
//!   other two (0 < α < 2).

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::{gamma_sign, ln_gamma, rgamma};
use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const SERIES_MAX_TERMS: usize = 2000;
const ASYMPTOTIC_MAX_TERMS: usize = 400;
/// Largest |z|^{1/α} for which the power series is attempted.
const SERIES_REACH: f64 = 60.0;
/// Contour scalings tried, in order of preference.
const CONTOUR_MU: [f64; 7] = [4.0, 2.0, 1.0, 0.5, 8.0, 0.25, 0.125];
/// Target exponent of the discretization and truncation errors, e^{-36}.
const CONTOUR_DECAY: f64 = 36.0;
const CONTOUR_MAX_NODES: f64 = 20_000.0;

/// Default tolerance used by callers that do not thread one through.
pub const DEFAULT_ML_TOL: f64 = 1e-10;

/// Parameters (α, β) of E_{α,β}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlIndex {
    alpha: f64,
    beta: f64,
}

impl MlIndex {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!("Mittag-Leffler alpha must be > 0, got {alpha}")));
        }
        if !beta.is_finite() {
            return Err(Error::domain(format!("Mittag-Leffler beta must be finite, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlMethod {
    /// z = 0, value 1/Γ(β).
    Constant,
    Series,
    Asymptotic,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub method: MlMethod,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: Complex64,
    estimate: f64,
    method: MlMethod,
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl CompensatedSum {
    fn add_part(acc: &mut (f64, f64), x: f64) {
        let (s, c) = *acc;
        let t = s + x;
        let c = if s.abs() >= x.abs() {
            c + ((s - t) + x)
        } else {
            c + ((x - t) + s)
        };
        *acc = (t, c);
    }

    fn add(&mut self, z: Complex64) {
        Self::add_part(&mut self.re, z.re);
        Self::add_part(&mut self.im, z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Evaluates E_{α,β}(z) with absolute-or-relative error at most `tol`, i.e.
/// `error_estimate <= tol * max(1, |value|)`.
pub fn ml_scalar(idx: MlIndex, z: Complex64, tol: f64) -> Result<MlValue> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::domain(format!("tolerance must lie in (0, 1e-6], got {tol:e}")));
    }
    let v = ml_best_effort(idx, z, tol)?;
    if v.error_estimate <= tol * v.value.norm().max(1.0) {
        Ok(v)
    } else {
        Err(Error::Accuracy {
            requested: tol,
            estimate: v.error_estimate / v.value.norm().max(1.0),
            context: format!("E_{{{},{}}}({z}) via {:?}", idx.alpha, idx.beta, v.method),
        })
    }
}

/// Like [`ml_scalar`] but returns the most accurate value found even when it
/// misses `tol`; routes are tried until one meets `tol`. Fails only on
/// overflow or non-finite input.
pub(crate) fn ml_best_effort(idx: MlIndex, z: Complex64, tol: f64) -> Result<MlValue> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("non-finite argument {z}")));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Ok(MlValue {
            value: Complex64::new(rgamma(idx.beta), 0.0),
            error_estimate: 0.0,
            method: MlMethod::Constant,
        });
    }

    let accept = |c: &Candidate| c.value.norm().is_finite() && c.estimate <= tol * c.value.norm().max(1.0);
    let reach = z.norm().powf(1.0 / idx.alpha);
    let series_applicable = reach < SERIES_REACH;
    let asymptotic_applicable = idx.alpha < 2.0 && z.norm() >= 1.0;

    let mut candidates: Vec<Candidate> = Vec::with_capacity(3);
    let routes: [MlMethod; 2] = if reach <= 15.0 {
        [MlMethod::Series, MlMethod::Asymptotic]
    } else {
        [MlMethod::Asymptotic, MlMethod::Series]
    };
    for route in routes {
        let cand = match route {
            MlMethod::Series if series_applicable => Some(series(idx, z)),
            MlMethod::Asymptotic if asymptotic_applicable => asymptotic(idx, z),
            _ => None,
        };
        if let Some(c) = cand {
            candidates.push(c);
            if accept(&c) {
                break;
            }
        }
    }

    if !candidates.iter().any(accept) && idx.alpha < 2.0 {
        if let Some(c) = contour(idx, z) {
            candidates.push(c);
        }
    }

    let mut best = *candidates
        .iter()
        .filter(|c| c.value.norm().is_finite())
        .min_by(|a, b| a.estimate.total_cmp(&b.estimate))
        .ok_or_else(|| Error::Accuracy {
            requested: tol,
            estimate: f64::INFINITY,
            context: format!("E_{{{},{}}}({z}) overflows or no route applies", idx.alpha, idx.beta),
        })?;

    // Two routes that both claim to be accurate must agree.
    for other in &candidates {
        if other.method != best.method && accept(other) {
            let gap = (other.value - best.value).norm();
            if gap > 10.0 * (other.estimate + best.estimate) + 4.0 * EPS * best.value.norm() {
                best.estimate = best.estimate.max(gap);
            }
        }
    }

    Ok(MlValue {
        value: best.value,
        error_estimate: best.estimate,
        method: best.method,
    })
}

/// Real-argument convenience wrapper; returns the real part.
pub fn ml_real(idx: MlIndex, x: f64, tol: f64) -> Result<f64> {
    Ok(ml_scalar(idx, Complex64::new(x, 0.0), tol)?.value.re)
}

fn series(idx: MlIndex, z: Complex64) -> Candidate {
    let (a, b) = (idx.alpha, idx.beta);
    let reach = z.norm().powf(1.0 / a);
    let log_mod = z.norm().ln();
    let arg = z.arg();

    let mut acc = CompensatedSum::default();
    let mut abs_sum = 0.0;
    let mut zk = Complex64::new(1.0, 0.0);
    let mut direct_powers = true;
    let mut small_run = 0;
    let mut tail = f64::INFINITY;
    let mut used = 0usize;

    for k in 0..SERIES_MAX_TERMS {
        let x = a * k as f64 + b;
        let term = if direct_powers && x < 170.0 {
            zk * rgamma(x)
        } else {
            let sign = gamma_sign(x);
            if sign == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let log_mag = k as f64 * log_mod - ln_gamma(x);
                if log_mag > 709.0 {
                    return Candidate {
                        value: Complex64::new(f64::INFINITY, 0.0),
                        estimate: f64::INFINITY,
                        method: MlMethod::Series,
                    };
                }
                Complex64::from_polar(sign * log_mag.exp(), k as f64 * arg)
            }
        };
        acc.add(term);
        let mag = term.norm();
        abs_sum += mag;
        used = k + 1;

        // Past the peak of |z|^k/Γ(αk+β) the terms decay geometrically.
        if x > reach + 1.0 && k >= 2 {
            let scale = acc.value().norm().max(abs_sum * EPS);
            if mag <= 0.25 * EPS * scale || mag < 1e-300 {
                small_run += 1;
                if small_run >= 2 {
                    tail = 2.0 * mag;
                    break;
                }
            } else {
                small_run = 0;
            }
        }

        if direct_powers {
            zk *= z;
            if !(zk.norm() < 1e290) {
                direct_powers = false;
            }
        }
    }

    let rounding = abs_sum * EPS * (8.0 + 0.5 * (used as f64).sqrt());
    Candidate {
        value: acc.value(),
        estimate: rounding + tail,
        method: MlMethod::Series,
    }
}

fn is_integer(x: f64) -> bool {
    x == x.round()
}

/// Residue of e^s s^{α-β}/(s^α − z) at the pole s = w e^{iθ}:
/// (1/α) s^{1-β} e^{s}.
fn pole_residue(alpha: f64, beta: f64, w: f64, theta: f64) -> Complex64 {
    let s = Complex64::from_polar(w, theta);
    let log = Complex64::new(w.ln(), theta) * (1.0 - beta) + s;
    log.exp() / alpha
}

fn pole_residue_magnitude(alpha: f64, beta: f64, w: f64, theta: f64) -> f64 {
    ((1.0 - beta) * w.ln() + w * theta.cos()).exp() / alpha
}

fn asymptotic(idx: MlIndex, z: Complex64) -> Option<Candidate> {
    let (a, b) = (idx.alpha, idx.beta);
    if a >= 2.0 {
        return None;
    }
    let r = z.norm();
    let arg = z.arg();
    let w = r.powf(1.0 / a);
    // With α = 1 and integer β there is no branch cut: the algebraic sum is
    // finite and the single residue is exact.
    let exact_case = a == 1.0 && is_integer(b);

    let mut exp_part = Complex64::new(0.0, 0.0);
    let mut exp_scale = 0.0_f64;
    let mut ambiguity = 0.0;
    for j in -2..=2 {
        let theta = (arg + 2.0 * PI * j as f64) / a;
        let near_cut = (theta.abs() - PI).abs() < 0.6;
        if theta > -PI && theta <= PI {
            let res = pole_residue(a, b, w, theta);
            exp_part += res;
            exp_scale = exp_scale.max(res.norm() * (1.0 + w));
            if near_cut && !exact_case {
                ambiguity += pole_residue_magnitude(a, b, w, theta);
            }
        } else if near_cut && !exact_case {
            ambiguity += pole_residue_magnitude(a, b, w, theta);
        }
    }

    let zinv = z.inv();
    let mut p = Complex64::new(1.0, 0.0);
    let mut alg = CompensatedSum::default();
    let mut abs_alg = 0.0;
    let mut omitted = f64::INFINITY;
    let mut prev_env = f64::INFINITY;
    let log_r = r.ln();
    for k in 1..=ASYMPTOTIC_MAX_TERMS {
        let x = b - a * k as f64;
        if exact_case && x <= 0.0 {
            omitted = 0.0;
            break;
        }
        // |1/Γ(x)| ≤ Γ(1-x)/π, an envelope free of the sin(πx) zeros.
        let env = if 1.0 - x > 0.5 {
            (ln_gamma(1.0 - x) - k as f64 * log_r).exp() / PI
        } else {
            f64::INFINITY
        };
        let total = alg.value().norm().max((exp_part).norm());
        if k > 1 && env.is_finite() && (env > prev_env || env <= 0.1 * EPS * total) {
            omitted = env;
            break;
        }
        prev_env = env;
        p *= zinv;
        let term = -p * rgamma(x);
        alg.add(term);
        abs_alg += term.norm();
    }

    let value = exp_part + alg.value();
    let rounding = EPS * (8.0 * abs_alg + 4.0 * exp_scale);
    Some(Candidate {
        value,
        estimate: omitted + ambiguity + rounding,
        method: MlMethod::Asymptotic,
    })
}

/// Poles of s^{α-β}/(s^α − z) on the principal sheet.
fn laplace_poles(alpha: f64, z: Complex64) -> Vec<Complex64> {
    let w = z.norm().powf(1.0 / alpha);
    let arg = z.arg();
    let reach = alpha.ceil() as i32 + 1;
    (-reach..=reach)
        .filter_map(|j| {
            let theta = (arg + 2.0 * PI * j as f64) / alpha;
            (theta > -PI && theta < PI).then(|| Complex64::from_polar(w, theta))
        })
        .collect()
}

/// Trapezoidal rule with step h on s(u) = μ(1 + iu)², |u| ≤ u_max.
fn contour_sum(idx: MlIndex, z: Complex64, poles: &[Complex64], mu: f64, h: f64, u_max: f64) -> (Complex64, f64) {
    let (a, b) = (idx.alpha, idx.beta);
    let n = (u_max / h).ceil() as i64;
    let mut acc = CompensatedSum::default();
    let mut abs_sum = 0.0;
    let i = Complex64::new(0.0, 1.0);
    for k in -n..=n {
        let u = k as f64 * h;
        let v = Complex64::new(1.0, u);
        let s = v * v * mu;
        let ds = i * v * (2.0 * mu);
        let ln_s = s.ln();
        let s_alpha = (ln_s * a).exp();
        let f = ((ln_s * (a - b)) + s).exp() / (s_alpha - z);
        let term = f * ds;
        acc.add(term);
        abs_sum += term.norm();
    }
    let mut value = acc.value() * (h / (2.0 * PI)) / i;
    for &p in poles {
        // Poles to the right of the parabola were swept by the deformation
        // from the Bromwich line and contribute their residue.
        if (p / mu).sqrt().re > 1.0 {
            value += pole_residue(a, b, p.norm(), p.arg());
        }
    }
    (value, abs_sum * h / (2.0 * PI))
}

/// Step and truncation for scaling μ, or None when a pole sits too close to
/// the contour. In the u-plane the integrand is analytic up to the branch
/// point u = i and the poles; below the real axis it grows like
/// exp(μ(1+c)²), which bounds the step from the other side.
fn contour_plan(mu: f64, poles: &[Complex64]) -> Option<(f64, f64)> {
    let d = poles
        .iter()
        .map(|&p| ((p / mu).sqrt().re - 1.0).abs())
        .fold(1.0_f64, f64::min);
    if d < 0.05 {
        return None;
    }
    let upper = 2.0 * PI * d / CONTOUR_DECAY;
    let lower = PI / (mu * (1.0 + (1.0 + CONTOUR_DECAY / mu).sqrt()));
    let h = upper.min(lower);
    let u_max = (1.0 + (CONTOUR_DECAY + 4.0) / mu).sqrt();
    (2.0 * u_max / h <= CONTOUR_MAX_NODES).then_some((h, u_max))
}

fn contour(idx: MlIndex, z: Complex64) -> Option<Candidate> {
    if idx.alpha >= 2.0 {
        return None;
    }
    let poles = laplace_poles(idx.alpha, z);
    // Rounding grows like e^μ, so take the first admissible scaling.
    let (mu, h, u_max) = CONTOUR_MU
        .iter()
        .find_map(|&mu| contour_plan(mu, &poles).map(|(h, u)| (mu, h, u)))?;
    let (coarse, _) = contour_sum(idx, z, &poles, mu, h, u_max);
    let (fine, abs) = contour_sum(idx, z, &poles, mu, 0.7 * h, u_max);
    Some(Candidate {
        value: fine,
        estimate: (coarse - fine).norm() + 8.0 * EPS * abs,
        method: MlMethod::Contour,
    })
}
