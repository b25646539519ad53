//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Norm used for |||·||| on matrices and ‖·‖ on vectors. Matrix norms are the
/// operator norms induced by the matching vector norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    Two,
    One,
    Inf,
}

impl Norm {
    pub fn vector(self, v: &[f64]) -> f64 {
        match self {
            Norm::Two => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::One => v.iter().map(|x| x.abs()).sum(),
            Norm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn matrix(self, m: &DMatrix<f64>) -> f64 {
        if m.nrows() == 1 && m.ncols() == 1 {
            return m[(0, 0)].abs();
        }
        match self {
            Norm::Two => m.clone().svd(false, false).singular_values.max(),
            Norm::One => (0..m.ncols())
                .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Norm::Inf => (0..m.nrows())
                .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::Two => "2",
            Norm::One => "1",
            Norm::Inf => "inf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" | "two" => Ok(Norm::Two),
            "1" | "one" => Ok(Norm::One),
            "inf" | "infinity" => Ok(Norm::Inf),
            other => Err(Error::Input(format!("unknown norm {other:?}; expected 1, 2 or inf"))),
        }
    }
}

pub(crate) fn check_square(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::domain(format!(
            "{what} must be a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(format!("{what} has non-finite entries")));
    }
    Ok(())
}

/// Eigenvalues of a real square matrix, sorted by (re, im).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    check_square(m, "matrix")?;
    let ev = m.clone().complex_eigenvalues();
    let mut out: Vec<Complex64> = ev.iter().map(|c| Complex64::new(c.re, c.im)).collect();
    if out.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::Numerical(
            "eigenvalue iteration produced non-finite values".into(),
        ));
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_of_a_small_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(Norm::One.matrix(&m), 6.0);
        assert_eq!(Norm::Inf.matrix(&m), 7.0);
        // singular values of [[1,-2],[3,4]]: sqrt of eigenvalues of M^T M
        let mtm = m.transpose() * &m;
        let (a, b, d) = (mtm[(0, 0)], mtm[(0, 1)], mtm[(1, 1)]);
        let top = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * b).sqrt();
        assert!((Norm::Two.matrix(&m) - top.sqrt()).abs() < 1e-12);
        assert_eq!(Norm::Two.vector(&[3.0, 4.0]), 5.0);
        assert_eq!(Norm::One.vector(&[3.0, -4.0]), 7.0);
        assert_eq!(Norm::Inf.vector(&[3.0, -4.0]), 4.0);
    }

    #[test]
    fn rotation_eigenvalues() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let ev = eigenvalues(&m).unwrap();
        assert!((ev[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        assert!(eigenvalues(&DMatrix::zeros(2, 3)).is_err());
        assert!("frobenius".parse::<Norm>().is_err());
        assert_eq!("inf".parse::<Norm>().unwrap(), Norm::Inf);
    }
}
