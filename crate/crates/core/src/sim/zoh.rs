use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Exact zero-order-hold discretization via the exponential of the augmented
/// matrix `[[A, B], [0, 0]]·t_s`, whose top blocks are `Ad` and `Bd`.
pub fn discretize(a: &Mat, b: &Mat, ts: f64) -> Result<(Mat, Mat)> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::InvalidArgument(format!("sample period must be > 0, got {ts}")));
    }
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "discretize A {:?} with B {:?}",
            a.shape(),
            b.shape()
        )));
    }
    linalg::ensure_finite(a, "A")?;
    linalg::ensure_finite(b, "B")?;
    let m = b.ncols();
    let mut aug = Mat::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * ts));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * ts));
    let e = aug.exp();
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = e.view((0, n), (n, m)).into_owned();
    linalg::ensure_finite(&ad, "discretized A")?;
    linalg::ensure_finite(&bd, "discretized B")?;
    Ok((ad, bd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_dynamics() {
        let b = Mat::from_row_slice(2, 1, &[1.0, -2.0]);
        let (ad, bd) = discretize(&Mat::zeros(2, 2), &b, 0.02).unwrap();
        assert_relative_eq!(ad, Mat::identity(2, 2), epsilon = 1e-15);
        assert_relative_eq!(bd, &b * 0.02, epsilon = 1e-15);
    }

    #[test]
    fn scalar_decay() {
        let (ad, bd) = discretize(&Mat::from_element(1, 1, -1.0), &Mat::from_element(1, 1, 3.0), 0.02).unwrap();
        assert_relative_eq!(ad[(0, 0)], (-0.02f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(bd[(0, 0)], 3.0 * (1.0 - (-0.02f64).exp()), epsilon = 1e-15);
        assert_relative_eq!(ad[(0, 0)], 0.9801987, epsilon = 1e-7);
    }

    #[test]
    fn rejects_bad_input() {
        let a = Mat::identity(2, 2);
        assert!(discretize(&a, &Mat::zeros(3, 1), 0.1).is_err());
        assert!(discretize(&a, &Mat::zeros(2, 1), 0.0).is_err());
        let mut nan = a.clone();
        nan[(0, 1)] = f64::NAN;
        assert!(matches!(discretize(&nan, &Mat::zeros(2, 1), 0.1), Err(Error::NonFinite(_))));
    }
}
