//! Dense linear-algebra helpers shared by the design, simulation and
//! spectral modules.

use nalgebra::{Complex, DMatrix, DVector, Schur, SVD};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type C64 = Complex<f64>;

/// Eigenvalues of a square real matrix, in canonical order.
pub fn eigenvalues(m: &Mat) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    ensure_finite(m, "eigenvalue input")?;
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000).ok_or(Error::Eigensolver)?;
    let mut eig: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
    sort_canonical(&mut eig);
    Ok(eig)
}

/// Sorts by real part, then imaginary part.
pub fn sort_canonical(values: &mut [C64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn spectral_radius(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn ensure_finite(m: &Mat, what: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Numerical rank with threshold `sigma_max * n * 1e-10`.
pub fn rank(m: &Mat, n: usize) -> usize {
    let sv = singular_values(m);
    let Some(&max) = sv.first() else {
        return 0;
    };
    if max == 0.0 {
        return 0;
    }
    let tol = max * n.max(1) as f64 * 1e-10;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Orthonormal basis of the right null space of `m` (columns of the result).
pub fn null_space(m: &Mat, rel_tol: f64) -> Mat {
    let n = m.ncols();
    if m.nrows() == 0 {
        return Mat::identity(n, n);
    }
    let rows = m.nrows().max(n);
    let mut padded = Mat::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let max = svd.singular_values.max();
    let tol = rel_tol * max.max(1.0);
    let cols: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol).collect();
    let mut out = Mat::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &v_t.row(i).transpose());
    }
    out
}

/// Orthonormal basis of the right null space of a complex matrix.
pub fn null_space_complex(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::<C64>::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let max = svd.singular_values.max();
    let tol = rel_tol * max.max(1.0);
    let cols: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= tol).collect();
    let mut out = DMatrix::<C64>::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        // rows of V^H are conjugated right singular vectors
        let v = v_t.row(i).transpose().map(|z| z.conj());
        out.set_column(j, &v);
    }
    out
}

pub fn to_complex(m: &Mat) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// Block-diagonal concatenation.
pub fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

/// Serde adapter storing a matrix as a list of rows.
pub mod rows {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect();
        (m.nrows(), m.ncols(), rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        let (nrows, ncols, rows): (usize, usize, Vec<Vec<f64>>) = Deserialize::deserialize(d)?;
        if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("matrix row lengths disagree with shape"));
        }
        Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }
}

/// Serde adapter storing complex numbers as `[re, im]` pairs.
pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Deserialize::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_canonical_pair() {
        let m = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(rank(&m, 2), 2);
        assert_eq!(rank(&Mat::zeros(3, 3), 3), 0);
    }

    #[test]
    fn null_space_is_orthonormal_and_annihilated() {
        let m = Mat::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((&m * &ns).norm() < 1e-12);
        assert!((ns.transpose() * &ns - Mat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = Mat::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let e = eigenvalues(&m).unwrap();
        assert!((e[0].re + 2.0).abs() < 1e-12);
        assert!((e[1].re + 1.0).abs() < 1e-12);
    }
}
