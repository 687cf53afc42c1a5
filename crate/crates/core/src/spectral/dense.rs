//! Dense symmetric / Hermitian eigen helpers on top of faer.

use crate::error::{Error, Result};
use faer::{c64, Mat, Side};

pub fn eigvals_sym(m: &Mat<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?} (dim {})", m.nrows())))
}

pub fn eigen_sym(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?} (dim {n})")))?;
    let s = eig.S().column_vector();
    Ok(((0..n).map(|i| s[i]).collect(), eig.U().to_owned()))
}

pub fn eigvals_herm(m: &Mat<c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?} (dim {})", m.nrows())))
}

pub fn eigen_herm(m: &Mat<c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?} (dim {n})")))?;
    let s = eig.S().column_vector();
    Ok(((0..n).map(|i| s[i].re).collect(), eig.U().to_owned()))
}

/// U f(Λ) Uᵀ for a real symmetric matrix.
pub fn sym_fn(m: &Mat<f64>, f: impl Fn(f64) -> f64) -> Result<Mat<f64>> {
    let (s, u) = eigen_sym(m)?;
    let n = s.len();
    let mut us = u.clone();
    for j in 0..n {
        let fj = f(s[j]);
        for i in 0..n {
            us[(i, j)] *= fj;
        }
    }
    let out = &us * u.transpose();
    Ok(symmetrize(&out))
}

/// U f(Λ) U* for a Hermitian matrix.
pub fn herm_fn(m: &Mat<c64>, f: impl Fn(f64) -> f64) -> Result<Mat<c64>> {
    let (s, u) = eigen_herm(m)?;
    let n = s.len();
    let mut us = u.clone();
    for j in 0..n {
        let fj = f(s[j]);
        for i in 0..n {
            us[(i, j)] *= fj;
        }
    }
    let out = &us * u.adjoint();
    Ok(Mat::from_fn(n, n, |i, j| (out[(i, j)] + out[(j, i)].conj()) * 0.5))
}

pub fn symmetrize(m: &Mat<f64>) -> Mat<f64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

pub fn min_eig_sym(m: &Mat<f64>) -> Result<f64> {
    Ok(eigvals_sym(m)?.first().copied().unwrap_or(0.0))
}

/// Sum of negative eigenvalues of a symmetric matrix.
pub fn negative_part_trace(m: &Mat<f64>) -> Result<f64> {
    Ok(eigvals_sym(m)?.iter().filter(|&&x| x < 0.0).sum())
}
