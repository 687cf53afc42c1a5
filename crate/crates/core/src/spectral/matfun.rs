//! The relativistic kinetic transform K ↦ √(β⁻²K + β⁻⁴) − β⁻² on dense matrices.

use super::dense;
use crate::error::{Error, Result};
use faer::{c64, Mat};

/// Scalar version, written to avoid cancellation for small β²t.
pub fn rel_scalar(t: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.5 * t;
    }
    let x = beta * beta * t;
    x / ((1.0 + x).sqrt() + 1.0) / (beta * beta)
}

fn check_psd(ev: &[f64], tol: f64) -> Result<()> {
    if let Some(&m) = ev.first() {
        let scale = ev.last().map(|x| x.abs()).unwrap_or(0.0).max(1.0);
        if m < -tol * scale {
            return Err(Error::Invalid(format!("kinetic matrix not positive semidefinite: min eigenvalue {m:e}")));
        }
    }
    Ok(())
}

/// rel_transform for a real symmetric K by eigendecomposition.
pub fn rel_transform(k: &Mat<f64>, beta: f64) -> Result<Mat<f64>> {
    if !(beta >= 0.0) {
        return Err(Error::Invalid(format!("beta must be >= 0, got {beta}")));
    }
    let (s, u) = dense::eigen_sym(k)?;
    check_psd(&s, 1e-10)?;
    if beta == 0.0 {
        return Ok(dense::symmetrize(k) * faer::Scale(0.5));
    }
    let n = s.len();
    let mut us = u.clone();
    for j in 0..n {
        let f = rel_scalar(s[j].max(0.0), beta);
        for i in 0..n {
            us[(i, j)] *= f;
        }
    }
    Ok(dense::symmetrize(&(&us * u.transpose())))
}

/// rel_transform for a Hermitian K.
pub fn rel_transform_herm(k: &Mat<c64>, beta: f64) -> Result<Mat<c64>> {
    if !(beta >= 0.0) {
        return Err(Error::Invalid(format!("beta must be >= 0, got {beta}")));
    }
    let ev = dense::eigvals_herm(k)?;
    check_psd(&ev, 1e-10)?;
    if beta == 0.0 {
        let n = k.nrows();
        return Ok(Mat::from_fn(n, n, |i, j| (k[(i, j)] + k[(j, i)].conj()) * 0.25));
    }
    dense::herm_fn(k, |t| rel_scalar(t.max(0.0), beta))
}

/// Principal square root of a PSD matrix.
pub fn sqrt_psd(k: &Mat<f64>) -> Result<Mat<f64>> {
    let (s, _) = dense::eigen_sym(k)?;
    check_psd(&s, 1e-10)?;
    dense::sym_fn(k, |t| t.max(0.0).sqrt())
}
