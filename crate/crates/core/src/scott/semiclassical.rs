use crate::error::{Error, Result};
use crate::phase_space::{weyl_integral, Geometry, Kinetic, SymbolSpec};
use crate::spectral::{build_radial_channel, channel_sum, dense, RadialGrid, RadialGridSpec};
use crate::tf::TfSolution;
use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalSettings {
    pub r_min: f64,
    pub r_max: f64,
    pub delta: f64,
    /// Outer spacing in units of h.
    pub outer_per_h: f64,
    pub l_cap: usize,
}

impl Default for SemiclassicalSettings {
    fn default() -> Self {
        SemiclassicalSettings { r_min: 1e-7, r_max: 30.0, delta: 0.01, outer_per_h: 0.2, l_cap: 400 }
    }
}

impl SemiclassicalSettings {
    pub fn refined(&self, f: f64) -> Self {
        SemiclassicalSettings { delta: self.delta * f, outer_per_h: self.outer_per_h * f, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalTrace {
    pub h: f64,
    pub beta: f64,
    pub kappa: f64,
    /// tr[f_β(h²(−Δ)) − κ̃V^TF]_− with spin 2.
    pub value: f64,
    pub l_max: usize,
    pub channels: Vec<f64>,
    pub nodes: usize,
}

/// Radial-channel evaluation of tr[f_β(−h²Δ) − κ̃V^TF]_− for the neutral
/// atom with Z = 1; β = 0 is the nonrelativistic ½h²(−Δ).
pub fn semiclassical_trace(
    sol: &TfSolution,
    h: f64,
    beta: f64,
    kappa: f64,
    settings: &SemiclassicalSettings,
) -> Result<SemiclassicalTrace> {
    if !sol.converged {
        return Err(Error::NotConverged("TF solution not converged".into()));
    }
    if !(h > 0.0) || !(beta >= 0.0) {
        return Err(Error::Invalid("need h > 0 and beta >= 0".into()));
    }
    if beta > h {
        return Err(Error::Constraint(format!("beta = {beta} exceeds h = {h}")));
    }
    if !(kappa > 0.0 && kappa < 2.0 / PI) {
        return Err(Error::Constraint(format!("kappa = {kappa} must lie in (0, 2/pi)")));
    }
    let grid = RadialGrid::new(RadialGridSpec {
        r_min: settings.r_min,
        r_max: settings.r_max,
        delta: settings.delta,
        delta_max: settings.outer_per_h * h,
        sqrt_spacing: 0.0,
    })?;
    let v = |r: f64| -kappa * sol.v1(r);
    let one = |l: usize| -> Result<f64> {
        let op = build_radial_channel(l, &grid, v, h)?;
        if beta == 0.0 {
            Ok(op.schrodinger().negative_sum())
        } else {
            let m: Mat<f64> = op.rel_hamiltonian(beta);
            dense::negative_part_trace(&m)
        }
    };
    let chunk = 8;
    let mut channels = Vec::new();
    let mut l0 = 0;
    'outer: while l0 <= settings.l_cap {
        let ls: Vec<usize> = (l0..(l0 + chunk).min(settings.l_cap + 1)).collect();
        let res: Vec<Result<f64>> = ls.par_iter().map(|&l| one(l)).collect();
        for r in res {
            let s = r?;
            channels.push(s);
            if s == 0.0 {
                break 'outer;
            }
        }
        l0 += chunk;
    }
    if channels.last().is_some_and(|&s| s != 0.0) {
        return Err(Error::NotConverged(format!("bound states persist up to l = {}", settings.l_cap)));
    }
    let total = channel_sum(&channels, channels.len() - 1, 2).total;
    Ok(SemiclassicalTrace {
        h,
        beta,
        kappa,
        value: total,
        l_max: channels.len().saturating_sub(2),
        channels,
        nodes: grid.n(),
    })
}

/// Closed-form leading coefficient (2/(2π)³)∬[½p² − κ̃V^TF]_− for h = 1.
pub fn weyl_coefficient(sol: &TfSolution, kappa: f64) -> Result<f64> {
    let v = |x: [f64; 3]| kappa * sol.v1(x[0]);
    let one = |_: [f64; 3]| 1.0;
    weyl_integral(&SymbolSpec {
        kinetic: Kinetic::NonRelativistic,
        h: 1.0,
        potential: &v,
        weight: &one,
        geometry: Geometry::Radial { r_max: f64::INFINITY },
        tol: 1e-10,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScottFit {
    pub c0: f64,
    pub c2: f64,
    /// Condition number of the normal equations.
    pub condition: f64,
    pub rms: f64,
    /// Log-log slope of |value − c0_ref·h⁻³| against h, where c0_ref is
    /// the supplied reference (or the fitted c0).
    pub residual_slope: f64,
    pub c0_reference: f64,
    /// |c2 − (value − c0_ref·h⁻³)h²| at the smallest h: the spread between the
    /// fitted and the directly read-off subleading coefficient.
    pub c2_error: f64,
}

/// Least squares value(h) = c0·h⁻³ + c2·h⁻².
pub fn scott_fit(hs: &[f64], values: &[f64], c0_reference: Option<f64>) -> Result<ScottFit> {
    let n = hs.len();
    if n < 2 || values.len() != n {
        return Err(Error::Invalid("fit needs matching h and value sequences of length >= 2".into()));
    }
    if hs.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Invalid("h must be positive".into()));
    }
    // value·h³ = c0 + c2·h, scaled so both columns are O(1)
    let hm = hs.iter().cloned().fold(0.0, f64::max);
    let a = Mat::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { hs[i] / hm });
    let y = Mat::from_fn(n, 1, |i, _| values[i] * hs[i].powi(3));
    let ata = a.transpose() * &a;
    let aty = a.transpose() * &y;
    let ev = dense::eigvals_sym(&ata)?;
    let condition = ev[1] / ev[0];
    if !(condition.is_finite() && condition < 1e12) {
        return Err(Error::NotConverged(format!("ill-conditioned fit (condition {condition:e})")));
    }
    let c = ata.partial_piv_lu().solve(&aty);
    let (c0, c2) = (c[(0, 0)], c[(1, 0)] / hm);
    let rms = (hs
        .iter()
        .zip(values)
        .map(|(&h, &v)| (v - c0 / h.powi(3) - c2 / (h * h)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let c0r = c0_reference.unwrap_or(c0);
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = hs.iter().zip(values).map(|(&h, &v)| (v - c0r / h.powi(3)).abs().ln()).collect();
    let residual_slope = linear_slope(&xs, &ys);
    let i_min = (0..n).min_by(|&i, &j| hs[i].total_cmp(&hs[j])).unwrap_or(0);
    let direct = (values[i_min] - c0r / hs[i_min].powi(3)) * hs[i_min] * hs[i_min];
    Ok(ScottFit { c0, c2, condition, rms, residual_slope, c0_reference: c0r, c2_error: (c2 - direct).abs() })
}

fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
