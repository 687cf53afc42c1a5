//! Scott function from localized Coulomb traces, the two-term semiclassical
//! fit for the atomic TF potential, and the multiscale cover.

mod cover;
mod semiclassical;

pub use cover::{build_multiscale_cover, partition_check, CoverAudit, CoverElement, MultiscaleCover, PartitionReport, QuadSpec, ThetaProfile};
pub use semiclassical::{scott_fit, semiclassical_trace, weyl_coefficient, ScottFit, SemiclassicalSettings, SemiclassicalTrace};

use crate::error::{Error, Result};
use crate::phase_space::cutoff_coulomb_weyl_term;
use crate::spectral::{build_radial_channel, dense, RadialGrid, RadialGridSpec, Tridiag};
use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// C∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Radial cutoff φ(s), s = |x|/R: 1 on s ≤ 1/2, 0 on s ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// C∞ transition.
    Smooth,
    /// C² transition 6t⁵ − 15t⁴ + 10t³.
    Polynomial,
}

impl CutoffProfile {
    pub fn eval(&self, s: f64) -> f64 {
        let t = 2.0 * (1.0 - s);
        match self {
            CutoffProfile::Smooth => smooth_step(t),
            CutoffProfile::Polynomial => {
                let t = t.clamp(0.0, 1.0);
                t * t * t * (t * (6.0 * t - 15.0) + 10.0)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CutoffProfile::Smooth => "smooth",
            CutoffProfile::Polynomial => "polynomial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScottSettings {
    pub r_min: f64,
    /// Logarithmic spacing near the nucleus.
    pub delta: f64,
    /// Outer spacing as a fraction of the largest R.
    pub outer_fraction: f64,
    /// Spacing c·√r at intermediate radii.
    pub sqrt_spacing: f64,
    /// Channel cap; reaching it with a nonzero last channel is an error
    /// unless the estimated tail is below `tail_tol` of the total.
    pub l_cap: usize,
    pub tail_tol: f64,
}

impl Default for ScottSettings {
    fn default() -> Self {
        ScottSettings { r_min: 1e-5, delta: 0.02, outer_fraction: 1.0 / 160.0, sqrt_spacing: 0.1, l_cap: 400, tail_tol: 1e-3 }
    }
}

impl ScottSettings {
    pub fn refined(&self, f: f64) -> Self {
        ScottSettings {
            delta: self.delta * f,
            outer_fraction: self.outer_fraction * f,
            sqrt_spacing: self.sqrt_spacing * f,
            ..*self
        }
    }

    fn grid(&self, r_big: f64, alpha: f64) -> Result<RadialGrid> {
        // f(K) is computed in a box slightly larger than the cutoff support
        let r_box = r_big + 40.0 * alpha + 1.0;
        RadialGrid::new(RadialGridSpec {
            r_min: self.r_min,
            r_max: r_box,
            delta: self.delta,
            delta_max: self.outer_fraction * r_big,
            sqrt_spacing: self.sqrt_spacing,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedTrace {
    pub r: f64,
    /// tr[φ_R(f(−Δ) − 1/|x|)φ_R]_− summed over channels with spin 2.
    pub trace: f64,
    /// Weyl term of the same quantity.
    pub weyl: f64,
    /// trace − weyl.
    pub value: f64,
    /// Lowest localized eigenvalue over all channels.
    pub lowest: f64,
    pub l_max: usize,
    pub tail_estimate: f64,
    pub nodes: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha < 2.0 / PI) {
        return Err(Error::Constraint(format!("coupling alpha = {alpha} must lie in [0, 2/pi)")));
    }
    Ok(())
}

fn check_sequence(rs: &[f64]) -> Result<()> {
    if rs.is_empty() || rs.iter().any(|&r| !(r > 0.0)) || rs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("R sequence must be positive and increasing".into()));
    }
    Ok(())
}

/// Per-channel (negative sum, lowest eigenvalue) for every R.
fn channel_traces(l: usize, grid: &RadialGrid, alpha: f64, rs: &[f64], profile: CutoffProfile) -> Result<Vec<(f64, f64)>> {
    let op = build_radial_channel(l, grid, |r| -1.0 / r, 1.0)?;
    let nodes = grid.interior();
    let form = op.kinetic_form();
    let fk: Option<Mat<f64>> = if alpha == 0.0 { None } else { Some(form.rel(alpha)) };
    let t = form.tridiag();
    let mut out = Vec::with_capacity(rs.len());
    for &r_big in rs {
        let m = grid.count_below(r_big);
        let w: Vec<f64> = nodes[..m].iter().map(|&x| profile.eval(x / r_big)).collect();
        let (sum, lowest) = match &fk {
            None => {
                let d = (0..m).map(|i| w[i] * w[i] * (0.5 * t.d[i] - 1.0 / nodes[i])).collect();
                let e = (0..m.saturating_sub(1)).map(|i| w[i] * 0.5 * t.e[i] * w[i + 1]).collect();
                let ev = Tridiag::new(d, e).eigenvalues_below(0.0);
                (ev.iter().sum::<f64>(), ev.first().copied().unwrap_or(0.0))
            }
            Some(f) => {
                let h = Mat::from_fn(m, m, |i, j| {
                    let v = f[(i, j)] - if i == j { 1.0 / nodes[i] } else { 0.0 };
                    w[i] * v * w[j]
                });
                let ev = dense::eigvals_sym(&h)?;
                let neg: f64 = ev.iter().filter(|&&x| x < 0.0).sum();
                (neg, ev.first().copied().unwrap_or(0.0).min(0.0))
            }
        };
        out.push((sum, lowest));
    }
    Ok(out)
}

/// Localized Coulomb traces tr[φ_R(f_α(−Δ) − 1/|x|)φ_R]_− for every R in
/// `rs`, sharing one f_α(K) per channel across the R sequence.
pub fn localized_coulomb_traces(
    alpha: f64,
    rs: &[f64],
    profile: CutoffProfile,
    settings: &ScottSettings,
) -> Result<Vec<LocalizedTrace>> {
    check_alpha(alpha)?;
    check_sequence(rs)?;
    let r_big = *rs.last().unwrap();
    let grid = settings.grid(r_big, alpha)?;
    let chunk = 8;
    let mut per_l: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut l0 = 0;
    loop {
        let ls: Vec<usize> = (l0..(l0 + chunk).min(settings.l_cap + 1)).collect();
        if ls.is_empty() {
            break;
        }
        let res: Vec<Result<Vec<(f64, f64)>>> =
            ls.par_iter().map(|&l| channel_traces(l, &grid, alpha, rs, profile)).collect();
        let mut done = false;
        for r in res {
            let v = r?;
            let zero = v.iter().all(|&(s, _)| s == 0.0);
            per_l.push(v);
            if zero {
                done = true;
                break;
            }
        }
        if done {
            break;
        }
        l0 += chunk;
    }
    let exhausted = per_l.last().is_some_and(|v| v.iter().any(|&(s, _)| s != 0.0));
    let mut out = Vec::with_capacity(rs.len());
    for (ir, &r) in rs.iter().enumerate() {
        let vals: Vec<f64> = per_l.iter().map(|v| v[ir].0).collect();
        let cs = crate::spectral::channel_sum(&vals, vals.len() - 1, 2);
        if exhausted && !(cs.truncation_error <= settings.tail_tol * cs.total.abs()) {
            return Err(Error::NotConverged(format!(
                "channel sum at R = {r} not converged by l = {} (tail {:e})",
                vals.len() - 1,
                cs.tail_estimate
            )));
        }
        let lowest = per_l.iter().map(|v| v[ir].1).fold(0.0, f64::min);
        let l_max = vals.iter().rposition(|&v| v != 0.0).unwrap_or(0);
        let weyl = cutoff_coulomb_weyl_term(r, 1.0, &|s| profile.eval(s))?;
        let trace = cs.total + if exhausted { cs.tail_estimate } else { 0.0 };
        out.push(LocalizedTrace {
            r,
            trace,
            weyl,
            value: trace - weyl,
            lowest,
            l_max,
            tail_estimate: if exhausted { cs.tail_estimate } else { 0.0 },
            nodes: grid.count_below(r),
        });
    }
    Ok(out)
}

/// Single-R convenience wrapper.
pub fn localized_coulomb_trace(alpha: f64, r: f64, profile: CutoffProfile, settings: &ScottSettings) -> Result<LocalizedTrace> {
    Ok(localized_coulomb_traces(alpha, &[r], profile, settings)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub error: f64,
    /// Exponent of the single-power model L + a·R^{-p}.
    pub p: f64,
    pub power_limit: f64,
    pub model: String,
}

/// Limit of v(R) from the last three points of a sequence with a constant
/// ratio R_{i+1}/R_i. Primary model L + a·R^{-1/2} + b·R^{-1}; the
/// single-power model L + a·R^{-p} with fitted p supplies the error bar,
/// together with how well the primary model predicts any earlier point.
pub fn extrapolate(rs: &[f64], v: &[f64]) -> Result<Extrapolation> {
    let n = rs.len();
    if n < 3 || v.len() != n {
        return Err(Error::Invalid("extrapolation needs at least three points".into()));
    }
    let d: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    if d.windows(2).any(|w| w[1].abs() >= w[0].abs()) {
        return Err(Error::NotConverged(format!("increments {d:?} are not Cauchy-decreasing")));
    }
    let (r, y) = (&rs[n - 3..], &v[n - 3..]);
    let a = Mat::from_fn(3, 3, |i, j| [1.0, r[i].powf(-0.5), 1.0 / r[i]][j]);
    let rhs = Mat::from_fn(3, 1, |i, _| y[i]);
    let sol = a.partial_piv_lu().solve(&rhs);
    let limit = sol[(0, 0)];
    let predict = |rr: f64| sol[(0, 0)] + sol[(1, 0)] * rr.powf(-0.5) + sol[(2, 0)] / rr;
    let back = (0..n - 3).map(|i| (predict(rs[i]) - v[i]).abs()).fold(0.0, f64::max);
    let (d1, d2) = (y[1] - y[0], y[2] - y[1]);
    let q = d2 / d1;
    let ratio = r[2] / r[1];
    let (p, power_limit) = if q > 0.0 && q < 1.0 {
        (-q.ln() / ratio.ln(), y[2] + d2 * q / (1.0 - q))
    } else {
        (f64::NAN, f64::NAN)
    };
    let spread = if power_limit.is_finite() { (power_limit - limit).abs() } else { (y[2] - limit).abs() };
    Ok(Extrapolation {
        limit,
        error: spread.max(back),
        p,
        power_limit,
        model: "L + a R^-1/2 + b R^-1".into(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScottEstimate {
    pub alpha: f64,
    pub profile: CutoffProfile,
    pub rs: Vec<f64>,
    pub traces: Vec<LocalizedTrace>,
    pub extrapolation: Extrapolation,
    /// Extrapolated limit, an estimate of 2S₂(α).
    pub two_s2: f64,
    pub s2: f64,
    pub s2_error: f64,
}

pub fn scott_function(alpha: f64, rs: &[f64], profile: CutoffProfile, settings: &ScottSettings) -> Result<ScottEstimate> {
    let traces = localized_coulomb_traces(alpha, rs, profile, settings)?;
    let vals: Vec<f64> = traces.iter().map(|t| t.value).collect();
    let ex = extrapolate(rs, &vals)?;
    Ok(ScottEstimate {
        alpha,
        profile,
        rs: rs.to_vec(),
        traces,
        two_s2: ex.limit,
        s2: 0.5 * ex.limit,
        s2_error: 0.5 * ex.error,
        extrapolation: ex,
    })
}

/// ε = h^{-3/5} ℓ^{1/10} ℬ, the field-strength choice in the Scott-region
/// localization, evaluated for given h, ℓ and field size ℬ.
pub fn epsilon_choice(h: f64, ell: f64, field: f64) -> f64 {
    h.powf(-0.6) * ell.powf(0.1) * field
}

/// β²ℓ³, the a priori bound on ℬ² up to a constant.
pub fn a_priori_field_bound(beta: f64, ell: f64) -> f64 {
    beta * beta * ell.powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_cutoffs() {
        for p in [CutoffProfile::Smooth, CutoffProfile::Polynomial] {
            assert_eq!(p.eval(0.0), 1.0);
            assert_eq!(p.eval(0.5), 1.0);
            assert_eq!(p.eval(1.0), 0.0);
            assert_eq!(p.eval(1.5), 0.0);
            let mut prev = 1.0;
            for i in 0..=100 {
                let v = p.eval(0.5 + 0.005 * i as f64);
                assert!(v <= prev && v >= 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn extrapolation_recovers_model() {
        let rs = [16.0, 64.0, 256.0, 1024.0];
        let v: Vec<f64> = rs.iter().map(|r: &f64| 0.5 + 0.3 / r.sqrt() + 0.1 / r).collect();
        let e = extrapolate(&rs, &v).unwrap();
        assert!((e.limit - 0.5).abs() < 1e-12);
        assert!(e.error < 0.02);
        let bad = [1.0, 2.0, 4.0, 3.0];
        assert!(extrapolate(&rs, &bad).is_err());
    }

    #[test]
    fn rejects_supercritical() {
        let s = ScottSettings::default();
        assert!(matches!(localized_coulomb_traces(0.7, &[4.0], CutoffProfile::Smooth, &s), Err(Error::Constraint(_))));
    }
}
