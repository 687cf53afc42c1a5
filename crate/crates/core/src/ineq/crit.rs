use super::InequalityReport;
use crate::error::{Error, Result};
use crate::phase_space::radial_integral;
use crate::scott::CutoffProfile;
use crate::spectral::{build_radial_channel, dense, RadialGrid, RadialGridSpec};
use faer::Mat;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::PI;

/// η = (1 − (πβ/2)²)/10.
pub fn eta(beta: f64) -> f64 {
    0.1 * (1.0 - (PI * beta / 2.0).powi(2))
}

/// Spherical Gaussian well V(x) = depth·exp(−|x|²/(2 width²)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWell {
    pub depth: f64,
    pub width: f64,
}

impl RadialWell {
    pub fn eval(&self, r: f64) -> f64 {
        self.depth * (-r * r / (2.0 * self.width * self.width)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritSpec {
    pub beta: f64,
    /// Support radius of φ_r.
    pub r: f64,
    pub profile: CutoffProfile,
    pub well: Option<RadialWell>,
    pub r_min: f64,
    pub delta: f64,
    pub delta_max: f64,
    /// Box radius for the unlocalized small-β operator.
    pub lemma_box: f64,
    pub l_cap: usize,
}

impl CritSpec {
    pub fn new(beta: f64, r: f64) -> Self {
        CritSpec {
            beta,
            r,
            profile: CutoffProfile::Smooth,
            well: None,
            r_min: 1e-6,
            delta: 0.04,
            delta_max: 0.04,
            lemma_box: 40.0,
            l_cap: 200,
        }
    }

    /// Both grid spacings scaled by `f`.
    pub fn refined(&self, f: f64) -> Self {
        CritSpec { delta: self.delta * f, delta_max: self.delta_max * f, ..self.clone() }
    }

    fn v(&self, r: f64) -> f64 {
        self.well.map_or(0.0, |w| w.eval(r))
    }

    fn v_integrals(&self) -> Result<(f64, f64)> {
        match self.well {
            None => Ok((0.0, 0.0)),
            Some(w) if w.depth <= 0.0 => Ok((0.0, 0.0)),
            Some(w) => {
                let r_max = 12.0 * w.width;
                Ok((
                    radial_integral(|r| w.eval(r).powf(2.5), r_max, 1e-12)?,
                    radial_integral(|r| w.eval(r).powi(4), r_max, 1e-12)?,
                ))
            }
        }
    }

    fn grid(&self, r_max: f64) -> Result<RadialGrid> {
        RadialGrid::new(RadialGridSpec {
            r_min: self.r_min,
            r_max,
            delta: self.delta,
            delta_max: self.delta_max,
            sqrt_spacing: 0.0,
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
    }
    if beta >= 2.0 / PI {
        return Err(Error::Constraint(format!(
            "beta = {beta} is at or above the critical coupling 2/pi; the Coulomb operator is unstable there"
        )));
    }
    Ok(())
}

/// Σ_ℓ 2(2ℓ+1) tr[w(f_β(K_ℓ) + U)w]_− over the nodes where w is nonzero,
/// stopping at the first channel with no negative eigenvalue.
fn channel_trace(grid: &RadialGrid, beta: f64, u: &dyn Fn(f64) -> f64, w: &dyn Fn(f64) -> f64, l_cap: usize) -> Result<(f64, usize)> {
    let nodes = grid.interior();
    let m = nodes.iter().rposition(|&x| w(x) != 0.0).map_or(0, |i| i + 1);
    let mut total = 0.0;
    for l in 0..=l_cap {
        let op = build_radial_channel(l, grid, |_| 0.0, 1.0)?;
        let f = op.kinetic_form().rel(beta);
        let wv: Vec<f64> = nodes[..m].iter().map(|&x| w(x)).collect();
        let h = Mat::from_fn(m, m, |i, j| {
            let d = if i == j { u(nodes[i]) } else { 0.0 };
            wv[i] * (f[(i, j)] + d) * wv[j]
        });
        let neg: f64 = dense::eigvals_sym(&h)?.iter().filter(|&&x| x < 0.0).sum();
        if neg == 0.0 {
            return Ok((total, l));
        }
        total += 2.0 * (2 * l + 1) as f64 * neg;
    }
    Err(Error::NotConverged(format!("negative channels persist beyond l = {l_cap}")))
}

/// tr[φ_r(f_β(−Δ) − 1/|x| − V)φ_r]_− at A = 0 against the η-form terms
/// η⁻³r³, η^{-3/2}∫V₊^{5/2} and η⁻³β³∫V₊⁴.
pub fn crit_stability_check(spec: &CritSpec) -> Result<InequalityReport> {
    check_beta(spec.beta)?;
    if !(spec.r > 0.0) {
        return Err(Error::Invalid(format!("localization radius must be positive, got {}", spec.r)));
    }
    let beta = spec.beta;
    let grid = spec.grid(spec.r + 20.0 * beta + 1.0)?;
    let u = |x: f64| -1.0 / x - spec.v(x);
    let w = |x: f64| spec.profile.eval(x / spec.r);
    let (lhs, channels) = channel_trace(&grid, beta, &u, &w, spec.l_cap)?;
    let e = eta(beta);
    let (v52, v4) = spec.v_integrals()?;
    let rhs_terms = vec![spec.r.powi(3) / e.powi(3), v52 / e.powf(1.5), beta.powi(3) * v4 / e.powi(3)];
    let total: f64 = rhs_terms.iter().sum();
    let c = -lhs / total;
    Ok(InequalityReport {
        id: "crit_stability".into(),
        seed: 0,
        params: json!({
            "beta": beta, "r": spec.r, "eta": e, "profile": spec.profile.name(),
            "well": spec.well, "delta": spec.delta, "delta_max": spec.delta_max,
            "nodes": grid.n(), "channels": channels,
        }),
        lhs,
        rhs_terms,
        empirical_constant: c,
        pass: lhs.is_finite() && c.is_finite(),
    })
}

/// Small-β branch: tr[f_β(−Δ) − 1{|x|≤r}/|x| − V]_− on a large ball, against
/// the β-free terms 1, ∫V₊^{5/2}, ∫V₊⁴.
pub fn small_beta_check(spec: &CritSpec) -> Result<InequalityReport> {
    if !(spec.beta > 0.0 && spec.beta < 0.05) {
        return Err(Error::Constraint(format!("small-beta branch needs beta in (0, 1/20), got {}", spec.beta)));
    }
    let grid = spec.grid(spec.lemma_box)?;
    let u = |x: f64| -(if x <= spec.r { 1.0 / x } else { 0.0 }) - spec.v(x);
    let (lhs, channels) = channel_trace(&grid, spec.beta, &u, &|_| 1.0, spec.l_cap)?;
    let (v52, v4) = spec.v_integrals()?;
    let rhs_terms = vec![1.0, v52, v4];
    let total: f64 = rhs_terms.iter().sum();
    let c = -lhs / total;
    Ok(InequalityReport {
        id: "crit_small_beta".into(),
        seed: 0,
        params: json!({
            "beta": spec.beta, "r": spec.r, "box": spec.lemma_box, "well": spec.well,
            "delta": spec.delta, "delta_max": spec.delta_max, "nodes": grid.n(), "channels": channels,
        }),
        lhs,
        rhs_terms,
        empirical_constant: c,
        pass: lhs.is_finite() && c.is_finite(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyKatoReport {
    pub l: usize,
    pub nodes: usize,
    pub delta: f64,
    /// min eig of √K − (2/π)/r + shift.
    pub kato_min: f64,
    /// min eig of K − 1/(16r²) + shift.
    pub hardy_min: f64,
}

/// Channel-ℓ Kato and Hardy operators at A = 0.
pub fn hardy_kato_check(l: usize, spec: RadialGridSpec, shift: f64) -> Result<HardyKatoReport> {
    let grid = RadialGrid::new(spec)?;
    let op = build_radial_channel(l, &grid, |_| 0.0, 1.0)?;
    let form = op.kinetic_form();
    let nodes = grid.interior();
    let mut s = form.sqrt();
    let mut k = form.tridiag().to_dense();
    for (i, &x) in nodes.iter().enumerate() {
        s[(i, i)] += shift - (2.0 / PI) / x;
        k[(i, i)] += shift - 1.0 / (16.0 * x * x);
    }
    Ok(HardyKatoReport {
        l,
        nodes: grid.n(),
        delta: spec.delta,
        kato_min: dense::min_eig_sym(&dense::symmetrize(&s))?,
        hardy_min: dense::min_eig_sym(&k)?,
    })
}
