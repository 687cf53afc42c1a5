//! Semiclassical phase-space integrals.

use crate::error::{Error, Result};
use crate::quad;
use std::f64::consts::PI;

/// 16√2π/15, from 4π∫₀^{√(2V)} (V − p²/2) p² dp = C·V^{5/2}.
pub fn weyl_momentum_constant() -> f64 {
    let pf = 2f64.sqrt(); // √(2V) at V = 1
    4.0 * PI * (pf.powi(3) / 3.0 - pf.powi(5) / 10.0)
}

/// ∫[½p² − V]_− dp over R³.
pub fn momentum_nonrel(v: f64) -> f64 {
    if v <= 0.0 { 0.0 } else { -weyl_momentum_constant() * v.powf(2.5) }
}

/// ∫[√(β⁻²p²+β⁻⁴) − β⁻² − V]_− dp over R³ by adaptive Gauss–Kronrod
/// up to the turning point p_max = √(2V + β²V²).
pub fn momentum_rel(v: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        return Ok(momentum_nonrel(v));
    }
    if v <= 0.0 {
        return Ok(0.0);
    }
    let pmax = (2.0 * v + beta * beta * v * v).sqrt();
    let e = |p: f64| {
        let x = beta * beta * p * p;
        x / ((1.0 + x).sqrt() + 1.0) / (beta * beta)
    };
    let (val, _) = quad::integrate(|p| 4.0 * PI * p * p * (e(p) - v).min(0.0), 0.0, pmax, 0.0, 1e-13)?;
    Ok(val)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kinetic {
    NonRelativistic,
    Relativistic { beta: f64 },
}

/// Where the spatial integrand lives.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Potential and weight depend on |x − center| only; support in r ≤ r_max
    /// (r_max = ∞ allowed).
    Radial { r_max: f64 },
    /// General integrand with singular points at `centers`; support within
    /// distance `r_max` of some center.
    Centers { centers: Vec<[f64; 3]>, r_max: f64 },
}

pub struct SymbolSpec<'a> {
    pub kinetic: Kinetic,
    pub h: f64,
    /// V(x); for radial geometry called with x = (r, 0, 0).
    pub potential: &'a dyn Fn([f64; 3]) -> f64,
    /// θ²(x) in [0, 1].
    pub weight: &'a dyn Fn([f64; 3]) -> f64,
    pub geometry: Geometry,
    pub tol: f64,
}

impl SymbolSpec<'_> {
    fn check(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::Invalid(format!("h must be positive, got {}", self.h)));
        }
        if let Kinetic::Relativistic { beta } = self.kinetic {
            if !(beta >= 0.0) {
                return Err(Error::Invalid(format!("beta must be >= 0, got {beta}")));
            }
        }
        Ok(())
    }
}

fn prefactor(h: f64) -> f64 {
    SPIN_Q / (2.0 * PI * h).powi(3)
}

const SPIN_Q: f64 = 2.0;

/// ∫₀^∞ f(r) 4πr² dr; r = u² near 0 and r = r₁/s beyond r₁.
pub fn radial_integral(f: impl Fn(f64) -> f64, r_max: f64, tol: f64) -> Result<f64> {
    let r1 = r_max.min(50.0);
    let g = |u: f64| {
        let r = u * u;
        if r == 0.0 { 0.0 } else { f(r) * 4.0 * PI * r * r * 2.0 * u }
    };
    let (a, _) = quad::integrate(g, 0.0, r1.sqrt(), 1e-300, tol)?;
    if r_max <= r1 {
        return Ok(a);
    }
    let s_min = r1 / r_max;
    let tail = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let r = r1 / s;
        f(r) * 4.0 * PI * r * r * r1 / (s * s)
    };
    let (b, _) = quad::integrate(tail, s_min, 1.0, 1e-300, tol).map_err(|_| Error::Quadrature { a: r1, b: r_max, err: f64::NAN })?;
    Ok(a + b)
}

/// Becke fuzzy-cell weight of center k at x.
fn becke_weight(centers: &[[f64; 3]], k: usize, x: [f64; 3]) -> f64 {
    if centers.len() == 1 {
        return 1.0;
    }
    let cell = |i: usize| -> f64 {
        let mut p = 1.0;
        for j in 0..centers.len() {
            if j == i {
                continue;
            }
            let ri = crate::tf::dist(x, centers[i]);
            let rj = crate::tf::dist(x, centers[j]);
            let rij = crate::tf::dist(centers[i], centers[j]);
            let mut mu = (ri - rj) / rij;
            for _ in 0..3 {
                mu = 1.5 * mu - 0.5 * mu.powi(3);
            }
            p *= 0.5 * (1.0 - mu);
        }
        p
    };
    let total: f64 = (0..centers.len()).map(cell).sum();
    if total == 0.0 { 0.0 } else { cell(k) / total }
}

/// Angular average of g over the unit sphere with n_t × 2n_t product rule.
fn angular_mean(g: &dyn Fn([f64; 3]) -> f64, nt: usize) -> f64 {
    let (ct, wt) = quad::gauss_legendre(nt);
    let np = 2 * nt;
    let mut s = 0.0;
    for (c, w) in ct.iter().zip(&wt) {
        let st = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..np {
            let ph = 2.0 * PI * (j as f64 + 0.5) / np as f64;
            s += w * g([st * ph.cos(), st * ph.sin(), *c]);
        }
    }
    s / (2.0 * np as f64)
}

fn spatial_integral(spec: &SymbolSpec, mom: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let dens = |x: [f64; 3]| -> f64 {
        let w = (spec.weight)(x);
        if w == 0.0 {
            return 0.0;
        }
        let v = (spec.potential)(x);
        match mom(v) {
            Ok(m) => w * m,
            Err(e) => {
                *err.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let val = match &spec.geometry {
        Geometry::Radial { r_max } => radial_integral(|r| dens([r, 0.0, 0.0]), *r_max, spec.tol)?,
        Geometry::Centers { centers, r_max } => {
            let mut total = 0.0;
            for (k, c) in centers.iter().enumerate() {
                let at = |r: f64, nt: usize| {
                    angular_mean(
                        &|u: [f64; 3]| {
                            let x = [c[0] + r * u[0], c[1] + r * u[1], c[2] + r * u[2]];
                            becke_weight(centers, k, x) * dens(x)
                        },
                        nt,
                    )
                };
                let mut nt = 8;
                let mut prev = radial_integral(|r| at(r, nt), *r_max, spec.tol)?;
                loop {
                    nt *= 2;
                    let cur = radial_integral(|r| at(r, nt), *r_max, spec.tol)?;
                    if (cur - prev).abs() <= spec.tol * cur.abs().max(1e-300) {
                        total += cur;
                        break;
                    }
                    if nt > 128 {
                        return Err(Error::Quadrature { a: 0.0, b: *r_max, err: (cur - prev).abs() });
                    }
                    prev = cur;
                }
            }
            total
        }
    };
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    if !val.is_finite() {
        return Err(Error::Quadrature { a: 0.0, b: f64::INFINITY, err: f64::NAN });
    }
    Ok(val)
}

/// (2/(2πh)³)∬θ²[½p² − V]_− dx dp.
pub fn weyl_integral(spec: &SymbolSpec) -> Result<f64> {
    spec.check()?;
    if let Kinetic::Relativistic { beta } = spec.kinetic {
        if beta > 0.0 {
            return Err(Error::Invalid("weyl_integral takes the nonrelativistic symbol".into()));
        }
    }
    Ok(prefactor(spec.h) * spatial_integral(spec, &|v| Ok(momentum_nonrel(v)))?)
}

/// Same with the relativistic symbol; β = 0 falls back to [`weyl_integral`].
pub fn rel_symbol_integral(spec: &SymbolSpec) -> Result<f64> {
    spec.check()?;
    let beta = match spec.kinetic {
        Kinetic::NonRelativistic => 0.0,
        Kinetic::Relativistic { beta } => beta,
    };
    if beta == 0.0 {
        let s = SymbolSpec {
            kinetic: Kinetic::NonRelativistic,
            h: spec.h,
            potential: spec.potential,
            weight: spec.weight,
            geometry: spec.geometry.clone(),
            tol: spec.tol,
        };
        return weyl_integral(&s);
    }
    Ok(prefactor(spec.h) * spatial_integral(spec, &|v| momentum_rel(v, beta))?)
}

/// ∬φ(|x|/R)²[½p² − κ/|x|]_− dx dp (no (2πh)⁻³ prefactor).
pub fn cutoff_coulomb_weyl(r: f64, kappa: f64, profile: &dyn Fn(f64) -> f64) -> Result<f64> {
    if !(r > 0.0 && kappa > 0.0) {
        return Err(Error::Invalid("R and kappa must be positive".into()));
    }
    // 4π∫₀^R φ(r/R)² (κ/r)^{5/2} r² dr with r = u²
    let h = |u: f64| {
        let p = profile(u * u / r);
        // (κ/u²)^{5/2} u⁴ · 2u = 2κ^{5/2}
        4.0 * PI * p * p * 2.0 * kappa.powf(2.5)
    };
    let (v, _) = quad::integrate(h, 0.0, r.sqrt(), 1e-300, 1e-13)?;
    Ok(-weyl_momentum_constant() * v)
}

/// Weyl term of the localized Coulomb trace with spin 2 and h = 1.
pub fn cutoff_coulomb_weyl_term(r: f64, kappa: f64, profile: &dyn Fn(f64) -> f64) -> Result<f64> {
    Ok(prefactor(1.0) * cutoff_coulomb_weyl(r, kappa, profile)?)
}
