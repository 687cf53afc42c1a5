//! Neutral-atom Thomas–Fermi theory.
//!
//! Units: kinetic symbol ½p², spin factor 2. For total charge Z = 1 the
//! potential is V(r) = φ(r/b)/r with φ'' = φ^{3/2}/√x, φ(0) = 1, φ(∞) = 0,
//! and the density is ρ = κ_ρ V^{3/2}. The screening length b is derived
//! from κ_ρ below rather than typed in.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Spin degeneracy.
pub const SPIN: f64 = 2.0;

/// ρ = KAPPA_RHO·V^{3/2}: q·(4π/3)(2V)^{3/2}/(2π)³.
pub fn kappa_rho() -> f64 {
    SPIN * (4.0 * PI / 3.0) * 2f64.powf(1.5) / (2.0 * PI).powi(3)
}

/// Screening length for Z = 1, from ΔV = 4πρ.
pub fn screening_length() -> f64 {
    (4.0 * PI * kappa_rho()).powf(-2.0 / 3.0)
}

/// Kinetic constant c_K in c_K ∫ρ^{5/3}.
pub fn kinetic_constant() -> f64 {
    // τ = q∫_{|p|<p_F} ½p² dp/(2π)³ = q·4π p_F⁵/(10(2π)³), ρ = q·4π p_F³/(3(2π)³)
    let pf_of_rho = |rho: f64| (rho * 3.0 * (2.0 * PI).powi(3) / (SPIN * 4.0 * PI)).cbrt();
    let pf = pf_of_rho(1.0);
    SPIN * 4.0 * PI * pf.powi(5) / (10.0 * (2.0 * PI).powi(3))
}

/// Sommerfeld large-x asymptote exponent.
pub fn sommerfeld_lambda() -> f64 {
    (73f64.sqrt() - 7.0) / 2.0
}

/// Sommerfeld approximant (1 + (x/a)^λ)^{-3/λ} with a³ = 144.
pub fn sommerfeld(x: f64) -> (f64, f64) {
    let lam = sommerfeld_lambda();
    let a = 144f64.cbrt();
    let u = (x / a).powf(lam);
    let s = (1.0 + u).powf(-3.0 / lam);
    let ds = if x > 0.0 { -3.0 * s / (1.0 + u) * u / x } else { f64::NEG_INFINITY };
    (s, ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearConfig {
    /// Relative charges z_k, summing to 1.
    pub charges: Vec<f64>,
    pub positions: Vec<[f64; 3]>,
    /// Total charge Z.
    pub z_total: f64,
    pub alpha: f64,
    /// Minimal separation r₀.
    pub r0: f64,
}

impl Default for NuclearConfig {
    fn default() -> Self {
        NuclearConfig { charges: vec![1.0], positions: vec![[0.0; 3]], z_total: 1.0, alpha: 0.0, r0: 1.0 }
    }
}

impl NuclearConfig {
    pub fn validate(&self) -> Result<()> {
        if self.charges.is_empty() || self.charges.len() != self.positions.len() {
            return Err(Error::Invalid("charges and positions must be nonempty and of equal length".into()));
        }
        if self.charges.iter().any(|&z| !(z > 0.0)) {
            return Err(Error::Invalid("all relative charges must be positive".into()));
        }
        let s: f64 = self.charges.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("relative charges must sum to 1, got {s}")));
        }
        if !(self.z_total > 0.0) || !(self.alpha >= 0.0) || !(self.r0 > 0.0) {
            return Err(Error::Invalid("Z, r0 must be positive and alpha nonnegative".into()));
        }
        for i in 0..self.positions.len() {
            for j in 0..i {
                let d = dist(self.positions[i], self.positions[j]);
                if d <= self.r0 {
                    return Err(Error::Invalid(format!("nuclei {j} and {i} closer than r0 = {}", self.r0)));
                }
            }
        }
        let zmax = self.charges.iter().cloned().fold(0.0, f64::max) * self.z_total;
        if zmax * self.alpha > 2.0 / PI {
            return Err(Error::Constraint(format!(
                "max_k Z_k alpha = {:.6} exceeds 2/pi; the scaling parameters need beta <= h",
                zmax * self.alpha
            )));
        }
        Ok(())
    }

    /// κ = min_k 2/(π z_k).
    pub fn kappa(&self) -> f64 {
        self.charges.iter().map(|z| 2.0 / (PI * z)).fold(f64::INFINITY, f64::min)
    }

    /// h = κ^{1/2} Z^{-1/3}.
    pub fn h(&self) -> f64 {
        self.kappa().sqrt() * self.z_total.powf(-1.0 / 3.0)
    }

    /// β = Z^{2/3} α κ^{-1/2}.
    pub fn beta(&self) -> f64 {
        self.z_total.powf(2.0 / 3.0) * self.alpha / self.kappa().sqrt()
    }

    /// Distance to the nearest nucleus.
    pub fn d(&self, x: [f64; 3]) -> f64 {
        self.positions.iter().map(|&p| dist(x, p)).fold(f64::INFINITY, f64::min)
    }
}

pub fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfGridSpec {
    pub x_max: f64,
    /// RK4 steps in t = √x on [0, 1].
    pub t_steps: usize,
    /// RK4 steps per unit of ln x on [1, x_max].
    pub log_steps_per_unit: usize,
}

impl Default for TfGridSpec {
    fn default() -> Self {
        TfGridSpec { x_max: 2.0e4, t_steps: 2000, log_steps_per_unit: 400 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfSolution {
    pub version: u32,
    pub grid: TfGridSpec,
    pub tolerance: f64,
    /// Nodes in x = r/b.
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    /// φ'(0).
    pub slope: f64,
    /// E^TF for Z = 1.
    pub energy: f64,
    pub residual: f64,
    pub converged: bool,
    /// Number of nodes in the t-segment (x ≤ 1), including x = 0.
    pub n_t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Fate {
    Low,
    High,
    Reached,
}

struct Nodes {
    x: Vec<f64>,
    n_t: usize,
    dt: f64,
    dy: f64,
}

impl Nodes {
    fn new(spec: &TfGridSpec) -> Self {
        let n_t = spec.t_steps + 1;
        let dt = 1.0 / spec.t_steps as f64;
        let ly = spec.x_max.ln();
        let m = ((ly * spec.log_steps_per_unit as f64).ceil() as usize).max(1);
        let dy = ly / m as f64;
        let mut x: Vec<f64> = (0..n_t).map(|i| (i as f64 * dt).powi(2)).collect();
        x[n_t - 1] = 1.0;
        for j in 1..=m {
            x.push((j as f64 * dy).exp());
        }
        *x.last_mut().unwrap() = spec.x_max;
        Nodes { x, n_t, dt, dy }
    }

    /// RK4 step from node k to k+1.
    fn step(&self, k: usize, phi: f64, psi: f64) -> (f64, f64) {
        let p32 = |p: f64| p.max(0.0).powf(1.5);
        if k + 1 < self.n_t {
            let t0 = k as f64 * self.dt;
            let f = |t: f64, p: f64, q: f64| (2.0 * t * q, 2.0 * p32(p));
            rk4(f, t0, self.dt, phi, psi)
        } else {
            let y0 = self.x[k].ln();
            let f = |y: f64, p: f64, q: f64| {
                let x = y.exp();
                (x * q, x.sqrt() * p32(p))
            };
            rk4(f, y0, self.dy, phi, psi)
        }
    }

    fn shoot(&self, k0: usize, phi0: f64, psi0: f64) -> (Vec<(f64, f64)>, Fate) {
        let mut traj = vec![(phi0, psi0)];
        let (mut p, mut q) = (phi0, psi0);
        for k in k0..self.x.len() - 1 {
            let (np, nq) = self.step(k, p, q);
            if !(np > 0.0) {
                return (traj, Fate::Low);
            }
            if nq >= 0.0 {
                traj.push((np, nq));
                return (traj, Fate::High);
            }
            p = np;
            q = nq;
            traj.push((p, q));
        }
        (traj, Fate::Reached)
    }
}

fn rk4(f: impl Fn(f64, f64, f64) -> (f64, f64), s: f64, h: f64, p: f64, q: f64) -> (f64, f64) {
    let (a1, b1) = f(s, p, q);
    let (a2, b2) = f(s + 0.5 * h, p + 0.5 * h * a1, q + 0.5 * h * b1);
    let (a3, b3) = f(s + 0.5 * h, p + 0.5 * h * a2, q + 0.5 * h * b2);
    let (a4, b4) = f(s + h, p + h * a3, q + h * b3);
    (p + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4), q + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4))
}

/// Shooting on φ'(0) with bisection and restarts where the bracketing
/// trajectories still agree.
pub fn solve_tf_atom(spec: &TfGridSpec, tolerance: f64) -> Result<TfSolution> {
    if !(spec.x_max > 1.0) || spec.t_steps < 4 || spec.log_steps_per_unit < 1 || !(tolerance > 0.0) {
        return Err(Error::Invalid(format!("bad TF grid {spec:?} / tolerance {tolerance}")));
    }
    let nodes = Nodes::new(spec);
    let nn = nodes.x.len();
    let mut phi = vec![0.0; nn];
    let mut dphi = vec![0.0; nn];
    let (mut lo, mut hi) = (-2.0, -1.0);
    let mut k0 = 0usize;
    let mut phi0 = 1.0;
    let mut slope = f64::NAN;
    loop {
        if nodes.shoot(k0, phi0, lo).1 != Fate::Low || nodes.shoot(k0, phi0, hi).1 != Fate::High {
            return Err(Error::Shooting { lo, hi, x: nodes.x[k0] });
        }
        let mut done: Option<Vec<(f64, f64)>> = None;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (tr, fate) = nodes.shoot(k0, phi0, mid);
            match fate {
                Fate::Low => lo = mid,
                Fate::High => hi = mid,
                Fate::Reached => {
                    lo = mid;
                    hi = mid;
                    done = Some(tr);
                    break;
                }
            }
        }
        if k0 == 0 {
            slope = 0.5 * (lo + hi);
        }
        if let Some(tr) = done {
            for (i, &(p, q)) in tr.iter().enumerate() {
                phi[k0 + i] = p;
                dphi[k0 + i] = q;
            }
            break;
        }
        let (tl, _) = nodes.shoot(k0, phi0, lo);
        let (th, _) = nodes.shoot(k0, phi0, hi);
        let m = tl.len().min(th.len());
        let mut last = 0;
        for i in 0..m {
            let (a, b) = (tl[i].0, th[i].0);
            if (a - b).abs() <= 1e-11 * a.abs().max(b.abs()) {
                last = i;
            } else {
                break;
            }
        }
        // restart a little before the divergence point
        let back = last.saturating_sub(last / 20 + 1);
        for i in 0..=back {
            phi[k0 + i] = 0.5 * (tl[i].0 + th[i].0);
            dphi[k0 + i] = 0.5 * (tl[i].1 + th[i].1);
        }
        if back == 0 {
            return Err(Error::Shooting { lo, hi, x: nodes.x[k0] });
        }
        k0 += back;
        phi0 = phi[k0];
        let (a, b) = (tl[back].1, th[back].1);
        let w = (b - a).abs().max(1e-14 * a.abs());
        lo = a.min(b) - 4.0 * w;
        hi = a.max(b) + 4.0 * w;
    }
    let phi_max = *phi.last().unwrap();
    if phi_max > tolerance {
        return Err(Error::GridTooShort { phi_max, tol: tolerance });
    }
    // step-doubling estimate of the integration error along the solution
    let mut residual: f64 = 0.0;
    for k in 0..nn - 1 {
        let (p1, _) = nodes.step(k, phi[k], dphi[k]);
        let sub = half_steps(&nodes, k, phi[k], dphi[k]);
        residual = residual.max((p1 - sub).abs());
    }
    let b = screening_length();
    let energy = 3.0 / 7.0 * slope / b;
    Ok(TfSolution {
        version: 1,
        grid: *spec,
        tolerance,
        x: nodes.x,
        phi,
        dphi,
        slope,
        energy,
        residual,
        converged: residual <= tolerance,
        n_t: nodes.n_t,
    })
}

fn half_steps(nodes: &Nodes, k: usize, p: f64, q: f64) -> f64 {
    let p32 = |p: f64| p.max(0.0).powf(1.5);
    if k + 1 < nodes.n_t {
        let t0 = k as f64 * nodes.dt;
        let f = |t: f64, p: f64, q: f64| (2.0 * t * q, 2.0 * p32(p));
        let (a, b) = rk4(f, t0, 0.5 * nodes.dt, p, q);
        rk4(f, t0 + 0.5 * nodes.dt, 0.5 * nodes.dt, a, b).0
    } else {
        let y0 = nodes.x[k].ln();
        let f = |y: f64, p: f64, q: f64| {
            let x = y.exp();
            (x * q, x.sqrt() * p32(p))
        };
        let (a, b) = rk4(f, y0, 0.5 * nodes.dy, p, q);
        rk4(f, y0 + 0.5 * nodes.dy, 0.5 * nodes.dy, a, b).0
    }
}

/// Second integrator: Newton on the 3-point finite-difference equations,
/// φ(0) = 1 and the Sommerfeld value at `x_end`. The slope is read off
/// at x = 0.01 through the small-x series, after Richardson extrapolation
/// over two resolutions. Returns φ'(0).
pub fn solve_tf_collocation(t_steps: usize, x_end: f64) -> Result<f64> {
    let t_steps = t_steps.div_ceil(10) * 10;
    let a = collocation_phi_at(t_steps, x_end, 0.01)?;
    let b = collocation_phi_at(2 * t_steps, x_end, 0.01)?;
    let phi_e = b + (b - a) / 3.0;
    Ok(slope_from_series(0.01, phi_e))
}

fn slope_from_series(x: f64, phi: f64) -> f64 {
    let mut s = -1.5;
    for _ in 0..50 {
        let lin = x + 0.4 * x.powf(2.5) + 2.0 / 15.0 * x.powi(4);
        let rest = 1.0 + 4.0 / 3.0 * x.powf(1.5) + x.powi(3) / 3.0 + 3.0 * s * s / 70.0 * x.powf(3.5);
        s = (phi - rest) / lin;
    }
    s
}

fn collocation_phi_at(t_steps: usize, x_end: f64, x_probe: f64) -> Result<f64> {
    let spec = TfGridSpec { x_max: x_end, t_steps, log_steps_per_unit: t_steps / 5 };
    let nodes = Nodes::new(&spec);
    let x = &nodes.x;
    let n = x.len();
    let mut phi: Vec<f64> = x.iter().map(|&x| sommerfeld(x).0).collect();
    phi[0] = 1.0;
    let bc = sommerfeld(x_end).0;
    phi[n - 1] = bc;
    let m = n - 2;
    for it in 0..100 {
        let mut dd = vec![0.0; m];
        let mut lo = vec![0.0; m];
        let mut up = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for k in 0..m {
            let i = k + 1;
            let hm = x[i] - x[i - 1];
            let hp = x[i + 1] - x[i];
            let c = 2.0 / (hm + hp);
            let p = phi[i].max(0.0);
            let f = c * ((phi[i + 1] - phi[i]) / hp - (phi[i] - phi[i - 1]) / hm) - p.powf(1.5) / x[i].sqrt();
            rhs[k] = -f;
            dd[k] = -c * (1.0 / hp + 1.0 / hm) - 1.5 * p.sqrt() / x[i].sqrt();
            lo[k] = c / hm;
            up[k] = c / hp;
        }
        // Thomas algorithm
        for k in 1..m {
            let w = lo[k] / dd[k - 1];
            dd[k] -= w * up[k - 1];
            rhs[k] -= w * rhs[k - 1];
        }
        let mut dx = vec![0.0; m];
        dx[m - 1] = rhs[m - 1] / dd[m - 1];
        for k in (0..m - 1).rev() {
            dx[k] = (rhs[k] - up[k] * dx[k + 1]) / dd[k];
        }
        let mut big: f64 = 0.0;
        for k in 0..m {
            phi[k + 1] += dx[k];
            big = big.max(dx[k].abs());
        }
        if big < 1e-14 {
            let i = x.iter().position(|&v| (v - x_probe).abs() < 1e-12).ok_or_else(|| Error::Invalid("probe not a node".into()))?;
            return Ok(phi[i]);
        }
        if it == 99 {
            return Err(Error::NotConverged("finite-difference Newton iteration".into()));
        }
    }
    unreachable!()
}

impl TfSolution {
    fn locate(&self, x: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    /// (φ(x), φ'(x)) by cubic Hermite interpolation in √x (x ≤ 1) or ln x,
    /// Sommerfeld tail beyond x_max.
    pub fn phi_at(&self, x: f64) -> (f64, f64) {
        if x <= 0.0 {
            return (1.0, self.slope);
        }
        let xm = *self.x.last().unwrap();
        if x >= xm {
            let (s0, _) = sommerfeld(xm);
            let (s, ds) = sommerfeld(x);
            let pm = *self.phi.last().unwrap();
            return (pm * s / s0, pm * ds / s0);
        }
        let k = self.locate(x);
        let p32 = |p: f64| p.max(0.0).powf(1.5);
        let (u0, u1, u, dudx) = if k + 1 < self.n_t {
            (self.x[k].sqrt(), self.x[k + 1].sqrt(), x.sqrt(), 0.5 / x.sqrt())
        } else {
            (self.x[k].ln(), self.x[k + 1].ln(), x.ln(), 1.0 / x)
        };
        // derivatives with respect to the local variable u
        let du = |i: usize| -> (f64, f64) {
            let xi = self.x[i];
            if k + 1 < self.n_t {
                let t = xi.sqrt();
                (2.0 * t * self.dphi[i], 2.0 * p32(self.phi[i]))
            } else {
                (xi * self.dphi[i], xi.sqrt() * p32(self.phi[i]))
            }
        };
        let (dp0, dq0) = du(k);
        let (dp1, dq1) = du(k + 1);
        let hh = u1 - u0;
        let s = (u - u0) / hh;
        let herm = |y0: f64, y1: f64, d0: f64, d1: f64| {
            let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
            let h10 = s * (1.0 - s) * (1.0 - s);
            let h01 = s * s * (3.0 - 2.0 * s);
            let h11 = s * s * (s - 1.0);
            h00 * y0 + h10 * hh * d0 + h01 * y1 + h11 * hh * d1
        };
        let p = herm(self.phi[k], self.phi[k + 1], dp0, dp1);
        let q = herm(self.dphi[k], self.dphi[k + 1], dq0, dq1);
        let _ = dudx;
        (p, q)
    }

    fn check(&self) -> Result<()> {
        if !self.converged {
            return Err(Error::NotConverged(format!("TF solution residual {:e}", self.residual)));
        }
        Ok(())
    }

    /// V^TF for Z = 1 at radius r (TF length units).
    pub fn v1(&self, r: f64) -> f64 {
        self.phi_at(r / screening_length()).0 / r
    }

    /// dV/dr for Z = 1.
    pub fn dv1(&self, r: f64) -> f64 {
        let b = screening_length();
        let (p, dp) = self.phi_at(r / b);
        dp / (b * r) - p / (r * r)
    }

    /// V^TF_Z(r) = Z^{4/3} V_1(Z^{1/3} r).
    pub fn potential_radial(&self, z: f64, r: f64) -> f64 {
        z.powf(4.0 / 3.0) * self.v1(z.cbrt() * r)
    }

    /// ρ^TF_Z(r) = Z² ρ_1(Z^{1/3} r).
    pub fn density_radial(&self, z: f64, r: f64) -> f64 {
        kappa_rho() * self.potential_radial(z, r).max(0.0).powf(1.5)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: TfSolution = serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))?;
        if v.version != 1 {
            return Err(Error::Io(format!("unsupported TF record version {}", v.version)));
        }
        Ok(v)
    }
}

/// V^TF_Z at a point for a nucleus at the origin.
pub fn tf_potential(sol: &TfSolution, z: f64, x: [f64; 3]) -> Result<f64> {
    let r = dist(x, [0.0; 3]);
    if r == 0.0 {
        return Err(Error::Invalid("V^TF evaluated at the nucleus".into()));
    }
    if !(z > 0.0) {
        return Err(Error::Invalid("Z must be positive".into()));
    }
    Ok(sol.potential_radial(z, r))
}

/// E^TF(Z) = Z^{7/3} E^TF(1).
pub fn tf_energy(sol: &TfSolution, z: f64) -> Result<f64> {
    sol.check()?;
    Ok(z.powf(7.0 / 3.0) * sol.energy)
}

/// D(ρ) = ½∬ρ(x)ρ(y)/|x−y| for a radial density sampled at increasing
/// radii, via the shell formula D = ∫ Q(r)/r dQ(r), trapezoid rule.
pub fn coulomb_energy(r: &[f64], rho: &[f64]) -> Result<f64> {
    if r.len() != rho.len() {
        return Err(Error::Invalid("radii and density lengths differ".into()));
    }
    if let Some(i) = rho.iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::Invalid(format!("negative or undefined density at r = {}", r[i])));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) || r.first().is_some_and(|&v| v < 0.0) {
        return Err(Error::Invalid("radii must be increasing and nonnegative".into()));
    }
    let dq: Vec<f64> = r.iter().zip(rho).map(|(r, p)| 4.0 * PI * r * r * p).collect();
    let mut q = 0.0;
    let mut d = 0.0;
    let mut prev_f = 0.0;
    for i in 1..r.len() {
        let h = r[i] - r[i - 1];
        q += 0.5 * h * (dq[i] + dq[i - 1]);
        let f = if r[i] > 0.0 { q / r[i] * dq[i] } else { 0.0 };
        d += 0.5 * h * (f + prev_f);
        prev_f = f;
    }
    Ok(d)
}

/// Symmetric bilinear extension D(ρ, σ) by polarization.
pub fn coulomb_pair(r: &[f64], rho: &[f64], sigma: &[f64]) -> Result<f64> {
    let sum: Vec<f64> = rho.iter().zip(sigma).map(|(a, b)| a + b).collect();
    Ok(0.5 * (coulomb_energy(r, &sum)? - coulomb_energy(r, rho)? - coulomb_energy(r, sigma)?))
}

/// Radial nodes suited to the TF density (dense near 0, to `r_max`).
pub fn tf_radial_nodes(r_max: f64, n: usize) -> Vec<f64> {
    // r = r_max·u⁴ resolves the r^{1/2} behaviour of 4πr²ρ at 0
    (0..=n).map(|i| r_max * (i as f64 / n as f64).powi(4)).collect()
}

/// D(ρ^TF) for Z = 1.
pub fn tf_coulomb_energy(sol: &TfSolution) -> Result<f64> {
    let r = tf_radial_nodes(2.0e3, 400_000);
    let rho: Vec<f64> = r.iter().map(|&r| if r > 0.0 { sol.density_radial(1.0, r) } else { 0.0 }).collect();
    coulomb_energy(&r, &rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// max V/min(d⁻¹, d⁻⁴) over the samples.
    pub c_bound: f64,
    /// max |V − Z_k/|x − r_k|| over samples with |x − r_k| ≤ r₀/2.
    pub c_near: f64,
    /// max |V|/f_u² over the probe pairs (x, u).
    pub c_local: f64,
    pub samples: usize,
    /// "atomic" or "superposition" (molecules use a sum of scaled atomic potentials).
    pub model: String,
}

/// Model potential for the envelope bounds: the exact atomic V^TF for one
/// nucleus, and Σ_k V^TF_{z_k}(x − r_k) as a proxy for molecules.
pub fn model_potential(sol: &TfSolution, cfg: &NuclearConfig, x: [f64; 3]) -> f64 {
    cfg.charges
        .iter()
        .zip(&cfg.positions)
        .map(|(&z, &p)| {
            let r = dist(x, p);
            if r == 0.0 { f64::INFINITY } else { sol.potential_radial(z, r) }
        })
        .sum()
}

/// Measures the envelope constants. `r_cover` is the inner cutoff r of the
/// multiscale cover; probes u are placed at the samples with d(u) ≥ r/3 and
/// x runs over a few points of B(u, ℓ(u)).
pub fn envelope_check(sol: &TfSolution, cfg: &NuclearConfig, samples: &[[f64; 3]], r_cover: f64) -> EnvelopeReport {
    let mut c_bound: f64 = 0.0;
    let mut c_near: f64 = 0.0;
    let mut c_local: f64 = 0.0;
    for &x in samples {
        let d = cfg.d(x);
        if d == 0.0 {
            continue;
        }
        let v = model_potential(sol, cfg, x);
        c_bound = c_bound.max(v / (1.0 / d).min(d.powi(-4)));
        for (&z, &p) in cfg.charges.iter().zip(&cfg.positions) {
            let r = dist(x, p);
            if r <= cfg.r0 / 2.0 && r > 0.0 {
                c_near = c_near.max((v - z / r).abs());
            }
        }
        if d >= r_cover / 3.0 {
            let l = 0.01 * (r_cover * r_cover + d * d).sqrt();
            let f2 = (1.0 / l).min(l.powi(-4));
            for dir in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [-0.577, 0.577, -0.577]] {
                let y = [x[0] + l * dir[0], x[1] + l * dir[1], x[2] + l * dir[2]];
                let vy = model_potential(sol, cfg, y);
                if vy.is_finite() {
                    c_local = c_local.max(vy.abs() / f2);
                }
            }
        }
    }
    EnvelopeReport {
        c_bound,
        c_near,
        c_local,
        samples: samples.len(),
        model: if cfg.charges.len() == 1 { "atomic".into() } else { "superposition".into() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn screening_length_value() {
        let b = screening_length();
        assert!((b - 0.5 * (3.0 * PI / 4.0).powf(2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn uniform_ball() {
        let a: f64 = 1.3;
        let q = 2.0;
        let rho0 = q / (4.0 / 3.0 * PI * a.powi(3));
        let r: Vec<f64> = (0..=20000).map(|i| a * i as f64 / 20000.0).collect();
        let rho = vec![rho0; r.len()];
        let d = coulomb_energy(&r, &rho).unwrap();
        assert!((d - 3.0 * q * q / (5.0 * a)).abs() < 1e-6);
        assert_eq!(coulomb_energy(&r, &vec![0.0; r.len()]).unwrap(), 0.0);
        assert!(coulomb_energy(&[0.0, 1.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = NuclearConfig::default();
        assert!(c.validate().is_ok());
        c.alpha = 0.7;
        assert!(matches!(c.validate(), Err(Error::Constraint(_))));
        c.alpha = 0.0;
        c.charges = vec![0.6, 0.5];
        c.positions = vec![[0.0; 3], [3.0, 0.0, 0.0]];
        assert!(c.validate().is_err());
    }
}
