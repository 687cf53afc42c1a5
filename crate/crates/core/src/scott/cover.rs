use crate::error::{Error, Result};
use crate::quad;
use crate::tf::{dist, model_potential, NuclearConfig, TfSolution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverElement {
    pub center: [f64; 3],
    /// ℓ(u).
    pub radius: f64,
    /// f(u) = min(ℓ^{-1/2}, ℓ^{-2}).
    pub size: f64,
    pub level: usize,
}

/// Multiscale cover of 𝒬 = {|u| ≤ 2R, d(u) ≥ r/3} by balls B(u, ℓ(u)).
///
/// Centers are not stored: level k uses the cubic lattice of spacing
/// s_k = 2^k ℓ₀ and keeps the lattice points whose ℓ lies in
/// [2^k ℓ₀, 2^{k+1} ℓ₀) up to a slack of s_k/100. Since ℓ is
/// 1/100-Lipschitz and the nearest lattice point is within (√3/2)s_k,
/// every point of 𝒬 lies in some ball.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleCover {
    pub r: f64,
    pub big_r: f64,
    pub nuclei: Vec<[f64; 3]>,
    pub ell0: f64,
    pub levels: usize,
}

pub fn build_multiscale_cover(r: f64, big_r: f64, cfg: &NuclearConfig) -> Result<MultiscaleCover> {
    cfg.validate()?;
    if !(r > 0.0 && r < cfg.r0 / 2.0 && cfg.r0 / 2.0 < big_r) {
        return Err(Error::Invalid(format!("need 0 < r < r0/2 < R, got r = {r}, r0 = {}, R = {big_r}", cfg.r0)));
    }
    let ell0 = 0.01 * (r * r + r * r / 9.0).sqrt();
    let far = 2.0 * big_r + cfg.positions.iter().map(|p| dist(*p, [0.0; 3])).fold(0.0, f64::max);
    let ell_max = 0.01 * (r * r + far * far).sqrt();
    let levels = ((ell_max / ell0).log2().floor() as usize) + 1;
    Ok(MultiscaleCover { r, big_r, nuclei: cfg.positions.clone(), ell0, levels })
}

impl MultiscaleCover {
    pub fn d(&self, u: [f64; 3]) -> f64 {
        self.nuclei.iter().map(|&p| dist(u, p)).fold(f64::INFINITY, f64::min)
    }

    /// ℓ(u) = (1/100)√(r² + d(u)²).
    pub fn ell(&self, u: [f64; 3]) -> f64 {
        let d = self.d(u);
        0.01 * (self.r * self.r + d * d).sqrt()
    }

    pub fn grad_ell(&self, u: [f64; 3]) -> [f64; 3] {
        let p = self
            .nuclei
            .iter()
            .min_by(|a, b| dist(u, **a).partial_cmp(&dist(u, **b)).unwrap())
            .copied()
            .unwrap_or([0.0; 3]);
        let l = self.ell(u);
        // ∇ℓ = 10⁻⁴ (u − p)/ℓ
        [0, 1, 2].map(|i| 1e-4 * (u[i] - p[i]) / l)
    }

    pub fn size(&self, u: [f64; 3]) -> f64 {
        let l = self.ell(u);
        l.powf(-0.5).min(l.powi(-2))
    }

    pub fn in_region(&self, u: [f64; 3]) -> bool {
        dist(u, [0.0; 3]) <= 2.0 * self.big_r && self.d(u) >= self.r / 3.0
    }

    pub fn spacing(&self, level: usize) -> f64 {
        self.ell0 * 2f64.powi(level as i32)
    }

    fn active(&self, u: [f64; 3], k: usize) -> bool {
        let s = self.spacing(k);
        let l = self.ell(u);
        let slack = 0.01 * s;
        l >= s - slack
            && l < 2.0 * s + slack
            && dist(u, [0.0; 3]) <= 2.0 * self.big_r + s
            && self.d(u) >= self.r / 3.0 - s
    }

    /// All cover elements whose ball contains x.
    pub fn elements_at(&self, x: [f64; 3]) -> Vec<CoverElement> {
        let mut out = Vec::new();
        for k in 0..self.levels {
            let s = self.spacing(k);
            let c = x.map(|v| (v / s).round() as i64);
            let reach = 3;
            for i in -reach..=reach {
                for j in -reach..=reach {
                    for m in -reach..=reach {
                        let u = [(c[0] + i) as f64 * s, (c[1] + j) as f64 * s, (c[2] + m) as f64 * s];
                        if !self.active(u, k) {
                            continue;
                        }
                        let l = self.ell(u);
                        if dist(x, u) <= l {
                            out.push(CoverElement { center: u, radius: l, size: self.size(u), level: k });
                        }
                    }
                }
            }
        }
        out
    }

    /// Random points of 𝒬: half uniform in the ball, half log-uniform in the
    /// distance to a random nucleus.
    pub fn sample_region(&self, n: usize, seed: u64) -> Vec<[f64; 3]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let dir = loop {
                let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let nv = dist(v, [0.0; 3]);
                if nv > 1e-3 && nv <= 1.0 {
                    break v.map(|c| c / nv);
                }
            };
            let u = if out.len() % 2 == 0 {
                let rad = 2.0 * self.big_r * rng.random::<f64>().cbrt();
                dir.map(|c| c * rad)
            } else {
                let p = self.nuclei[rng.random_range(0..self.nuclei.len())];
                let (a, b) = ((self.r / 3.0).ln(), (2.0 * self.big_r).ln());
                let rad = (a + (b - a) * rng.random::<f64>()).exp();
                [p[0] + dir[0] * rad, p[1] + dir[1] * rad, p[2] + dir[2] * rad]
            };
            if self.in_region(u) {
                out.push(u);
            }
        }
        out
    }

    /// Rejection-sampling audit; an uncovered sample is an error naming it.
    pub fn audit(&self, n: usize, seed: u64, tf: Option<(&TfSolution, &NuclearConfig)>) -> Result<CoverAudit> {
        let pts = self.sample_region(n, seed);
        let mut max_mult = 0;
        let mut total = 0usize;
        let mut max_grad: f64 = 0.0;
        let mut c_local: f64 = 0.0;
        for &x in &pts {
            let el = self.elements_at(x);
            if el.is_empty() {
                return Err(Error::NotConverged(format!("point {x:?} of the region is not covered")));
            }
            max_mult = max_mult.max(el.len());
            total += el.len();
            let eps = 1e-6 * self.ell(x);
            for i in 0..3 {
                let (mut a, mut b) = (x, x);
                a[i] += eps;
                b[i] -= eps;
                let g = (self.ell(a) - self.ell(b)) / (2.0 * eps);
                max_grad = max_grad.max(g.abs());
            }
            if let Some((sol, cfg)) = tf {
                let f2 = self.size(x).powi(2);
                let l = self.ell(x);
                for dir in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]] {
                    let y = [x[0] + l * dir[0], x[1] + l * dir[1], x[2] + l * dir[2]];
                    let v = model_potential(sol, cfg, y);
                    if v.is_finite() {
                        c_local = c_local.max(v.abs() / f2);
                    }
                }
            }
        }
        Ok(CoverAudit {
            samples: n,
            seed,
            levels: self.levels,
            max_multiplicity: max_mult,
            mean_multiplicity: total as f64 / n.max(1) as f64,
            max_grad_ell: max_grad,
            c_local,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverAudit {
    pub samples: usize,
    pub seed: u64,
    pub levels: usize,
    pub max_multiplicity: usize,
    pub mean_multiplicity: f64,
    /// Largest finite-difference |∇ℓ| seen.
    pub max_grad_ell: f64,
    /// Largest |V^TF(y)|/f_u² over probes y with |y − u| ≤ ℓ_u.
    pub c_local: f64,
}

/// Radial bump θ(y) = c·exp(−1/(1 − |y|²)) on the unit ball with ∫θ² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaProfile {
    pub norm: f64,
}

impl ThetaProfile {
    pub fn bump() -> Result<Self> {
        let g = |s: f64| if s >= 1.0 { 0.0 } else { (-2.0 / (1.0 - s * s)).exp() * s * s };
        let (v, _) = quad::integrate(g, 0.0, 1.0, 1e-300, 1e-14)?;
        Ok(ThetaProfile { norm: (4.0 * PI * v).sqrt().recip() })
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s >= 1.0 { 0.0 } else { self.norm * (-1.0 / (1.0 - s * s)).exp() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub radial: usize,
    pub polar: usize,
    pub azimuth: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { radial: 24, polar: 8, azimuth: 12 }
    }
}

impl QuadSpec {
    pub fn doubled(&self) -> Self {
        QuadSpec { radial: 2 * self.radial, polar: 2 * self.polar, azimuth: 2 * self.azimuth }
    }
}

impl MultiscaleCover {
    /// ∫θ_u(x)²ℓ_u⁻³ du with θ_u(x) = θ((x−u)/ℓ_u)√J(x,u) ℓ_u^{3/2}, where
    /// J = ℓ_u⁻³|1 − ∇ℓ(u)·(u−x)/ℓ_u| is the Jacobian of u ↦ (x−u)/ℓ(u).
    /// Spherical coordinates around x; along each ray the support ends at
    /// the root of ρ = ℓ(x + ρω).
    pub fn partition_integral(&self, theta: &ThetaProfile, x: [f64; 3], q: &QuadSpec) -> f64 {
        let (mu, wmu) = quad::gauss_legendre(q.polar);
        let (t, wt) = quad::gl_interval(q.radial, 0.0, 1.0);
        let dphi = 2.0 * PI / q.azimuth as f64;
        let mut total = 0.0;
        for (&m, &wm) in mu.iter().zip(&wmu) {
            let st = (1.0 - m * m).sqrt();
            for j in 0..q.azimuth {
                let ph = dphi * (j as f64 + 0.5);
                let w = [st * ph.cos(), st * ph.sin(), m];
                let at = |rho: f64| [x[0] + rho * w[0], x[1] + rho * w[1], x[2] + rho * w[2]];
                let mut rho_max = self.ell(x);
                for _ in 0..60 {
                    let next = self.ell(at(rho_max));
                    let done = (next - rho_max).abs() <= 1e-16 * rho_max;
                    rho_max = next;
                    if done {
                        break;
                    }
                }
                let mut ray = 0.0;
                for (&ti, &wi) in t.iter().zip(&wt) {
                    let rho = rho_max * ti;
                    let u = at(rho);
                    let l = self.ell(u);
                    let g = self.grad_ell(u);
                    let proj = g[0] * w[0] + g[1] * w[1] + g[2] * w[2];
                    let jac = (1.0 - rho * proj / l).abs() / l.powi(3);
                    let th = theta.eval(rho / l);
                    ray += wi * th * th * jac * rho * rho;
                }
                total += wm * dphi * ray * rho_max;
            }
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub points: usize,
    pub quad: QuadSpec,
    pub max_deviation: f64,
    pub max_deviation_doubled: f64,
    pub improvement: f64,
}

/// Checks ∫θ_u(x)²ℓ_u⁻³du = 1 at the given points with `q` and with the
/// doubled rule.
pub fn partition_check(cover: &MultiscaleCover, theta: &ThetaProfile, points: &[[f64; 3]], q: &QuadSpec) -> Result<PartitionReport> {
    if points.is_empty() {
        return Err(Error::Invalid("no sample points".into()));
    }
    let dev = |q: &QuadSpec| {
        points.iter().map(|&x| (cover.partition_integral(theta, x, q) - 1.0).abs()).fold(0.0, f64::max)
    };
    let a = dev(q);
    let b = dev(&q.doubled());
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature { a: 0.0, b: 1.0, err: f64::NAN });
    }
    Ok(PartitionReport {
        points: points.len(),
        quad: *q,
        max_deviation: a,
        max_deviation_doubled: b,
        improvement: if b > 0.0 { a / b } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom() -> MultiscaleCover {
        build_multiscale_cover(0.1, 10.0, &NuclearConfig::default()).unwrap()
    }

    #[test]
    fn theta_normalized() {
        let th = ThetaProfile::bump().unwrap();
        let (v, _) = quad::integrate(|s| 4.0 * PI * s * s * th.eval(s).powi(2), 0.0, 1.0, 1e-300, 1e-13).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn far_field_is_translation_invariant() {
        let c = atom();
        let th = ThetaProfile::bump().unwrap();
        // ℓ varies by under 1e-4 relative across the ball at d ≈ 15
        let v = c.partition_integral(&th, [15.0, 0.0, 0.0], &QuadSpec::default());
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn covers_samples() {
        let c = atom();
        let a = c.audit(300, 3, None).unwrap();
        assert!(a.max_multiplicity >= 1);
        assert!(a.max_grad_ell < 0.01);
    }

    #[test]
    fn invalid_radii() {
        assert!(build_multiscale_cover(0.6, 10.0, &NuclearConfig::default()).is_err());
    }
}
