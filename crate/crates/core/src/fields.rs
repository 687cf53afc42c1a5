//! Divergence-free vector potentials on uniform grids.
//!
//! Every family is A = ∇_h × F with F = e·g(|x − c|) a compactly supported
//! radial profile times a fixed vector. The curl is taken with centered
//! differences of the analytic F, so the centered discrete divergence of A
//! vanishes identically away from the grid edges.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    pub n: [usize; 3],
    pub spacing: f64,
    pub origin: [f64; 3],
}

impl Grid3 {
    /// Cube of n³ sites centred at the origin.
    pub fn cube(n: usize, spacing: f64) -> Self {
        let o = -0.5 * (n as f64 - 1.0) * spacing;
        Grid3 { n: [n; 3], spacing, origin: [o; 3] }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        [i, j, k]
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [
            self.origin[0] + c[0] as f64 * self.spacing,
            self.origin[1] + c[1] as f64 * self.spacing,
            self.origin[2] + c[2] as f64 * self.spacing,
        ]
    }

    /// Physical extent along each axis (site span).
    pub fn extent(&self) -> [f64; 3] {
        [0, 1, 2].map(|d| (self.n[d] as f64 - 1.0) * self.spacing)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    /// Neighbour of `idx` along axis `d` by `step` (±1), if inside.
    pub fn neighbour(&self, idx: usize, d: usize, step: isize) -> Option<usize> {
        let mut c = self.coords(idx);
        let v = c[d] as isize + step;
        if v < 0 || v >= self.n[d] as isize {
            return None;
        }
        c[d] = v as usize;
        Some(self.index(c[0], c[1], c[2]))
    }

    /// Centered derivative along axis d of sampled scalar data,
    /// second-order one-sided at the faces.
    pub fn derivative(&self, f: &[f64], idx: usize, d: usize) -> f64 {
        let a = self.spacing;
        match (self.neighbour(idx, d, -1), self.neighbour(idx, d, 1)) {
            (Some(m), Some(p)) => (f[p] - f[m]) / (2.0 * a),
            (None, Some(p)) => {
                let p2 = self.neighbour(p, d, 1).unwrap_or(p);
                (-3.0 * f[idx] + 4.0 * f[p] - f[p2]) / (2.0 * a)
            }
            (Some(m), None) => {
                let m2 = self.neighbour(m, d, -1).unwrap_or(m);
                (3.0 * f[idx] - 4.0 * f[m] + f[m2]) / (2.0 * a)
            }
            (None, None) => 0.0,
        }
    }
}

/// Parametric generator families F = e·g(|x − c|).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FieldFamily {
    Zero,
    /// g = amplitude·exp(−ρ²/(2 width²)), treated as supported in ρ < 8 width.
    GaussianBump { center: [f64; 3], width: f64, amplitude: f64, direction: [f64; 3] },
    /// g = amplitude·(1 − ρ²/radius²)^power on ρ < radius.
    PolynomialBump { center: [f64; 3], radius: f64, amplitude: f64, direction: [f64; 3], power: u32 },
    /// Uniform field b0 inside `radius`, switched off smoothly over `transition`.
    TruncatedUniform { center: [f64; 3], b0: [f64; 3], radius: f64, transition: f64 },
}

fn smooth_step(t: f64) -> f64 {
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

impl FieldFamily {
    pub fn id(&self) -> &'static str {
        match self {
            FieldFamily::Zero => "zero",
            FieldFamily::GaussianBump { .. } => "gaussian_bump",
            FieldFamily::PolynomialBump { .. } => "polynomial_bump",
            FieldFamily::TruncatedUniform { .. } => "truncated_uniform",
        }
    }

    fn center(&self) -> [f64; 3] {
        match *self {
            FieldFamily::Zero => [0.0; 3],
            FieldFamily::GaussianBump { center, .. }
            | FieldFamily::PolynomialBump { center, .. }
            | FieldFamily::TruncatedUniform { center, .. } => center,
        }
    }

    pub fn support_radius(&self) -> f64 {
        match *self {
            FieldFamily::Zero => 0.0,
            FieldFamily::GaussianBump { width, .. } => 8.0 * width,
            FieldFamily::PolynomialBump { radius, .. } => radius,
            FieldFamily::TruncatedUniform { radius, transition, .. } => radius + transition,
        }
    }

    /// Generator F at x.
    pub fn generator(&self, x: [f64; 3]) -> [f64; 3] {
        let c = self.center();
        let rho2 = (0..3).map(|d| (x[d] - c[d]).powi(2)).sum::<f64>();
        match *self {
            FieldFamily::Zero => [0.0; 3],
            FieldFamily::GaussianBump { width, amplitude, direction, .. } => {
                let g = amplitude * (-rho2 / (2.0 * width * width)).exp();
                direction.map(|e| g * e)
            }
            FieldFamily::PolynomialBump { radius, amplitude, direction, power, .. } => {
                let u = rho2 / (radius * radius);
                let g = if u >= 1.0 { 0.0 } else { amplitude * (1.0 - u).powi(power as i32) };
                direction.map(|e| g * e)
            }
            FieldFamily::TruncatedUniform { b0, radius, transition, .. } => {
                let rho = rho2.sqrt();
                let chi = 1.0 - smooth_step((rho - radius) / transition);
                let g = -0.25 * rho2 * chi;
                b0.map(|e| g * e)
            }
        }
    }

    /// Same family with every length multiplied by `s` and the generator by `m`.
    pub fn rescaled(&self, s: f64, m: f64) -> Self {
        let sc = |c: [f64; 3]| c.map(|x| x * s);
        match self.clone() {
            FieldFamily::Zero => FieldFamily::Zero,
            FieldFamily::GaussianBump { center, width, amplitude, direction } => {
                FieldFamily::GaussianBump { center: sc(center), width: width * s, amplitude: amplitude * m, direction }
            }
            FieldFamily::PolynomialBump { center, radius, amplitude, direction, power } => {
                FieldFamily::PolynomialBump { center: sc(center), radius: radius * s, amplitude: amplitude * m, direction, power }
            }
            FieldFamily::TruncatedUniform { center, b0, radius, transition } => FieldFamily::TruncatedUniform {
                center: sc(center),
                b0: b0.map(|b| b * m / (s * s)),
                radius: radius * s,
                transition: transition * s,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: Grid3,
    /// A at each site, row-major site order.
    pub a: Vec<[f64; 3]>,
}

/// A = ∇_h × F for the chosen family, sampled on the grid sites.
pub fn make_divfree_field(family: &FieldFamily, grid: Grid3) -> Result<VectorField> {
    if family.support_radius() > 0.0 {
        let c = family.center();
        let rad = family.support_radius() + grid.spacing;
        for d in 0..3 {
            let lo = grid.origin[d];
            let hi = lo + grid.extent()[d];
            if c[d] - rad < lo || c[d] + rad > hi {
                return Err(Error::Invalid(format!(
                    "field support (radius {:.4}) leaves the grid along axis {d}",
                    family.support_radius()
                )));
            }
        }
    }
    let a = grid.spacing;
    let vals = (0..grid.len())
        .map(|idx| {
            let x = grid.point(idx);
            let mut dfd = [[0.0; 3]; 3]; // dfd[d][i] = ∂_d F_i
            for d in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[d] += a;
                xm[d] -= a;
                let (fp, fm) = (family.generator(xp), family.generator(xm));
                for i in 0..3 {
                    dfd[d][i] = (fp[i] - fm[i]) / (2.0 * a);
                }
            }
            [dfd[1][2] - dfd[2][1], dfd[2][0] - dfd[0][2], dfd[0][1] - dfd[1][0]]
        })
        .collect();
    Ok(VectorField { grid, a: vals })
}

impl VectorField {
    pub fn zero(grid: Grid3) -> Self {
        VectorField { grid, a: vec![[0.0; 3]; grid.len()] }
    }

    fn component(&self, i: usize) -> Vec<f64> {
        self.a.iter().map(|v| v[i]).collect()
    }

    /// grad[idx][d][i] = ∂_d A_i.
    pub fn gradient(&self) -> Vec<[[f64; 3]; 3]> {
        let comps: Vec<Vec<f64>> = (0..3).map(|i| self.component(i)).collect();
        (0..self.grid.len())
            .map(|idx| {
                let mut g = [[0.0; 3]; 3];
                for d in 0..3 {
                    for i in 0..3 {
                        g[d][i] = self.grid.derivative(&comps[i], idx, d);
                    }
                }
                g
            })
            .collect()
    }

    /// B = ∇_h × A at sites.
    pub fn curl(&self) -> Vec<[f64; 3]> {
        self.gradient()
            .iter()
            .map(|g| [g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]])
            .collect()
    }

    pub fn divergence(&self) -> Vec<f64> {
        self.gradient().iter().map(|g| g[0][0] + g[1][1] + g[2][2]).collect()
    }

    /// ∫|∇×A|².
    pub fn curl_energy(&self) -> f64 {
        self.curl().iter().map(|b| b.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() * self.grid.cell_volume()
    }

    /// ∫|∇⊗A|².
    pub fn gradient_energy(&self) -> f64 {
        self.gradient()
            .iter()
            .map(|g| g.iter().flatten().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn max_abs_b(&self) -> f64 {
        self.curl().iter().map(|b| norm3(b)).fold(0.0, f64::max)
    }

    /// Adds a constant vector to A.
    pub fn shifted(&self, c: [f64; 3]) -> Self {
        VectorField { grid: self.grid, a: self.a.iter().map(|v| [v[0] + c[0], v[1] + c[1], v[2] + c[2]]).collect() }
    }

    pub fn scaled(&self, s: f64) -> Self {
        VectorField { grid: self.grid, a: self.a.iter().map(|v| v.map(|x| x * s)).collect() }
    }
}

pub fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub div_max: f64,
    pub div_l2: f64,
    /// (∫|A|⁶)^{1/3} / ∫|∇⊗A|²; zero for A ≡ 0.
    pub sobolev_ratio: f64,
    pub equality_defect: f64,
    pub gradient_energy: f64,
    pub curl_energy: f64,
}

pub fn check_admissible(f: &VectorField) -> AdmissibilityReport {
    let vol = f.grid.cell_volume();
    let div = f.divergence();
    let div_max = div.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let div_l2 = (div.iter().map(|x| x * x).sum::<f64>() * vol).sqrt();
    let l6 = f.a.iter().map(|v| norm3(v).powi(6)).sum::<f64>() * vol;
    let ge = f.gradient_energy();
    let ce = f.curl_energy();
    let sobolev_ratio = if ge > 0.0 { l6.cbrt() / ge } else { 0.0 };
    AdmissibilityReport { div_max, div_l2, sobolev_ratio, equality_defect: (ge - ce).abs(), gradient_energy: ge, curl_energy: ce }
}

/// (∫|∇×A|², ∫|∇×A|²/(8πα²)).
pub fn field_energy(f: &VectorField, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::Invalid(format!("alpha must be positive for the scaled field energy, got {alpha}")));
    }
    let raw = f.curl_energy();
    Ok((raw, raw / (8.0 * std::f64::consts::PI * alpha * alpha)))
}

const MAGIC: &[u8; 4] = b"RSVF";
const VERSION: u32 = 1;

/// Binary layout (little endian): magic "RSVF", u32 version, 3×u64 site
/// counts, f64 spacing, 3×f64 origin, 3×f64 extent, 3 bytes component
/// order "xyz", then per site (row-major, last axis fastest) Ax, Ay, Az as f64.
pub fn write_field<W: Write>(f: &VectorField, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for n in f.grid.n {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    w.write_all(&f.grid.spacing.to_le_bytes())?;
    for o in f.grid.origin {
        w.write_all(&o.to_le_bytes())?;
    }
    for e in f.grid.extent() {
        w.write_all(&e.to_le_bytes())?;
    }
    w.write_all(b"xyz")?;
    for v in &f.a {
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_field<R: Read>(mut r: R) -> Result<VectorField> {
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if &b4 != MAGIC {
        return Err(Error::Io("not a field file".into()));
    }
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != VERSION {
        return Err(Error::Io("unsupported field file version".into()));
    }
    let mut n = [0usize; 3];
    for v in n.iter_mut() {
        r.read_exact(&mut b8)?;
        *v = u64::from_le_bytes(b8) as usize;
    }
    let mut rd = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let spacing = rd(&mut r)?;
    let origin = [rd(&mut r)?, rd(&mut r)?, rd(&mut r)?];
    for _ in 0..3 {
        rd(&mut r)?;
    }
    let mut order = [0u8; 3];
    r.read_exact(&mut order)?;
    if &order != b"xyz" {
        return Err(Error::Io("unsupported component order".into()));
    }
    let grid = Grid3 { n, spacing, origin };
    let mut a = Vec::with_capacity(grid.len());
    for _ in 0..grid.len() {
        a.push([rd(&mut r)?, rd(&mut r)?, rd(&mut r)?]);
    }
    Ok(VectorField { grid, a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_family_gives_zero_field() {
        let f = make_divfree_field(&FieldFamily::Zero, Grid3::cube(6, 0.3)).unwrap();
        let r = check_admissible(&f);
        assert_eq!((r.div_max, r.curl_energy, r.gradient_energy, r.sobolev_ratio), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(field_energy(&f, 0.1).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn support_outside_grid_rejected() {
        let fam = FieldFamily::PolynomialBump { center: [0.0; 3], radius: 2.0, amplitude: 1.0, direction: [0.0, 0.0, 1.0], power: 4 };
        assert!(make_divfree_field(&fam, Grid3::cube(8, 0.2)).is_err());
    }

    #[test]
    fn alpha_zero_rejected() {
        let f = VectorField::zero(Grid3::cube(3, 1.0));
        assert!(field_energy(&f, 0.0).is_err());
    }

    #[test]
    fn binary_roundtrip() {
        let fam = FieldFamily::GaussianBump { center: [0.1, 0.0, -0.1], width: 0.05, amplitude: 0.7, direction: [0.3, 0.5, 0.8] };
        let f = make_divfree_field(&fam, Grid3::cube(12, 1.0 / 8.0)).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        assert_eq!(read_field(buf.as_slice()).unwrap(), f);
    }
}
