use crate::error::{Error, Result};
use crate::fields::{Grid3, VectorField};
use crate::scott::smooth_step;
use crate::spectral::lanczos::{lowest_eigenvalues, HermOp, LanczosOptions};
use crate::spectral::pauli::{build_lattice, Csr, LatticeKind};
use faer::c64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Smooth partitions Σφ_i² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Partition {
    Trivial,
    /// φ₁ = cos ϑ, φ₂ = sin ϑ with ϑ = (π/2)·step((x_axis − center)/width + 1/2).
    TwoBump { axis: usize, center: f64, width: f64 },
}

fn step_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / ((a + b) * (a + b))
}

impl Partition {
    pub fn eval(&self, x: [f64; 3]) -> Vec<f64> {
        match *self {
            Partition::Trivial => vec![1.0],
            Partition::TwoBump { axis, center, width } => {
                let th = FRAC_PI_2 * smooth_step((x[axis] - center) / width + 0.5);
                vec![th.cos(), th.sin()]
            }
        }
    }

    /// Σ_i |∇φ_i|².
    pub fn gradient_weight(&self, x: [f64; 3]) -> f64 {
        match *self {
            Partition::Trivial => 0.0,
            Partition::TwoBump { axis, center, width } => {
                let d = FRAC_PI_2 * step_deriv((x[axis] - center) / width + 0.5) / width;
                d * d
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImsReport {
    pub sites: usize,
    pub spacing: f64,
    pub h: f64,
    pub partition_defect: f64,
    /// ‖(H₀+1)^{-1/2}(Σφ_iHφ_i − H − h²Σ|∇φ_i|²)(H₀+1)^{-1/2}‖.
    pub identity_defect: f64,
    /// min eig of C h²Σ|∇φ_i|² − (Σφ_iHφ_i − H), i.e. of the localized
    /// inequality H ≥ Σφ_i(H − C h²Σ_j|∇φ_j|²)φ_i, with the gradient sampled
    /// by lattice difference quotients.
    pub inequality_min: f64,
    pub c: f64,
}

/// (H₀ + 1)^{-1/2} for the Dirichlet lattice Laplacian h²(−Δ_a), applied
/// axis by axis in the sine basis.
struct FreeWeight {
    n: usize,
    sine: Vec<f64>,
    lam: Vec<f64>,
}

impl FreeWeight {
    fn new(grid: &Grid3, h: f64) -> Self {
        let n = grid.n[0];
        let np1 = (n + 1) as f64;
        let norm = (2.0 / np1).sqrt();
        let sine = (0..n * n).map(|idx| norm * (PI * ((idx / n + 1) * (idx % n + 1)) as f64 / np1).sin()).collect();
        let t = h * h / (grid.spacing * grid.spacing);
        let lam = (1..=n).map(|k| t * (2.0 - 2.0 * (PI * k as f64 / np1).cos())).collect();
        FreeWeight { n, sine, lam }
    }

    fn transform(&self, x: &mut [c64]) {
        let n = self.n;
        let mut buf = vec![c64::new(0.0, 0.0); n];
        for axis in 0..3 {
            let stride = [n * n, n, 1][axis];
            for base in 0..n * n * n {
                if (base / stride) % n != 0 {
                    continue;
                }
                for (k, b) in buf.iter_mut().enumerate() {
                    *b = (0..n).map(|j| x[base + j * stride] * self.sine[k * n + j]).sum();
                }
                for k in 0..n {
                    x[base + k * stride] = buf[k];
                }
            }
        }
    }

    fn apply(&self, x: &mut [c64]) {
        let n = self.n;
        self.transform(x);
        for (idx, v) in x.iter_mut().enumerate() {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            *v /= (self.lam[i] + self.lam[j] + self.lam[k] + 1.0).sqrt();
        }
        self.transform(x);
    }
}

struct Weighted<'a> {
    d: &'a Csr,
    m: &'a [f64],
    w: &'a FreeWeight,
    sign: f64,
}

impl HermOp for Weighted<'_> {
    fn dim(&self) -> usize {
        self.d.dim
    }
    fn apply(&self, x: &[c64], y: &mut [c64]) {
        let mut u = x.to_vec();
        self.w.apply(&mut u);
        self.d.apply(&u, y);
        for i in 0..y.len() {
            y[i] = (y[i] - u[i] * self.m[i]) * self.sign;
        }
        self.w.apply(y);
    }
}

struct Diff<'a> {
    d: &'a Csr,
    m: &'a [f64],
}

impl HermOp for Diff<'_> {
    fn dim(&self) -> usize {
        self.d.dim
    }
    fn apply(&self, x: &[c64], y: &mut [c64]) {
        self.d.apply(x, y);
        for i in 0..y.len() {
            y[i] = x[i] * self.m[i] - y[i];
        }
    }
}

/// Localization error D = Σφ_iHφ_i − H of the scalar lattice operator
/// H = (−ih∇_a + A)², compared with h²Σ|∇φ_i|².
pub fn ims_check(field: &VectorField, h: f64, partition: &Partition, c: f64) -> Result<ImsReport> {
    let grid = field.grid;
    if grid.n[0] != grid.n[1] || grid.n[1] != grid.n[2] {
        return Err(Error::Invalid("IMS check needs a cubic grid".into()));
    }
    let op = build_lattice(field, h, LatticeKind::Schrodinger)?;
    let phi: Vec<Vec<f64>> = (0..grid.len()).map(|i| partition.eval(grid.point(i))).collect();
    let partition_defect = phi.iter().map(|p| (p.iter().map(|x| x * x).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    if partition_defect > 1e-12 {
        return Err(Error::Invalid(format!("partition defect {partition_defect:e} above 1e-12")));
    }
    let hm = &op.matrix;
    let mut val = hm.val.clone();
    for row in 0..hm.dim {
        for k in hm.row_ptr[row]..hm.row_ptr[row + 1] {
            let col = hm.col[k];
            let s: f64 = phi[row].iter().zip(&phi[col]).map(|(a, b)| a * b).sum();
            val[k] = hm.val[k] * (s - 1.0);
        }
    }
    let d = Csr { dim: hm.dim, row_ptr: hm.row_ptr.clone(), col: hm.col.clone(), val };
    let m: Vec<f64> = (0..grid.len()).map(|i| h * h * partition.gradient_weight(grid.point(i))).collect();
    let opt = LanczosOptions { block: 2, max_dim: 600, tol: 1e-8, seed: 3 };
    let identity_defect = if m.iter().all(|&x| x == 0.0) && d.val.iter().all(|v| v.norm() == 0.0) {
        0.0
    } else {
        let w = FreeWeight::new(&grid, h);
        let lo = lowest_eigenvalues(&Weighted { d: &d, m: &m, w: &w, sign: 1.0 }, 1, &opt)?[0];
        let hi = -lowest_eigenvalues(&Weighted { d: &d, m: &m, w: &w, sign: -1.0 }, 1, &opt)?[0];
        lo.abs().max(hi.abs())
    };
    // inequality weight: |∇φ_i|² sampled by one-sided difference quotients
    let a = grid.spacing;
    let cm: Vec<f64> = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let mut s = 0.0;
            for dir in 0..3 {
                for step in [-a, a] {
                    let mut y = x;
                    y[dir] += step;
                    let q = partition.eval(y);
                    s += 0.5 * phi[i].iter().zip(&q).map(|(u, v)| (u - v) * (u - v)).sum::<f64>() / (a * a);
                }
            }
            c * h * h * s
        })
        .collect();
    let inequality_min = lowest_eigenvalues(&Diff { d: &d, m: &cm }, 1, &opt)?[0];
    Ok(ImsReport {
        sites: grid.n[0],
        spacing: grid.spacing,
        h,
        partition_defect,
        identity_defect,
        inequality_min,
        c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_partition_exact() {
        let g = Grid3::cube(5, 0.3);
        let r = ims_check(&VectorField::zero(g), 1.0, &Partition::Trivial, 2.0).unwrap();
        assert_eq!(r.identity_defect, 0.0);
        assert!(r.inequality_min.abs() < 1e-12);
    }

    #[test]
    fn step_derivative_matches_difference() {
        for &t in &[0.1, 0.3, 0.5, 0.8] {
            let fd = (smooth_step(t + 1e-6) - smooth_step(t - 1e-6)) / 2e-6;
            assert!((fd - step_deriv(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn free_weight_inverts() {
        // W² (H₀+1) = 1 on a random vector
        let g = Grid3::cube(4, 0.5);
        let w = FreeWeight::new(&g, 0.7);
        let op = build_lattice(&VectorField::zero(g), 0.7, LatticeKind::Schrodinger).unwrap();
        let x: Vec<c64> = (0..64).map(|i| c64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut y = vec![c64::new(0.0, 0.0); 64];
        op.matrix.apply(&x, &mut y);
        for i in 0..64 {
            y[i] += x[i];
        }
        w.apply(&mut y);
        w.apply(&mut y);
        for i in 0..64 {
            assert!((y[i] - x[i]).norm() < 1e-12);
        }
    }
}
