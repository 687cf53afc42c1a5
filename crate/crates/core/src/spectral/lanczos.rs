//! Block Lanczos with full reorthogonalization for the bottom of the
//! spectrum, and Chebyshev expansion of matrix functions of a sparse operator.

use super::dense;
use super::pauli::Csr;
use crate::error::{Error, Result};
use faer::{c64, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub trait HermOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[c64], y: &mut [c64]);
}

impl HermOp for Csr {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[c64], y: &mut [c64]) {
        Csr::apply(self, x, y)
    }
}

/// Chebyshev approximation of f(T) on [lo, hi].
pub struct ChebyshevFn<'a, O: HermOp> {
    pub op: &'a O,
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

/// Chebyshev coefficients of f on [lo, hi], degree grown until the tail is below tol·max|c|.
pub fn chebyshev_coeffs(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, max_degree: usize) -> Result<Vec<f64>> {
    let mut n = 32;
    loop {
        let nodes: Vec<f64> = (0..n).map(|j| std::f64::consts::PI * (j as f64 + 0.5) / n as f64).collect();
        let fv: Vec<f64> = nodes.iter().map(|th| f(0.5 * (hi + lo) + 0.5 * (hi - lo) * th.cos())).collect();
        let c: Vec<f64> = (0..n)
            .map(|k| {
                let s: f64 = nodes.iter().zip(&fv).map(|(th, v)| v * (k as f64 * th).cos()).sum();
                s * 2.0 / n as f64
            })
            .collect();
        let cmax = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tail = c[n - 4..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if tail <= tol * cmax {
            let keep = c.iter().rposition(|x| x.abs() > tol * cmax * 1e-2).unwrap_or(0) + 1;
            let mut c = c[..keep].to_vec();
            c[0] *= 0.5;
            return Ok(c);
        }
        if n >= max_degree {
            return Err(Error::NotConverged(format!("chebyshev degree above {max_degree}")));
        }
        n *= 2;
    }
}

impl<'a, O: HermOp> ChebyshevFn<'a, O> {
    pub fn new(op: &'a O, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        let coeffs = chebyshev_coeffs(f, lo, hi, 1e-15, 1 << 14)?;
        Ok(ChebyshevFn { op, lo, hi, coeffs })
    }
}

impl<O: HermOp> HermOp for ChebyshevFn<'_, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[c64], y: &mut [c64]) {
        let n = x.len();
        let (a, b) = (2.0 / (self.hi - self.lo), -(self.hi + self.lo) / (self.hi - self.lo));
        let mut t0 = x.to_vec();
        let mut t1 = vec![c64::new(0.0, 0.0); n];
        let mut tmp = vec![c64::new(0.0, 0.0); n];
        self.op.apply(x, &mut tmp);
        for i in 0..n {
            t1[i] = tmp[i] * a + x[i] * b;
        }
        for i in 0..n {
            y[i] = t0[i] * self.coeffs[0];
            if self.coeffs.len() > 1 {
                y[i] += t1[i] * self.coeffs[1];
            }
        }
        for c in self.coeffs.iter().skip(2) {
            self.op.apply(&t1, &mut tmp);
            for i in 0..n {
                let t2 = (tmp[i] * a + t1[i] * b) * 2.0 - t0[i];
                t0[i] = t1[i];
                t1[i] = t2;
                y[i] += t2 * *c;
            }
        }
    }
}

/// op plus a real diagonal.
pub struct Shifted<'a, O: HermOp> {
    pub op: &'a O,
    pub diag: &'a [f64],
}

impl<O: HermOp> HermOp for Shifted<'_, O> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[c64], y: &mut [c64]) {
        self.op.apply(x, y);
        for i in 0..x.len() {
            y[i] += x[i] * self.diag[i];
        }
    }
}

fn dot(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn nrm(a: &[c64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub block: usize,
    pub max_dim: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { block: 8, max_dim: 800, tol: 1e-9, seed: 7 }
    }
}

/// Converged eigenvalues of `op` below `upper`, ascending.
pub fn eigenvalues_below<O: HermOp>(op: &O, upper: f64, opt: &LanczosOptions) -> Result<Vec<f64>> {
    let n = op.dim();
    if n <= opt.block * 4 || n <= 64 {
        let m = dense_of(op);
        let ev = dense::eigvals_herm(&m)?;
        return Ok(ev.into_iter().filter(|&x| x < upper).collect());
    }
    block_lanczos(op, opt, &|theta: &[f64]| theta.iter().take_while(|&&x| x < upper).count())
}

/// The `k` lowest eigenvalues, ascending.
pub fn lowest_eigenvalues<O: HermOp>(op: &O, k: usize, opt: &LanczosOptions) -> Result<Vec<f64>> {
    let n = op.dim();
    if n <= opt.block * 4 || n <= 64 {
        let ev = dense::eigvals_herm(&dense_of(op))?;
        return Ok(ev.into_iter().take(k).collect());
    }
    block_lanczos(op, opt, &|theta: &[f64]| k.min(theta.len()))
}

/// Block Krylov iteration; `wanted` maps the ascending Ritz values to the
/// number of leading ones that must converge.
fn block_lanczos<O: HermOp>(op: &O, opt: &LanczosOptions, wanted: &dyn Fn(&[f64]) -> usize) -> Result<Vec<f64>> {
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let mut q: Vec<Vec<c64>> = Vec::new();
    let mut hq: Vec<Vec<c64>> = Vec::new();
    let mut block: Vec<Vec<c64>> = (0..opt.block)
        .map(|_| (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect())
        .collect();
    let mut tcols: Vec<Vec<c64>> = Vec::new();
    let mut last_count = usize::MAX;
    let mut stable = 0;
    let mut since_check = 0;
    let max_dim = opt.max_dim.min(n);
    loop {
        // orthonormalize the candidate block against the basis and itself
        for v in block.iter_mut() {
            let mut ok = false;
            for attempt in 0..3 {
                for _ in 0..2 {
                    for u in q.iter() {
                        let c = dot(u, v);
                        for i in 0..n {
                            v[i] -= u[i] * c;
                        }
                    }
                }
                let nv = nrm(v);
                if nv > 1e-10 {
                    for x in v.iter_mut() {
                        *x /= nv;
                    }
                    ok = true;
                    break;
                }
                let _ = attempt;
                *v = (0..n).map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            }
            if ok && q.len() < max_dim {
                let mut w = vec![c64::new(0.0, 0.0); n];
                op.apply(v, &mut w);
                q.push(v.clone());
                let col: Vec<c64> = q.iter().map(|u| dot(u, &w)).collect();
                tcols.push(col);
                hq.push(w);
            }
        }
        let m = q.len();
        since_check += 1;
        if m < max_dim && m < n && since_check < 3 {
            let start = m.saturating_sub(opt.block);
            block = hq[start..].to_vec();
            continue;
        }
        since_check = 0;
        let t = Mat::<c64>::from_fn(m, m, |i, j| if i <= j { tcols[j][i] } else { tcols[i][j].conj() });
        let (theta, y) = dense::eigen_herm(&t)?;
        let wanted: Vec<usize> = (0..wanted(&theta)).collect();
        let scale = theta.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut all_conv = true;
        for &k in &wanted {
            let mut r = vec![c64::new(0.0, 0.0); n];
            for j in 0..m {
                let c = y[(j, k)];
                for i in 0..n {
                    r[i] += (hq[j][i] - q[j][i] * theta[k]) * c;
                }
            }
            if nrm(&r) > opt.tol * scale {
                all_conv = false;
                break;
            }
        }
        if wanted.len() == last_count && all_conv {
            stable += 1;
        } else {
            stable = 0;
        }
        last_count = wanted.len();
        if stable >= 1 || m >= n {
            return Ok(wanted.iter().map(|&k| theta[k]).collect());
        }
        if m >= max_dim {
            return Err(Error::NotConverged(format!("block Lanczos reached dimension {m}")));
        }
        // next block: H applied to the newest vectors
        let start = m.saturating_sub(opt.block);
        block = hq[start..].to_vec();
    }
}

/// Lowest eigenvalue.
pub fn min_eigenvalue<O: HermOp>(op: &O, opt: &LanczosOptions) -> Result<f64> {
    let mut o = opt.clone();
    o.block = o.block.min(2);
    lowest_eigenvalues(op, 1, &o)?.first().copied().ok_or_else(|| Error::NotConverged("empty operator".into()))
}

pub fn dense_of<O: HermOp>(op: &O) -> Mat<c64> {
    let n = op.dim();
    let mut m = Mat::<c64>::zeros(n, n);
    let mut e = vec![c64::new(0.0, 0.0); n];
    let mut y = vec![c64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = c64::new(1.0, 0.0);
        op.apply(&e, &mut y);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
        e[j] = c64::new(0.0, 0.0);
    }
    m
}
