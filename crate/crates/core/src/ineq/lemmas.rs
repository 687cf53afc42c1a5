use super::{report_hash, to_jsonl, InequalityReport};
use crate::error::{Error, Result};
use crate::spectral::dense;
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// c₀ = (√11 − 1)/10.
pub const C0: f64 = 0.231_662_479_035_539_98;

fn c0() -> f64 {
    (11f64.sqrt() - 1.0) / 10.0
}

/// √(T + m²) − m against c₀T/m (T < 10m²) or (2/3)√T (T ≥ 10m²).
pub fn scalar_kinetic_bounds(t: f64, m: f64) -> Result<InequalityReport> {
    if !(t >= 0.0 && m >= 0.0) {
        return Err(Error::Invalid(format!("need T >= 0 and m >= 0, got T = {t}, m = {m}")));
    }
    let lhs = if t == 0.0 { 0.0 } else { t / ((t + m * m).sqrt() + m) };
    let (branch, rhs) = if t < 10.0 * m * m { ("c0", c0() * t / m) } else { ("sqrt", 2.0 / 3.0 * t.sqrt()) };
    let ratio = if rhs == 0.0 { 0.0 } else { rhs / lhs };
    Ok(InequalityReport {
        id: "arithmetic".into(),
        seed: 0,
        params: json!({ "T": t, "m": m, "branch": branch }),
        lhs,
        rhs_terms: vec![rhs],
        empirical_constant: ratio,
        pass: lhs >= rhs - 1e-10 * rhs.max(1.0),
    })
}

fn eig_neg_sum(m: &Mat<f64>) -> Result<f64> {
    dense::negative_part_trace(m)
}

/// tr(P − Q)_− ≥ −tr[−(P² − Q²)_−]^{1/2}.
pub fn bks_check(p: &Mat<f64>, q: &Mat<f64>) -> Result<InequalityReport> {
    if p.nrows() != q.nrows() || p.nrows() != p.ncols() || q.nrows() != q.ncols() {
        return Err(Error::Invalid("P and Q must be square of equal size".into()));
    }
    let lhs = eig_neg_sum(&(p - q))?;
    let d = dense::symmetrize(&(p * p - q * q));
    let ev = dense::eigvals_sym(&d)?;
    let rhs: f64 = ev.iter().filter(|&&x| x < 0.0).map(|x| (-x).sqrt()).sum();
    let scale = p.norm_max().max(q.norm_max()).max(1.0);
    Ok(InequalityReport {
        id: "bks".into(),
        seed: 0,
        params: json!({ "dim": p.nrows() }),
        lhs,
        rhs_terms: vec![rhs],
        empirical_constant: if rhs > 0.0 { -lhs / rhs } else { 0.0 },
        pass: lhs >= -rhs - 1e-10 * scale,
    })
}

/// √(Σ g_i A_i g_i) ≥ Σ g_i √A_i g_i for diagonal g_i with Σ g_i² = 1.
pub fn pull_out_check(g: &[Vec<f64>], a: &[Mat<f64>]) -> Result<InequalityReport> {
    if g.is_empty() || g.len() != a.len() {
        return Err(Error::Invalid("need one PSD matrix per partition element".into()));
    }
    let n = g[0].len();
    if g.iter().any(|v| v.len() != n) || a.iter().any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(Error::Invalid("dimension mismatch".into()));
    }
    let defect = (0..n).map(|x| (g.iter().map(|v| v[x] * v[x]).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
    if defect > 1e-12 {
        return Err(Error::Invalid(format!("partition defect {defect:e} above 1e-12")));
    }
    let mut sum = Mat::<f64>::zeros(n, n);
    let mut pulled = Mat::<f64>::zeros(n, n);
    for (gi, ai) in g.iter().zip(a) {
        let s = crate::spectral::matfun::sqrt_psd(ai)?;
        for i in 0..n {
            for j in 0..n {
                sum[(i, j)] += gi[i] * ai[(i, j)] * gi[j];
                pulled[(i, j)] += gi[i] * s[(i, j)] * gi[j];
            }
        }
    }
    let root = crate::spectral::matfun::sqrt_psd(&dense::symmetrize(&sum))?;
    let diff = dense::symmetrize(&(&root - &pulled));
    let min = dense::min_eig_sym(&diff)?;
    let scale = root.norm_max().max(1.0);
    Ok(InequalityReport {
        id: "pull_out".into(),
        seed: 0,
        params: json!({ "dim": n, "blocks": g.len(), "partition_defect": defect }),
        lhs: min,
        rhs_terms: vec![0.0],
        empirical_constant: (-min).max(0.0) / scale,
        pass: min >= -1e-10 * scale,
    })
}

/// G·Gᵀ with standard Gaussian G (dim × dim).
pub fn random_psd(rng: &mut impl Rng, dim: usize) -> Mat<f64> {
    let g = Mat::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    dense::symmetrize(&(&g * g.transpose()))
}

/// k diagonal functions g_i ≥ 0 with Σ g_i² = 1, from random positive weights.
pub fn random_partition(rng: &mut impl Rng, k: usize, dim: usize) -> Vec<Vec<f64>> {
    let w: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| rng.random::<f64>() + 1e-3).collect()).collect();
    let mut g = w.clone();
    for x in 0..dim {
        let s = w.iter().map(|v| v[x] * v[x]).sum::<f64>().sqrt();
        for v in g.iter_mut() {
            v[x] /= s;
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub instances: usize,
    pub seed: u64,
    pub pull_out_violations: usize,
    pub bks_violations: usize,
    pub arithmetic_violations: usize,
    pub worst_pull_out: f64,
    pub worst_bks_ratio: f64,
    pub worst_arithmetic_ratio: f64,
    pub hash: String,
    #[serde(skip)]
    pub reports: Vec<InequalityReport>,
}

fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `n` instances each of pull-out, BKS and the arithmetic bounds. Every
/// instance has its own ChaCha stream, so the result does not depend on
/// scheduling.
pub fn lemma_ensemble(n: usize, seed: u64) -> Result<LemmaSummary> {
    let per: Vec<Result<[InequalityReport; 3]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, i as u64);
            let dim = rng.random_range(1..=12);
            let k = rng.random_range(2..=4);
            let g = random_partition(&mut rng, k, dim);
            let a: Vec<Mat<f64>> = (0..k).map(|_| random_psd(&mut rng, dim)).collect();
            let mut po = pull_out_check(&g, &a)?;
            po.seed = seed;
            po.params["instance"] = json!(i);
            let dim = rng.random_range(1..=16);
            let p = random_psd(&mut rng, dim);
            let q = random_psd(&mut rng, dim);
            let mut bk = bks_check(&p, &q)?;
            bk.seed = seed;
            bk.params["instance"] = json!(i);
            let t = 100.0 * (1.0 - rng.random::<f64>());
            let m = 10.0 * (1.0 - rng.random::<f64>());
            let mut ar = scalar_kinetic_bounds(t, m)?;
            ar.seed = seed;
            ar.params["instance"] = json!(i);
            Ok([po, bk, ar])
        })
        .collect();
    let mut reports = Vec::with_capacity(3 * n);
    for r in per {
        reports.extend(r?);
    }
    let count = |id: &str| reports.iter().filter(|r| r.id == id && !r.pass).count();
    let worst = |id: &str| reports.iter().filter(|r| r.id == id).map(|r| r.empirical_constant).fold(0.0, f64::max);
    let hash = report_hash(to_jsonl(&reports).as_bytes());
    Ok(LemmaSummary {
        instances: n,
        seed,
        pull_out_violations: count("pull_out"),
        bks_violations: count("bks"),
        arithmetic_violations: count("arithmetic"),
        worst_pull_out: worst("pull_out"),
        worst_bks_ratio: worst("bks"),
        worst_arithmetic_ratio: worst("arithmetic"),
        hash,
        reports,
    })
}
