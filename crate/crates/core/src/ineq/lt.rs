use super::{report_hash, to_jsonl, InequalityReport};
use crate::error::{Error, Result};
use crate::fields::{make_divfree_field, FieldFamily, Grid3, VectorField};
use crate::spectral::lanczos::{eigenvalues_below, min_eigenvalue, ChebyshevFn, LanczosOptions, Shifted};
use crate::spectral::pauli::{build_lattice, LatticeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone)]
pub struct LtOptions {
    pub lanczos: LanczosOptions,
    /// Frozen ensemble bound on the empirical constant; `None` only checks finiteness.
    pub bound: Option<f64>,
}

impl Default for LtOptions {
    fn default() -> Self {
        LtOptions { lanczos: LanczosOptions { block: 4, max_dim: 1200, tol: 1e-9, seed: 11 }, bound: None }
    }
}

/// β⁻²(√(1+β²t) − 1), written without cancellation and valid for t > −β⁻².
fn rel_continued(t: f64, beta: f64) -> f64 {
    t / ((1.0 + beta * beta * t).sqrt() + 1.0)
}

/// Negative-eigenvalue sum of f_β(T) − V for the lattice operator T built
/// from `field`, against h⁻³∫V₊^{5/2}, h⁻³β³∫V₊⁴ and (h⁻²∫B²)^{3/4}(∫V₊⁴)^{1/4}.
/// The lattice T may dip slightly below zero; f_β is continued analytically
/// there, which requires min T > −β⁻².
pub fn lt_check(
    field: &VectorField,
    v: &[f64],
    beta: f64,
    h: f64,
    kind: LatticeKind,
    opts: &LtOptions,
) -> Result<InequalityReport> {
    if !(beta > 0.0) {
        return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
    }
    if v.len() != field.grid.len() {
        return Err(Error::Invalid("potential samples do not match the grid".into()));
    }
    let op = build_lattice(field, h, kind)?;
    let vol = field.grid.cell_volume();
    let vp = |p: f64| v.iter().map(|&x| x.max(0.0).powf(p)).sum::<f64>() * vol;
    let (v52, v4) = (vp(2.5), vp(4.0));
    let b2 = field.curl_energy();
    let rhs_terms = vec![v52 / h.powi(3), beta.powi(3) * v4 / h.powi(3), (b2 / (h * h)).powf(0.75) * v4.powf(0.25)];
    let resolution_warning = op.magnetic_length() < op.spacing;
    let mut params = json!({
        "beta": beta,
        "h": h,
        "kind": format!("{kind:?}"),
        "sites": field.grid.n,
        "spacing": field.grid.spacing,
        "field_energy": b2,
        "resolution_warning": resolution_warning,
    });
    let lhs = if v.iter().all(|&x| x <= 0.0) {
        0.0
    } else {
        let t_min = min_eigenvalue(&op.matrix, &opts.lanczos)?;
        let (_, g_hi) = op.matrix.gershgorin();
        let span = g_hi - t_min;
        let lo = t_min - 1e-6 * span;
        let hi = g_hi + 1e-6 * span;
        if beta * beta * lo <= -0.5 {
            return Err(Error::Constraint(format!(
                "lattice kinetic minimum {t_min:.4e} too negative for beta = {beta}"
            )));
        }
        params["t_min"] = json!(t_min);
        let f = ChebyshevFn::new(&op.matrix, |t| rel_continued(t, beta), lo, hi)?;
        params["chebyshev_degree"] = json!(f.coeffs.len());
        let shift: Vec<f64> = op.expand_potential(v).iter().map(|x| -x).collect();
        let full = Shifted { op: &f, diag: &shift };
        let ev = eigenvalues_below(&full, 0.0, &opts.lanczos)?;
        params["negative_eigenvalues"] = json!(ev.len());
        ev.iter().sum()
    };
    let total: f64 = rhs_terms.iter().sum();
    let empirical_constant = if lhs == 0.0 { 0.0 } else { -lhs / total };
    let pass = empirical_constant.is_finite() && opts.bound.is_none_or(|b| empirical_constant <= b);
    Ok(InequalityReport {
        id: match kind {
            LatticeKind::Pauli => "lt_pauli".into(),
            LatticeKind::Schrodinger => "lt_schrodinger".into(),
        },
        seed: opts.lanczos.seed,
        params,
        lhs,
        rhs_terms,
        empirical_constant,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub center: [f64; 3],
    pub depth: f64,
    pub width: f64,
}

impl Well {
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let r2: f64 = (0..3).map(|d| (x[d] - self.center[d]).powi(2)).sum();
        self.depth * (-r2 / (2.0 * self.width * self.width)).exp()
    }
}

/// One lattice instance: field family, a sum of Gaussian wells, β and h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtInstance {
    pub sites: usize,
    pub spacing: f64,
    pub h: f64,
    pub beta: f64,
    pub family: FieldFamily,
    pub wells: Vec<Well>,
}

impl LtInstance {
    pub fn grid(&self) -> Grid3 {
        Grid3::cube(self.sites, self.spacing)
    }

    pub fn field(&self) -> Result<VectorField> {
        make_divfree_field(&self.family, self.grid())
    }

    pub fn potential(&self) -> Vec<f64> {
        let g = self.grid();
        (0..g.len()).map(|i| self.wells.iter().map(|w| w.eval(g.point(i))).sum()).collect()
    }

    /// Length scaling x → λx at fixed h: spacing and β times λ,
    /// A → λ⁻¹A(·/λ), V → λ⁻²V(·/λ). Every term of the inequality picks up λ⁻².
    pub fn rescaled(&self, lambda: f64) -> Self {
        LtInstance {
            sites: self.sites,
            spacing: self.spacing * lambda,
            h: self.h,
            beta: self.beta * lambda,
            family: self.family.rescaled(lambda, 1.0),
            wells: self
                .wells
                .iter()
                .map(|w| Well { center: w.center.map(|c| c * lambda), depth: w.depth / (lambda * lambda), width: w.width * lambda })
                .collect(),
        }
    }

    pub fn run(&self, kind: LatticeKind, opts: &LtOptions) -> Result<InequalityReport> {
        let mut r = lt_check(&self.field()?, &self.potential(), self.beta, self.h, kind, opts)?;
        r.params["family"] = serde_json::to_value(&self.family).unwrap_or_default();
        r.params["wells"] = serde_json::to_value(&self.wells).unwrap_or_default();
        Ok(r)
    }

    /// Random instance on an n³ grid of spacing `spacing`, with h = 1.
    pub fn random(rng: &mut impl Rng, sites: usize, spacing: f64) -> Self {
        let half = 0.5 * (sites as f64 - 1.0) * spacing;
        let mut unit = || {
            let v = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-3);
            v.map(|x| x / n)
        };
        let dir = unit();
        let dir2 = unit();
        // keep support + one spacing inside the box
        let room = half - spacing;
        let radius = room * (0.5 + 0.3 * rng.random::<f64>());
        let off = (room - radius) * 0.5;
        let center = [0, 1, 2].map(|_| off * (2.0 * rng.random::<f64>() - 1.0));
        let family = match rng.random_range(0..3) {
            0 => FieldFamily::Zero,
            1 => FieldFamily::PolynomialBump {
                center,
                radius,
                amplitude: 2.0 * rng.random::<f64>() * radius * radius,
                direction: dir,
                power: 3,
            },
            _ => FieldFamily::TruncatedUniform {
                center,
                b0: dir2.map(|x| x * 2.0 * rng.random::<f64>()),
                radius: 0.6 * radius,
                transition: 0.4 * radius,
            },
        };
        let n_wells = rng.random_range(1..=2);
        let wells = (0..n_wells)
            .map(|_| Well {
                center: [0, 1, 2].map(|_| 0.3 * half * (2.0 * rng.random::<f64>() - 1.0)),
                depth: 0.5 + 4.5 * rng.random::<f64>(),
                width: 0.4 + 0.6 * rng.random::<f64>(),
            })
            .collect();
        let h = 1.0;
        LtInstance { sites, spacing, h, beta: h * (0.05 + 0.95 * rng.random::<f64>()), family, wells }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LtEnsemble {
    pub seed: u64,
    pub instances: usize,
    pub lambda: f64,
    pub max_constant: f64,
    /// max |c(λ-rescaled) − c| / c over the ensemble.
    pub max_scaling_defect: f64,
    pub resolution_warnings: usize,
    pub failures: usize,
    pub hash: String,
    #[serde(skip)]
    pub reports: Vec<InequalityReport>,
    #[serde(skip)]
    pub scaled_reports: Vec<InequalityReport>,
}

/// `count` random Pauli instances, each also run after the length scaling by
/// `lambda`.
pub fn lt_ensemble(count: usize, seed: u64, sites: usize, spacing: f64, lambda: f64, opts: &LtOptions) -> Result<LtEnsemble> {
    let pairs: Vec<Result<(InequalityReport, InequalityReport)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let inst = LtInstance::random(&mut rng, sites, spacing);
            let mut a = inst.run(LatticeKind::Pauli, opts)?;
            let mut b = inst.rescaled(lambda).run(LatticeKind::Pauli, opts)?;
            for r in [&mut a, &mut b] {
                r.seed = seed;
                r.params["instance"] = json!(i);
            }
            b.params["lambda"] = json!(lambda);
            Ok((a, b))
        })
        .collect();
    let mut reports = Vec::with_capacity(count);
    let mut scaled_reports = Vec::with_capacity(count);
    for p in pairs {
        let (a, b) = p?;
        reports.push(a);
        scaled_reports.push(b);
    }
    let max_constant = reports.iter().map(|r| r.empirical_constant).fold(0.0, f64::max);
    let max_scaling_defect = reports
        .iter()
        .zip(&scaled_reports)
        .map(|(a, b)| {
            let d = (a.empirical_constant - b.empirical_constant).abs();
            if a.empirical_constant > 0.0 { d / a.empirical_constant } else { d }
        })
        .fold(0.0, f64::max);
    let resolution_warnings = reports.iter().filter(|r| r.params["resolution_warning"] == json!(true)).count();
    let failures = reports.iter().chain(&scaled_reports).filter(|r| !r.pass).count();
    let hash = report_hash(to_jsonl(&reports).as_bytes());
    Ok(LtEnsemble {
        seed,
        instances: count,
        lambda,
        max_constant,
        max_scaling_defect,
        resolution_warnings,
        failures,
        hash,
        reports,
        scaled_reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continued_function_matches() {
        for &t in &[-0.5, 0.0, 1e-12, 3.0, 1e6] {
            let b: f64 = 0.7;
            if 1.0 + b * b * t > 0.0 {
                let direct = ((1.0 + b * b * t).sqrt() - 1.0) / (b * b);
                assert!((rel_continued(t, b) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn nonpositive_potential_is_trivial() {
        let g = Grid3::cube(6, 0.5);
        let f = VectorField::zero(g);
        let v = vec![-1.0; g.len()];
        let r = lt_check(&f, &v, 0.5, 1.0, LatticeKind::Pauli, &LtOptions::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.empirical_constant, 0.0);
        assert!(r.pass);
    }
}
