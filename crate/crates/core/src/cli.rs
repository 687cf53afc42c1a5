//! Batch driver: TOML manifest, experiment dispatch and artifact output.

use crate::error::{Error, Result};
use crate::fields::{Grid3, VectorField};
use crate::ineq::{self, CritSpec, LtOptions, Partition};
use crate::phase_space::{cutoff_coulomb_weyl_term, weyl_momentum_constant};
use crate::scott::{self, CutoffProfile, QuadSpec, ScottSettings, SemiclassicalSettings, ThetaProfile};
use crate::spectral::{build_radial_channel, dense, RadialGrid, RadialGridSpec};
use crate::tf::{self, NuclearConfig, TfGridSpec};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Tf,
    Weyl,
    Spectrum,
    Lt,
    Crit,
    Lemmas,
    Scott,
    Asymptotics,
    Cover,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Tf => "tf",
            Command::Weyl => "weyl",
            Command::Spectrum => "spectrum",
            Command::Lt => "lt",
            Command::Crit => "crit",
            Command::Lemmas => "lemmas",
            Command::Scott => "scott",
            Command::Asymptotics => "asymptotics",
            Command::Cover => "cover",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfSection {
    pub grid: TfGridSpec,
    pub tolerance: f64,
    pub collocation_steps: usize,
    pub collocation_x_end: f64,
    pub z_values: Vec<f64>,
}

impl Default for TfSection {
    fn default() -> Self {
        TfSection {
            grid: TfGridSpec::default(),
            tolerance: 1e-10,
            collocation_steps: 4000,
            collocation_x_end: 1.0e4,
            z_values: vec![1.0, 10.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylSection {
    pub kappa: f64,
    pub r_values: Vec<f64>,
    pub profile: CutoffProfile,
}

impl Default for WeylSection {
    fn default() -> Self {
        WeylSection { kappa: 1.0, r_values: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0], profile: CutoffProfile::Smooth }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub z: f64,
    pub h: f64,
    pub beta: f64,
    pub l_values: Vec<usize>,
    pub levels: usize,
    pub grid: RadialGridSpec,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection { z: 1.0, h: 1.0, beta: 0.0, l_values: vec![0, 1, 2], levels: 3, grid: RadialGridSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LtSection {
    pub instances: usize,
    pub sites: usize,
    pub spacing: f64,
    pub lambda: f64,
    pub bound: Option<f64>,
}

impl Default for LtSection {
    fn default() -> Self {
        LtSection { instances: 200, sites: 12, spacing: 0.4, lambda: 2.0, bound: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CritSection {
    pub betas: Vec<f64>,
    pub r: f64,
    pub refine: f64,
    pub small_betas: Vec<f64>,
    pub small_r: f64,
    pub hardy_l: Vec<usize>,
    pub hardy_deltas: Vec<f64>,
}

impl Default for CritSection {
    fn default() -> Self {
        CritSection {
            betas: vec![0.01, 0.5, 0.6],
            r: 5.0,
            refine: 0.5,
            small_betas: vec![0.01, 0.02, 0.04],
            small_r: 1.0,
            hardy_l: vec![0, 1],
            hardy_deltas: vec![0.1, 0.05, 0.025],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmasSection {
    pub instances: usize,
    pub ims_sites: usize,
    pub ims_spacing: f64,
    pub ims_c: f64,
}

impl Default for LemmasSection {
    fn default() -> Self {
        LemmasSection { instances: 10_000, ims_sites: 11, ims_spacing: 0.4, ims_c: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScottSection {
    pub alphas: Vec<f64>,
    pub rs: Vec<f64>,
    pub profile: CutoffProfile,
    pub settings: ScottSettings,
}

impl Default for ScottSection {
    fn default() -> Self {
        ScottSection {
            alphas: vec![0.0, 0.1, 0.3, 0.5],
            rs: vec![16.0, 64.0, 256.0, 1024.0],
            profile: CutoffProfile::Smooth,
            settings: ScottSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsSection {
    pub hs: Vec<f64>,
    pub kappa: f64,
    pub beta: f64,
    pub settings: SemiclassicalSettings,
}

impl Default for AsymptoticsSection {
    fn default() -> Self {
        AsymptoticsSection {
            hs: vec![0.2, 0.15, 0.1, 0.07, 0.05],
            kappa: 0.6,
            beta: 0.0,
            settings: SemiclassicalSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverSection {
    pub r: f64,
    pub big_r: f64,
    pub samples: usize,
    pub points: usize,
    pub quad: QuadSpec,
}

impl Default for CoverSection {
    fn default() -> Self {
        CoverSection { r: 0.1, big_r: 10.0, samples: 2000, points: 100, quad: QuadSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub command: Option<Command>,
    pub seed: u64,
    pub nuclear: NuclearConfig,
    pub tf: TfSection,
    pub weyl: WeylSection,
    pub spectrum: SpectrumSection,
    pub lt: LtSection,
    pub crit: CritSection,
    pub lemmas: LemmasSection,
    pub scott: ScottSection,
    pub asymptotics: AsymptoticsSection,
    pub cover: CoverSection,
}

impl Default for Manifest {
    fn default() -> Self {
        Manifest {
            command: None,
            seed: 42,
            nuclear: NuclearConfig::default(),
            tf: TfSection::default(),
            weyl: WeylSection::default(),
            spectrum: SpectrumSection::default(),
            lt: LtSection::default(),
            crit: CritSection::default(),
            lemmas: LemmasSection::default(),
            scott: ScottSection::default(),
            asymptotics: AsymptoticsSection::default(),
            cover: CoverSection::default(),
        }
    }
}

fn nonempty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Invalid(format!("{what} must not be empty")));
    }
    Ok(())
}

fn beta_le_h(beta: f64, h: f64) -> Result<()> {
    if beta > h {
        return Err(Error::Constraint(format!(
            "beta = {beta} exceeds h = {h}; the scaling-parameter constraint requires beta <= h"
        )));
    }
    Ok(())
}

impl Manifest {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Invalid(format!("manifest: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Grid and physical-constraint checks for the sections the command uses.
    pub fn validate(&self) -> Result<()> {
        let cmd = self.command.ok_or_else(|| Error::Invalid("no command given".into()))?;
        self.nuclear.validate()?;
        match cmd {
            Command::Tf => nonempty(&self.tf.z_values, "tf.z_values")?,
            Command::Weyl => nonempty(&self.weyl.r_values, "weyl.r_values")?,
            Command::Spectrum => {
                let s = &self.spectrum;
                nonempty(&s.l_values, "spectrum.l_values")?;
                if !(s.h > 0.0 && s.z > 0.0 && s.beta >= 0.0) || s.levels == 0 {
                    return Err(Error::Invalid("spectrum needs h > 0, z > 0, beta >= 0, levels >= 1".into()));
                }
                beta_le_h(s.beta, s.h)?;
                if s.z * s.beta / s.h >= 2.0 / PI {
                    return Err(Error::Constraint(format!(
                        "coupling z*beta/h = {} is not below 2/pi",
                        s.z * s.beta / s.h
                    )));
                }
            }
            Command::Lt => {
                if self.lt.instances == 0 || self.lt.sites < 2 || !(self.lt.spacing > 0.0 && self.lt.lambda > 0.0) {
                    return Err(Error::Invalid("lt needs instances >= 1, sites >= 2, positive spacing and lambda".into()));
                }
            }
            Command::Crit => {
                nonempty(&self.crit.betas, "crit.betas")?;
                for &b in self.crit.betas.iter() {
                    if !(b > 0.0 && b < 2.0 / PI) {
                        return Err(Error::Constraint(format!("crit beta = {b} must lie in (0, 2/pi)")));
                    }
                }
                for &b in self.crit.small_betas.iter() {
                    if !(b > 0.0 && b < 0.05) {
                        return Err(Error::Constraint(format!("small-beta entry {b} must lie in (0, 1/20)")));
                    }
                }
                if !(self.crit.refine > 0.0 && self.crit.refine < 1.0) {
                    return Err(Error::Invalid("crit.refine must lie in (0, 1)".into()));
                }
            }
            Command::Lemmas => {
                if self.lemmas.instances == 0 {
                    return Err(Error::Invalid("lemmas.instances must be positive".into()));
                }
            }
            Command::Scott => {
                nonempty(&self.scott.alphas, "scott.alphas")?;
                nonempty(&self.scott.rs, "scott.rs")?;
                for &a in self.scott.alphas.iter() {
                    if !(a >= 0.0 && a < 2.0 / PI) {
                        return Err(Error::Constraint(format!("scott alpha = {a} must lie in [0, 2/pi)")));
                    }
                }
            }
            Command::Asymptotics => {
                let s = &self.asymptotics;
                nonempty(&s.hs, "asymptotics.hs")?;
                let h_min = s.hs.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(h_min > 0.0) {
                    return Err(Error::Invalid("asymptotics.hs must be positive".into()));
                }
                beta_le_h(s.beta, h_min)?;
                if !(s.kappa > 0.0 && s.kappa < 2.0 / PI) {
                    return Err(Error::Constraint(format!("kappa = {} must lie in (0, 2/pi)", s.kappa)));
                }
            }
            Command::Cover => {
                if self.cover.points == 0 || self.cover.samples == 0 {
                    return Err(Error::Invalid("cover needs positive samples and points".into()));
                }
            }
        }
        Ok(())
    }
}

pub struct Outputs {
    dir: PathBuf,
    log: String,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), log: String::new() })
    }

    fn log(&mut self, line: impl AsRef<str>) {
        self.log.push_str(line.as_ref());
        self.log.push('\n');
    }

    fn write(&self, name: &str, content: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), content)?;
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        self.write(name, &s)
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut s = header.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.write(name, &s)
    }

    fn flush_log(&self) -> Result<()> {
        self.write("run.log", &self.log)
    }
}

fn f(x: f64) -> String {
    format!("{x}")
}

/// Runs the manifest's command, writing artifacts into `out`. Returns the
/// process exit code: 0, 2 (validation) or 3 (numerical failure). Errors are
/// also recorded in `error.json`.
pub fn run(manifest: &Manifest, out: &Path) -> i32 {
    let mut o = match Outputs::new(out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    o.log(format!("relscott {}", env!("CARGO_PKG_VERSION")));
    let stamp = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    o.log(format!("started unix {stamp}"));
    o.log(format!("command {}", manifest.command.map_or("none", |c| c.name())));
    o.log(format!("seed {}", manifest.seed));
    o.log("manifest (resolved, defaults included):");
    o.log(manifest.to_toml());
    let res = manifest.validate().and_then(|_| dispatch(manifest, &mut o));
    let code = match res {
        Ok(()) => {
            o.log("status ok");
            0
        }
        Err(e) => {
            let rec = json!({ "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() });
            let _ = o.json("error.json", &rec);
            o.log(format!("status failed: {e}"));
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    if let Err(e) = o.flush_log() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    code
}

fn dispatch(m: &Manifest, o: &mut Outputs) -> Result<()> {
    match m.command.expect("validated") {
        Command::Tf => run_tf(m, o),
        Command::Weyl => run_weyl(m, o),
        Command::Spectrum => run_spectrum(m, o),
        Command::Lt => run_lt(m, o),
        Command::Crit => run_crit(m, o),
        Command::Lemmas => run_lemmas(m, o),
        Command::Scott => run_scott(m, o),
        Command::Asymptotics => run_asymptotics(m, o),
        Command::Cover => run_cover(m, o),
    }
}

/// E^TF(Z) from the virial relation E = −(3/7)∫Zρ_Z/|x|, by quadrature at each Z.
pub fn tf_virial_energy(sol: &tf::TfSolution, z: f64) -> Result<f64> {
    let a = crate::phase_space::radial_integral(|r| z * sol.density_radial(z, r) / r, f64::INFINITY, 1e-13)?;
    Ok(-3.0 / 7.0 * a)
}

fn run_tf(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.tf;
    let sol = tf::solve_tf_atom(&s.grid, s.tolerance)?;
    let colloc = tf::solve_tf_collocation(s.collocation_steps, s.collocation_x_end)?;
    o.write("tf_solution.json", &(sol.to_json() + "\n"))?;
    let mut rows = Vec::new();
    for &z in &s.z_values {
        let e = tf::tf_energy(&sol, z)?;
        let ev = tf_virial_energy(&sol, z)?;
        rows.push(vec![f(z), f(e), f(ev), f(ev * z.powf(-7.0 / 3.0))]);
    }
    o.csv("tf_scaling.csv", &["z", "energy", "virial_energy", "virial_energy_scaled"], &rows)?;
    let profile: Vec<Vec<String>> = sol
        .x
        .iter()
        .zip(&sol.phi)
        .zip(&sol.dphi)
        .step_by(10)
        .map(|((x, p), d)| vec![f(*x), f(*p), f(*d)])
        .collect();
    o.csv("tf_profile.csv", &["x", "phi", "dphi"], &profile)?;
    o.json(
        "tf_summary.json",
        &json!({ "slope": sol.slope, "collocation_slope": colloc, "energy": sol.energy, "residual": sol.residual, "converged": sol.converged }),
    )?;
    o.log(format!("slope {} collocation {} energy {}", sol.slope, colloc, sol.energy));
    Ok(())
}

fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn run_weyl(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.weyl;
    let c = weyl_momentum_constant();
    let closed = 16.0 * 2f64.sqrt() * PI / 15.0;
    let mut vals = Vec::new();
    let mut rows = Vec::new();
    for &r in &s.r_values {
        let v = cutoff_coulomb_weyl_term(r, s.kappa, &|t| s.profile.eval(t))?;
        vals.push(v);
        rows.push(vec![f(r), f(v), f(v / r.sqrt())]);
    }
    o.csv("weyl.csv", &["r", "weyl_term", "weyl_term_over_sqrt_r"], &rows)?;
    let exponent = if s.r_values.len() >= 2 { log_log_slope(&s.r_values, &vals) } else { f64::NAN };
    o.json(
        "weyl_summary.json",
        &json!({ "momentum_constant": c, "closed_form": closed, "difference": c - closed, "exponent": exponent, "profile": s.profile.name(), "kappa": s.kappa }),
    )?;
    o.log(format!("momentum constant {c} (closed form {closed}), R exponent {exponent}"));
    Ok(())
}

/// Lowest `levels` eigenvalues of the channel operator f_β(h²K) − z/r.
pub fn channel_levels(l: usize, s: &SpectrumSection) -> Result<Vec<f64>> {
    let grid = RadialGrid::new(s.grid)?;
    let op = build_radial_channel(l, &grid, |r| -s.z / r, s.h)?;
    let ev = if s.beta == 0.0 {
        let t = op.schrodinger();
        let (_, hi) = t.gershgorin();
        t.eigenvalues_below(hi + 1.0).into_iter().take(s.levels).collect()
    } else {
        dense::eigvals_sym(&op.rel_hamiltonian(s.beta))?.into_iter().take(s.levels).collect()
    };
    Ok(ev)
}

fn run_spectrum(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.spectrum;
    let mut rows = Vec::new();
    for &l in &s.l_values {
        for (k, e) in channel_levels(l, s)?.into_iter().enumerate() {
            let n = (k + l + 1) as f64;
            // nonrelativistic Coulomb levels for ½h²(−Δ) − z/r
            let exact = -s.z * s.z / (2.0 * s.h * s.h * n * n);
            rows.push(vec![l.to_string(), k.to_string(), f(e), f(exact), f(e - exact)]);
        }
    }
    o.csv("spectrum.csv", &["l", "k", "eigenvalue", "nonrel_exact", "difference"], &rows)?;
    o.log(format!("{} levels written", rows.len()));
    Ok(())
}

fn write_jsonl(o: &Outputs, name: &str, reports: &[ineq::InequalityReport]) -> Result<()> {
    o.write(name, &ineq::to_jsonl(reports))
}

fn run_lt(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.lt;
    let opts = LtOptions { bound: s.bound, ..LtOptions::default() };
    let ens = ineq::lt_ensemble(s.instances, m.seed, s.sites, s.spacing, s.lambda, &opts)?;
    write_jsonl(o, "lt.jsonl", &ens.reports)?;
    write_jsonl(o, "lt_scaled.jsonl", &ens.scaled_reports)?;
    o.json("lt_summary.json", &ens)?;
    o.log(format!(
        "max constant {} scaling defect {:e} failures {} hash {}",
        ens.max_constant, ens.max_scaling_defect, ens.failures, ens.hash
    ));
    if ens.failures > 0 {
        return Err(Error::NotConverged(format!("{} instances exceeded the regression bound", ens.failures)));
    }
    Ok(())
}

fn run_crit(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.crit;
    let mut reports = Vec::new();
    let mut rows = Vec::new();
    for &b in &s.betas {
        let spec = CritSpec::new(b, s.r);
        let a = ineq::crit_stability_check(&spec)?;
        let r = ineq::crit_stability_check(&spec.refined(s.refine))?;
        let ratio = if a.empirical_constant > 0.0 { r.empirical_constant / a.empirical_constant } else { f64::NAN };
        rows.push(vec![f(b), f(ineq::eta(b)), f(a.lhs), f(a.empirical_constant), f(r.lhs), f(r.empirical_constant), f(ratio)]);
        reports.push(a);
        reports.push(r);
    }
    o.csv("crit.csv", &["beta", "eta", "lhs", "constant", "lhs_refined", "constant_refined", "ratio"], &rows)?;
    let mut small = Vec::new();
    for &b in &s.small_betas {
        let a = ineq::small_beta_check(&CritSpec::new(b, s.small_r))?;
        small.push(vec![f(b), f(a.lhs), f(a.empirical_constant)]);
        reports.push(a);
    }
    o.csv("crit_small_beta.csv", &["beta", "lhs", "constant"], &small)?;
    write_jsonl(o, "crit.jsonl", &reports)?;
    let mut hk = Vec::new();
    for &l in &s.hardy_l {
        for &d in &s.hardy_deltas {
            let spec = RadialGridSpec { r_min: 1e-4, r_max: 20.0, delta: d, delta_max: d, sqrt_spacing: 0.0 };
            let r = ineq::hardy_kato_check(l, spec, 0.0)?;
            hk.push(vec![l.to_string(), f(d), r.nodes.to_string(), f(r.kato_min), f(r.hardy_min)]);
        }
    }
    o.csv("hardy_kato.csv", &["l", "delta", "nodes", "kato_min", "hardy_min"], &hk)?;
    Ok(())
}

fn run_lemmas(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.lemmas;
    let sum = ineq::lemma_ensemble(s.instances, m.seed)?;
    write_jsonl(o, "lemmas.jsonl", &sum.reports)?;
    o.json("lemmas_summary.json", &sum)?;
    o.log(format!(
        "violations pull-out {} bks {} arithmetic {} hash {}",
        sum.pull_out_violations, sum.bks_violations, sum.arithmetic_violations, sum.hash
    ));
    let half = 0.5 * (s.ims_sites as f64 + 1.0) * s.ims_spacing;
    let partition = Partition::TwoBump { axis: 0, center: 0.0, width: half };
    let mut ims = Vec::new();
    for (n, a) in [(s.ims_sites, s.ims_spacing), (2 * s.ims_sites + 1, 0.5 * s.ims_spacing)] {
        let r = ineq::ims_check(&VectorField::zero(Grid3::cube(n, a)), 1.0, &partition, s.ims_c)?;
        ims.push(r);
    }
    let order = (ims[0].identity_defect / ims[1].identity_defect).log2();
    o.json("ims.json", &json!({ "reports": ims, "order": order }))?;
    let v = sum.pull_out_violations + sum.bks_violations + sum.arithmetic_violations;
    if v > 0 {
        return Err(Error::NotConverged(format!("{v} lemma violations")));
    }
    Ok(())
}

fn run_scott(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.scott;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for &a in &s.alphas {
        match scott::scott_function(a, &s.rs, s.profile, &s.settings) {
            Ok(e) => {
                for t in &e.traces {
                    rows.push(vec![f(a), f(t.r), f(t.trace), f(t.weyl), f(t.value), t.l_max.to_string()]);
                }
                summary.push(json!({
                    "alpha": a, "status": "ok", "two_s2": e.two_s2, "s2": e.s2, "s2_error": e.s2_error,
                    "p": e.extrapolation.p, "power_limit": e.extrapolation.power_limit,
                }));
            }
            Err(err) => {
                summary.push(json!({ "alpha": a, "status": "failed", "error": err.to_string() }));
                failures.push(err);
            }
        }
    }
    o.csv("scott.csv", &["alpha", "r", "trace", "weyl", "value", "l_max"], &rows)?;
    o.json("scott_summary.json", &summary)?;
    match failures.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn run_asymptotics(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.asymptotics;
    let sol = tf::solve_tf_atom(&TfGridSpec::default(), 1e-10)?;
    let c0 = scott::weyl_coefficient(&sol, s.kappa)?;
    let mut vals = Vec::new();
    let mut rows = Vec::new();
    for &h in &s.hs {
        let t = scott::semiclassical_trace(&sol, h, s.beta, s.kappa, &s.settings)?;
        rows.push(vec![f(h), f(s.beta), f(t.value), f(t.value * h.powi(3)), f((t.value - c0 / h.powi(3)) * h * h), t.l_max.to_string()]);
        vals.push(t.value);
    }
    o.csv("asymptotics.csv", &["h", "beta", "trace", "trace_h3", "residual_h2", "l_max"], &rows)?;
    let fit = scott::scott_fit(&s.hs, &vals, Some(c0))?;
    o.json("asymptotics_fit.json", &json!({ "fit": fit, "weyl_coefficient": c0, "kappa": s.kappa }))?;
    Ok(())
}

fn run_cover(m: &Manifest, o: &mut Outputs) -> Result<()> {
    let s = &m.cover;
    let cover = scott::build_multiscale_cover(s.r, s.big_r, &m.nuclear)?;
    let audit = cover.audit(s.samples, m.seed, None)?;
    let theta = ThetaProfile::bump()?;
    let points = cover.sample_region(s.points, m.seed);
    let rep = scott::partition_check(&cover, &theta, &points, &s.quad)?;
    let mut rows = Vec::new();
    for p in &points {
        let a = cover.partition_integral(&theta, *p, &s.quad);
        let b = cover.partition_integral(&theta, *p, &s.quad.doubled());
        rows.push(vec![f(p[0]), f(p[1]), f(p[2]), f(cover.ell(*p)), f(a - 1.0), f(b - 1.0)]);
    }
    o.csv("partition.csv", &["x", "y", "z", "ell", "deviation", "deviation_doubled"], &rows)?;
    o.json("cover.json", &json!({ "audit": audit, "partition": rep }))?;
    let mut line = String::new();
    let _ = write!(line, "max deviation {:e} doubled {:e}", rep.max_deviation, rep.max_deviation_doubled);
    o.log(line);
    Ok(())
}
