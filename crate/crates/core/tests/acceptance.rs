//! Acceptance criteria. Each test writes one PASS/FAIL line straight to
//! stdout (bypassing the test harness capture) and then asserts.

use relscott::cli::{channel_levels, tf_virial_energy, Command, Manifest, SpectrumSection};
use relscott::ineq::{self, CritSpec, LtOptions, Partition};
use relscott::fields::{Grid3, VectorField};
use relscott::phase_space::{cutoff_coulomb_weyl_term, weyl_momentum_constant};
use relscott::quad;
use relscott::scott::{self, CutoffProfile, QuadSpec, ScottSettings, SemiclassicalSettings, ThetaProfile};
use relscott::tf::{self, NuclearConfig, TfGridSpec};
use relscott::Error;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

/// Ensemble maximum of the lattice Lieb–Thirring constant for seed 42,
/// 200 instances at 12³ sites; frozen as the regression bound.
const LT_FROZEN_BOUND: f64 = 0.03868167078641391;

fn report(n: usize, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {n} [{name}]: {tag} {detail}");
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn criterion_1_tf_solver() {
    let t0 = Instant::now();
    let sol = tf::solve_tf_atom(&TfGridSpec::default(), 1e-10).unwrap();
    let colloc = tf::solve_tf_collocation(4000, 1e4).unwrap();
    let slope_ok = (sol.slope + 1.58807).abs() < 1e-4 && (colloc + 1.58807).abs() < 1e-4 && (sol.slope - colloc).abs() < 1e-4;
    let scaled: Vec<f64> = [1.0, 10.0, 100.0]
        .iter()
        .map(|&z| tf_virial_energy(&sol, z).unwrap() * f64::powf(z, -7.0 / 3.0))
        .collect();
    let spread = scaled.iter().cloned().fold(f64::MIN, f64::max) - scaled.iter().cloned().fold(f64::MAX, f64::min);
    let secs = t0.elapsed().as_secs_f64();
    let pass = slope_ok && spread < 1e-10 && secs < 10.0;
    report(
        1,
        "TF solver",
        pass,
        format!("shooting {:.8} collocation {:.8} E/Z^(7/3) spread {spread:.1e} ({:.6}) time {secs:.1}s", sol.slope, colloc, scaled[0]),
    );
    assert!(pass);
}

#[test]
fn criterion_2_hydrogen() {
    let t0 = Instant::now();
    let ev = channel_levels(0, &SpectrumSection::default()).unwrap();
    let err = ev
        .iter()
        .enumerate()
        .map(|(k, e)| (e + 0.5 / ((k + 1) as f64).powi(2)).abs())
        .fold(0.0, f64::max);
    let secs = t0.elapsed().as_secs_f64();
    let pass = ev.len() == 3 && err < 1e-3 && secs < 30.0;
    report(2, "hydrogen", pass, format!("levels {ev:.6?} max error {err:.2e} time {secs:.2}s"));
    assert!(pass);
}

#[test]
fn criterion_3_weyl_constant() {
    let closed = 16.0 * 2f64.sqrt() * PI / 15.0;
    // 4π∫₀^√2 (1 − p²/2) p² dp
    let (q, _) = quad::integrate(|p| 4.0 * PI * p * p * (1.0 - 0.5 * p * p), 0.0, 2f64.sqrt(), 0.0, 1e-14).unwrap();
    let c = weyl_momentum_constant();
    let rs = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let smooth = CutoffProfile::Smooth;
    let vals: Vec<f64> = rs.iter().map(|&r| cutoff_coulomb_weyl_term(r, 1.0, &|t| smooth.eval(t)).unwrap()).collect();
    let lx: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = vals.iter().map(|v| v.abs().ln()).collect();
    let p = slope(&lx, &ly);
    let pass = (q - closed).abs() < 1e-10 && (c - closed).abs() < 1e-10 && (p - 0.5).abs() < 0.02;
    report(3, "Weyl constant", pass, format!("quadrature {q:.12} closed form {closed:.12} exponent {p:.4}"));
    assert!(pass);
}

#[test]
fn criterion_4_scott_function() {
    let t0 = Instant::now();
    let rs = [16.0, 64.0, 256.0, 1024.0];
    let settings = ScottSettings::default();
    let mut est = Vec::new();
    for &a in &[0.0, 0.1, 0.3, 0.5] {
        let e = scott::scott_function(a, &rs, CutoffProfile::Smooth, &settings).unwrap();
        est.push((a, e.s2, e.s2_error));
    }
    let monotone = est.windows(2).all(|w| w[1].1 <= w[0].1);
    let secs = t0.elapsed().as_secs_f64();
    let s0 = est[0].1;
    let pass = (s0 - 0.25).abs() <= 0.05 && monotone && secs < 1200.0;
    let list: Vec<String> = est.iter().map(|(a, s, e)| format!("S2({a})={s:.4}±{e:.4}")).collect();
    report(4, "Scott function", pass, format!("{} nonincreasing {monotone} time {secs:.0}s", list.join(" ")));
    assert!(pass);
}

#[test]
fn criterion_5_two_term_asymptotics() {
    let t0 = Instant::now();
    let kappa = 0.6;
    let hs = [0.2, 0.15, 0.1, 0.07, 0.05];
    let sol = tf::solve_tf_atom(&TfGridSpec::default(), 1e-10).unwrap();
    let c0_ref = scott::weyl_coefficient(&sol, kappa).unwrap();
    let settings = SemiclassicalSettings::default();
    let vals: Vec<f64> = hs.iter().map(|&h| scott::semiclassical_trace(&sol, h, 0.0, kappa, &settings).unwrap().value).collect();
    let fit = scott::scott_fit(&hs, &vals, Some(c0_ref)).unwrap();
    let s = scott::scott_function(0.0, &[16.0, 64.0, 256.0, 1024.0], CutoffProfile::Smooth, &ScottSettings::default()).unwrap();
    // Scott term of tr[½h²(−Δ) − κ̃V^TF]_−: κ̃²·2S₂(0)·h⁻²
    let predicted = kappa * kappa * 2.0 * s.s2;
    let predicted_err = kappa * kappa * 2.0 * s.s2_error;
    let c0_rel = (fit.c0 - c0_ref).abs() / c0_ref.abs();
    let gap = (fit.c2 - predicted).abs();
    let secs = t0.elapsed().as_secs_f64();
    let pass = c0_rel < 0.02 && (fit.residual_slope + 2.0).abs() <= 0.15 && gap <= fit.c2_error + predicted_err && secs < 1800.0;
    report(
        5,
        "two-term asymptotics",
        pass,
        format!(
            "c0 {:.6} vs {c0_ref:.6} ({:.2}%) slope {:.3} c2 {:.4}±{:.4} vs {predicted:.4}±{predicted_err:.4} time {secs:.1}s",
            fit.c0,
            100.0 * c0_rel,
            fit.residual_slope,
            fit.c2,
            fit.c2_error
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_inequality_suites() {
    let sum = ineq::lemma_ensemble(10_000, 42).unwrap();
    let v = sum.pull_out_violations + sum.bks_violations + sum.arithmetic_violations;
    let partition = Partition::TwoBump { axis: 0, center: 0.0, width: 2.4 };
    let coarse = ineq::ims_check(&VectorField::zero(Grid3::cube(11, 0.4)), 1.0, &partition, 2.0).unwrap();
    let fine = ineq::ims_check(&VectorField::zero(Grid3::cube(23, 0.2)), 1.0, &partition, 2.0).unwrap();
    let order = (coarse.identity_defect / fine.identity_defect).log2();
    let pass = v == 0 && sum.instances == 10_000 && (order - 2.0).abs() <= 0.3;
    report(
        6,
        "inequality suites",
        pass,
        format!(
            "violations pull-out {} BKS {} arithmetic {} over {} instances; IMS defect {:.3e} -> {:.3e} order {order:.2}",
            sum.pull_out_violations, sum.bks_violations, sum.arithmetic_violations, sum.instances, coarse.identity_defect, fine.identity_defect
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_magnetic_lieb_thirring() {
    let t0 = Instant::now();
    let ens = ineq::lt_ensemble(200, 42, 12, 0.4, 2.0, &LtOptions::default()).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let within_bound = ens.max_constant <= LT_FROZEN_BOUND * (1.0 + 1e-9);
    let pass = ens.max_constant.is_finite() && ens.max_scaling_defect <= 1e-6 && within_bound && secs < 3600.0;
    report(
        7,
        "magnetic Lieb-Thirring",
        pass,
        format!(
            "max constant {:.6} (frozen {LT_FROZEN_BOUND:.6}) scaling defect {:.1e} resolution warnings {} time {secs:.0}s",
            ens.max_constant, ens.max_scaling_defect, ens.resolution_warnings
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_coulomb_stability() {
    let mut lines = Vec::new();
    let mut ok = true;
    for &b in &[0.01, 0.5, 0.6] {
        let spec = CritSpec::new(b, 5.0);
        let a = ineq::crit_stability_check(&spec).unwrap();
        let r = ineq::crit_stability_check(&spec.refined(0.5)).unwrap();
        let ratio = r.empirical_constant / a.empirical_constant;
        ok &= a.pass && r.pass && a.empirical_constant.is_finite() && (ratio - 1.0).abs() <= 0.2;
        lines.push(format!("beta {b}: C {:.3e} refined ratio {ratio:.4}", a.empirical_constant));
    }
    let direct = matches!(ineq::crit_stability_check(&CritSpec::new(2.0 / PI, 5.0)), Err(Error::Constraint(_)));
    let mut m = Manifest { command: Some(Command::Crit), ..Manifest::default() };
    m.crit.betas = vec![0.7];
    let manifest = matches!(m.validate(), Err(Error::Constraint(_)));
    ok &= direct && manifest;
    report(8, "Coulomb stability", ok, format!("{}; 2/pi rejected {}", lines.join("; "), direct && manifest));
    assert!(ok);
}

#[test]
fn criterion_9_partition_normalization() {
    let cover = scott::build_multiscale_cover(0.1, 10.0, &NuclearConfig::default()).unwrap();
    let theta = ThetaProfile::bump().unwrap();
    let points = cover.sample_region(100, 9);
    let rep = scott::partition_check(&cover, &theta, &points, &QuadSpec::default()).unwrap();
    let pass = rep.points == 100 && rep.max_deviation < 1e-6 && rep.improvement >= 4.0;
    report(
        9,
        "partition normalization",
        pass,
        format!("max deviation {:.2e} doubled {:.2e} improvement {:.1e}", rep.max_deviation, rep.max_deviation_doubled, rep.improvement),
    );
    assert!(pass);
}
