use proptest::prelude::*;
use relscott::phase_space::{radial_integral, weyl_momentum_constant};
use relscott::tf::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn sol() -> &'static TfSolution {
    static S: OnceLock<TfSolution> = OnceLock::new();
    S.get_or_init(|| solve_tf_atom(&TfGridSpec::default(), 1e-10).unwrap())
}

#[test]
fn slope_and_collocation() {
    let s = sol();
    let c = solve_tf_collocation(4000, 1.0e4).unwrap();
    eprintln!("shooting {:.8} collocation {:.8} energy {:.8}", s.slope, c, s.energy);
    assert!((s.slope + 1.58807).abs() < 1e-4);
    assert!((s.slope - c).abs() < 1e-4);
    assert!(s.converged);
    assert_eq!(s.phi[0], 1.0);
}

#[test]
fn functional_energy_oracle() {
    let s = sol();
    let ck = kinetic_constant();
    let rho = |r: f64| s.density_radial(1.0, r);
    let kin = radial_integral(|r| ck * rho(r).powf(5.0 / 3.0), f64::INFINITY, 1e-10).unwrap();
    let att = radial_integral(|r| rho(r) / r, f64::INFINITY, 1e-10).unwrap();
    let d = tf_coulomb_energy(s).unwrap();
    let e = kin - att + d;
    eprintln!("functional {e:.8} closed {:.8}", s.energy);
    assert!((e - s.energy).abs() < 1e-3);
    assert!((s.energy + 0.7687).abs() < 1e-3);
    // Weyl(V) − D(ρ) = E
    let w = -2.0 / (2.0 * PI).powi(3) * weyl_momentum_constant()
        * radial_integral(|r| s.v1(r).powf(2.5), f64::INFINITY, 1e-10).unwrap();
    eprintln!("weyl - D - E = {:e}", w - d - s.energy);
    assert!((w - d - s.energy).abs() < 1e-4);
}

#[test]
fn phi_positive_decreasing_convex() {
    let s = sol();
    let xs: Vec<f64> = (0..=400).map(|k| 1e-4 * 10f64.powf(k as f64 / 50.0)).collect();
    let vals: Vec<(f64, f64)> = xs.iter().map(|&x| s.phi_at(x)).collect();
    for w in vals.windows(2) {
        assert!(w[1].0 > 0.0 && w[1].0 < w[0].0);
        // convex: φ' increasing
        assert!(w[1].1 >= w[0].1 - 1e-9);
    }
}

#[test]
fn poisson_equation_holds() {
    // (rV)'' = 4π r ρ away from the nucleus
    let s = sol();
    for &r in &[0.05, 0.3, 1.0, 4.0, 20.0] {
        let h = 1e-3 * r;
        let f = |t: f64| t * s.v1(t);
        let lhs = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let rhs = 4.0 * PI * r * s.density_radial(1.0, r);
        assert!((lhs - rhs).abs() < 1e-4 * rhs, "r = {r}: {lhs} vs {rhs}");
    }
}

#[test]
fn coulomb_singularity_subtracts_cleanly() {
    let s = sol();
    let want = s.slope / screening_length();
    for &r in &[1e-4, 1e-5, 1e-6] {
        let d = s.v1(r) - 1.0 / r;
        assert!((d - want).abs() < 1e-2 * want.abs(), "r = {r}: {d} vs {want}");
    }
}

#[test]
fn large_x_follows_sommerfeld() {
    let s = sol();
    let mut last = f64::INFINITY;
    for &x in &[10.0, 100.0, 1000.0, 10000.0] {
        let (p, _) = s.phi_at(x);
        let (q, _) = sommerfeld(x);
        let d = (p / q - 1.0).abs();
        eprintln!("x = {x}: relative gap {d:e}");
        assert!(d < last, "x = {x}: {p} vs {q}");
        last = d;
    }
    assert!(last < 1e-2);
}

#[test]
fn uniform_ball_coulomb_energy() {
    // (3/5)Q²/R for a uniform ball
    let r = tf_radial_nodes(1.0, 20_000);
    let rho = vec![3.0 / (4.0 * PI); r.len()];
    let d = coulomb_energy(&r, &rho).unwrap();
    assert!((d - 0.6).abs() < 1e-6, "{d}");
    assert!(coulomb_energy(&r, &vec![-1.0; r.len()]).is_err());
}

#[test]
fn json_round_trip() {
    let s = sol();
    let t = TfSolution::from_json(&s.to_json()).unwrap();
    assert_eq!((t.grid, t.n_t, t.converged), (s.grid.clone(), s.n_t, s.converged));
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-15 * x.abs().max(1e-300));
    assert!(close(&t.x, &s.x) && close(&t.phi, &s.phi) && close(&t.dphi, &s.dphi));
    assert!((t.slope - s.slope).abs() <= 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn neutral_atom_charge(z in 0.5f64..100.0) {
        let s = sol();
        let q = radial_integral(|r| s.density_radial(z, r), f64::INFINITY, 1e-10).unwrap();
        prop_assert!((q - z).abs() < 1e-4 * z, "{} vs {}", q, z);
    }

    #[test]
    fn potential_scaling(z in 0.5f64..100.0, r in 1e-3f64..50.0) {
        // V_Z(r)·r = Z·φ(Z^{1/3} r / b) with b the Z = 1 screening length
        let s = sol();
        let v = tf_potential(s, z, [0.0, r, 0.0]).unwrap();
        let (p, _) = s.phi_at(z.cbrt() * r / screening_length());
        prop_assert!((v * r - z * p).abs() <= 1e-12 * z);
    }

    #[test]
    fn coulomb_energy_positive_definite(a in prop::collection::vec(0.0f64..1.0, 8), b in prop::collection::vec(0.0f64..1.0, 8)) {
        let r = tf_radial_nodes(4.0, 4000);
        let bump = |c: &[f64], t: f64| c.iter().enumerate().map(|(k, w)| w * (-(t - 0.5 * k as f64).powi(2) * 4.0).exp()).sum::<f64>();
        let rho: Vec<f64> = r.iter().map(|&t| bump(&a, t)).collect();
        let sig: Vec<f64> = r.iter().map(|&t| bump(&b, t)).collect();
        let da = coulomb_energy(&r, &rho).unwrap();
        let db = coulomb_energy(&r, &sig).unwrap();
        prop_assert!(da >= 0.0 && db >= 0.0);
        // D(ρ − σ) ≥ 0
        prop_assert!(da + db - 2.0 * coulomb_pair(&r, &rho, &sig).unwrap() >= -1e-10 * (da + db));
    }
}
