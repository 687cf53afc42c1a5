use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relscott::phase_space::*;
use relscott::quad;
use relscott::scott::CutoffProfile;
use std::f64::consts::PI;

fn radial_spec<'a>(
    kinetic: Kinetic,
    h: f64,
    v: &'a dyn Fn([f64; 3]) -> f64,
    w: &'a dyn Fn([f64; 3]) -> f64,
    r_max: f64,
) -> SymbolSpec<'a> {
    SymbolSpec { kinetic, h, potential: v, weight: w, geometry: Geometry::Radial { r_max }, tol: 1e-11 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn momentum_constant_is_universal(v0 in 1e-3f64..1e3) {
        // −∫[½p² − V₀]_− dp / V₀^{5/2} by direct quadrature
        let pf = (2.0 * v0).sqrt();
        let (i, _) = quad::integrate(|p| 4.0 * PI * p * p * (v0 - 0.5 * p * p), 0.0, pf, 0.0, 1e-13).unwrap();
        let c = i / v0.powf(2.5);
        prop_assert!((c - 16.0 * 2f64.sqrt() * PI / 15.0).abs() < 1e-10);
        prop_assert!((momentum_nonrel(v0) + i).abs() < 1e-10 * i);
    }

    #[test]
    fn deeper_potential_lowers_value(a in 0.1f64..3.0, extra in 0.01f64..2.0, beta in 0.0f64..1.0) {
        let one = |_: [f64; 3]| 1.0;
        let v1 = move |x: [f64; 3]| a * (-x[0] * x[0]).exp();
        let v2 = move |x: [f64; 3]| (a + extra) * (-x[0] * x[0]).exp();
        let kin = if beta == 0.0 { Kinetic::NonRelativistic } else { Kinetic::Relativistic { beta } };
        let i1 = rel_symbol_integral(&radial_spec(kin, 1.0, &v1, &one, 6.0)).unwrap();
        let i2 = rel_symbol_integral(&radial_spec(kin, 1.0, &v2, &one, 6.0)).unwrap();
        prop_assert!(i2 < i1);
    }

    #[test]
    fn h_scaling_is_exact(h in 0.05f64..2.0) {
        let one = |_: [f64; 3]| 1.0;
        let v = |x: [f64; 3]| 2.0 * (-x[0]).exp();
        let a = weyl_integral(&radial_spec(Kinetic::NonRelativistic, h, &v, &one, 20.0)).unwrap();
        let b = weyl_integral(&radial_spec(Kinetic::NonRelativistic, 1.0, &v, &one, 20.0)).unwrap();
        prop_assert!((a - b / h.powi(3)).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn kappa_scaling_exact(kappa in 0.1f64..4.0, r in 0.5f64..50.0) {
        let p = CutoffProfile::Smooth;
        let a = cutoff_coulomb_weyl(r, kappa, &|t| p.eval(t)).unwrap();
        let b = cutoff_coulomb_weyl(r, 1.0, &|t| p.eval(t)).unwrap();
        prop_assert!((a - kappa.powf(2.5) * b).abs() <= 1e-11 * a.abs());
    }
}

#[test]
fn relativistic_tends_to_nonrelativistic() {
    let one = |_: [f64; 3]| 1.0;
    let v = |x: [f64; 3]| 3.0 * (-x[0] * x[0] / 2.0).exp();
    let nr = weyl_integral(&radial_spec(Kinetic::NonRelativistic, 1.0, &v, &one, 10.0)).unwrap();
    let mut last = f64::INFINITY;
    for &beta in &[0.8, 0.4, 0.2, 0.1, 0.05, 0.025] {
        let r = rel_symbol_integral(&radial_spec(Kinetic::Relativistic { beta }, 1.0, &v, &one, 10.0)).unwrap();
        let d = (r - nr).abs();
        assert!(d < last, "beta {beta}: {d} not below {last}");
        last = d;
    }
    assert!(last < 1e-2 * nr.abs());
}

#[test]
fn relativistic_constant_potential_second_quadrature() {
    // V = 1 on the unit ball, β = 1: substitute p = sinh-type variable via E(p) directly on a
    // uniform Gauss-Legendre rule as the second route
    let (beta, v0) = (1.0f64, 1.0f64);
    let w = |x: [f64; 3]| if x[0] <= 1.0 { 1.0 } else { 0.0 };
    let v = |_: [f64; 3]| v0;
    let got = rel_symbol_integral(&radial_spec(Kinetic::Relativistic { beta }, 1.0, &v, &w, 1.0)).unwrap();
    let pmax = (2.0 * v0 + beta * beta * v0 * v0).sqrt();
    let n = 20000;
    let mut s = 0.0;
    for k in 0..n {
        // midpoint rule in u with p = pmax·u
        let p = pmax * (k as f64 + 0.5) / n as f64;
        let e = ((p * p / (beta * beta) + 1.0 / beta.powi(4)).sqrt() - 1.0 / (beta * beta) - v0).min(0.0);
        s += 4.0 * PI * p * p * e * pmax / n as f64;
    }
    let want = 2.0 / (2.0 * PI).powi(3) * s * 4.0 * PI / 3.0;
    assert!((got - want).abs() < 1e-8 * want.abs(), "{got} vs {want}");
}

#[test]
fn atomic_weyl_is_finite_multiple_of_v52() {
    let sol = relscott::tf::solve_tf_atom(&relscott::tf::TfGridSpec::default(), 1e-10).unwrap();
    let one = |_: [f64; 3]| 1.0;
    let v = |x: [f64; 3]| sol.v1(x[0]);
    let w = weyl_integral(&radial_spec(Kinetic::NonRelativistic, 1.0, &v, &one, f64::INFINITY)).unwrap();
    let i = radial_integral(|r| sol.v1(r).powf(2.5), f64::INFINITY, 1e-11).unwrap();
    let c = -2.0 / (2.0 * PI).powi(3) * weyl_momentum_constant();
    assert!(w.is_finite());
    assert!((w - c * i).abs() < 1e-8 * w.abs());
}

#[test]
fn cutoff_coulomb_half_power_law() {
    let p = CutoffProfile::Smooth;
    for &r in &[1.0, 3.0, 10.0] {
        let a = cutoff_coulomb_weyl(r, 1.0, &|t| p.eval(t)).unwrap();
        let b = cutoff_coulomb_weyl(4.0 * r, 1.0, &|t| p.eval(t)).unwrap();
        assert!((b / a - 2.0).abs() < 0.02);
    }
}

#[test]
fn cutoff_coulomb_monte_carlo() {
    // φ = indicator of B(1/2), R = 1, κ = 1: −C∫_{|x|<1/2}|x|^{-5/2}dx by 3D sampling
    // with radial density ∝ r^{-1/4} on [0, 1/2] and uniform directions
    let step = |t: f64| if t <= 0.5 { 1.0 } else { 0.0 };
    let got = cutoff_coulomb_weyl(1.0, 1.0, &step).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 400_000;
    let mut s = 0.0;
    for _ in 0..n {
        let u: f64 = rng.random::<f64>();
        let r = 0.5 * u.powf(4.0 / 3.0);
        // direction (unused by the radial integrand but sampled for the 3D estimator)
        let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
        let x = [r * (1.0 - z * z).sqrt(), 0.0, r * z];
        let rr = (x[0] * x[0] + x[2] * x[2]).sqrt();
        // density of r: (3/4)·0.5^{-3/4} r^{-1/4}; volume element 4πr²
        let pdf = 0.75 * 0.5f64.powf(-0.75) * rr.powf(-0.25);
        s += 4.0 * PI * rr * rr * rr.powf(-2.5) / pdf;
    }
    let mc = -weyl_momentum_constant() * s / n as f64;
    assert!((got - mc).abs() < 0.01 * got.abs(), "{got} vs {mc}");
}
