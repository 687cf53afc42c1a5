use proptest::prelude::*;
use relscott::fields::*;
use std::f64::consts::PI;

fn gaussian(width: f64, amplitude: f64) -> FieldFamily {
    FieldFamily::GaussianBump { center: [0.0; 3], width, amplitude, direction: [0.0, 0.6, 0.8] }
}

#[test]
fn zero_field_energies() {
    let f = VectorField::zero(Grid3::cube(6, 0.5));
    assert_eq!(field_energy(&f, 0.3).unwrap(), (0.0, 0.0));
    assert!(f.a.iter().all(|v| *v == [0.0; 3]));
}

#[test]
fn polynomial_bump_energy_matches_closed_form() {
    // For A = ∇×(g e) with |e| = 1: ∫|∇×A|² = (2/3)∫|Δg|², and for g = (1 − ρ²)⁴
    // Δg = −24(1 − ρ²)³ + 48ρ²(1 − ρ²)²
    let h: f64 = 1.0 / 64.0;
    let fam = FieldFamily::PolynomialBump { center: [0.0; 3], radius: 1.0, amplitude: 1.0, direction: [0.0, 0.6, 0.8], power: 4 };
    let n = (2.0 * (1.0 + 2.0 * h) / h).ceil() as usize + 1;
    let f = make_divfree_field(&fam, Grid3::cube(n, h)).unwrap();
    let (raw, _) = field_energy(&f, 1.0).unwrap();
    let lap = |r: f64| {
        let u = 1.0 - r * r;
        -24.0 * u.powi(3) + 48.0 * r * r * u * u
    };
    let (i, _) = relscott::quad::integrate(|r| 4.0 * PI * r * r * lap(r).powi(2), 0.0, 1.0, 0.0, 1e-13).unwrap();
    let want = 2.0 / 3.0 * i;
    assert!((raw - want).abs() < 0.01 * want, "{raw} vs {want}");
}

#[test]
fn gradient_and_curl_energies_agree_for_divfree_fields() {
    let fam = FieldFamily::PolynomialBump { center: [0.0; 3], radius: 1.0, amplitude: 1.0, direction: [1.0, 0.0, 0.0], power: 4 };
    for h in [0.1f64, 0.05] {
        let n = (2.0 * (1.0 + 2.0 * h) / h).ceil() as usize + 1;
        let f = make_divfree_field(&fam, Grid3::cube(n, h)).unwrap();
        let r = check_admissible(&f);
        assert!(r.div_max < 1e-10, "divergence {}", r.div_max);
        assert!(r.equality_defect <= 1e-10 * r.curl_energy, "defect {} at spacing {h}", r.equality_defect);
    }
}

#[test]
fn bump_sobolev_ratio_bounded_over_ensemble() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let grid = Grid3::cube(29, 0.1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() + 0.1];
        let nd = norm3(&d);
        let fam = FieldFamily::GaussianBump {
            center: [0.0; 3],
            width: 0.1 + 0.04 * rng.random::<f64>(),
            amplitude: 0.1 + 2.0 * rng.random::<f64>(),
            direction: d.map(|x| x / nd),
        };
        let r = check_admissible(&make_divfree_field(&fam, grid).unwrap());
        worst = worst.max(r.sobolev_ratio);
    }
    assert!(worst.is_finite() && worst < 10.0, "worst ratio {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_shift_leaves_energies(cx in -3.0f64..3.0, cy in -3.0f64..3.0, cz in -3.0f64..3.0) {
        let f = make_divfree_field(&gaussian(0.15, 1.3), Grid3::cube(29, 0.1)).unwrap();
        let g = f.shifted([cx, cy, cz]);
        prop_assert!((f.curl_energy() - g.curl_energy()).abs() <= 1e-9 * f.curl_energy());
        prop_assert!((f.gradient_energy() - g.gradient_energy()).abs() <= 1e-9 * f.gradient_energy());
    }

    #[test]
    fn alpha_scaling(alpha in 0.01f64..1.0) {
        let f = make_divfree_field(&gaussian(0.15, 1.0), Grid3::cube(29, 0.1)).unwrap();
        let (r1, s1) = field_energy(&f, alpha).unwrap();
        let (r2, s2) = field_energy(&f, 0.5 * alpha).unwrap();
        prop_assert_eq!(r1, r2);
        prop_assert!((s2 - 4.0 * s1).abs() <= 1e-12 * s2);
    }
}
