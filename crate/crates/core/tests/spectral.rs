use faer::{c64, Mat};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relscott::fields::{make_divfree_field, FieldFamily, Grid3, VectorField};
use relscott::spectral::pauli::{build_lattice, build_pauli_grid, LatticeKind};
use relscott::spectral::lanczos::{lowest_eigenvalues, LanczosOptions};
use relscott::spectral::*;

fn random_psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat<f64> {
    let g = Mat::from_fn(n, n, |_, _| scale * (rng.random::<f64>() - 0.5));
    &g * g.transpose()
}

fn opnorm(m: &Mat<f64>) -> f64 {
    dense::eigvals_sym(&dense::symmetrize(m)).unwrap().iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn coulomb_channel(l: usize, r_max: f64) -> ChannelOperator {
    let g = RadialGrid::new(RadialGridSpec { r_min: 1e-5, r_max, delta: 0.02, delta_max: 0.1, sqrt_spacing: 0.0 }).unwrap();
    build_radial_channel(l, &g, |r| -1.0 / r, 1.0).unwrap()
}

#[test]
fn hydrogen_lowest_levels() {
    for (l, want) in [(0usize, -0.5), (1, -0.125)] {
        let e = coulomb_channel(l, 60.0).schrodinger().eigenvalues_below(0.0);
        assert!((e[0] - want).abs() < 1e-3, "l = {l}: {} vs {want}", e[0]);
    }
}

#[test]
fn free_channel_is_nonnegative() {
    let g = RadialGrid::new(RadialGridSpec::default()).unwrap();
    for l in 0..3 {
        let t = build_radial_channel(l, &g, |_| 0.0, 1.0).unwrap().schrodinger();
        assert!(t.eigenvalues()[0] >= 0.0);
    }
}

#[test]
fn hydrogen_partial_negative_sum() {
    let g = RadialGrid::new(RadialGridSpec { r_min: 1e-5, r_max: 900.0, delta: 0.02, delta_max: 0.25, sqrt_spacing: 0.0 }).unwrap();
    let t = build_radial_channel(0, &g, |r| -1.0 / r, 1.0).unwrap().schrodinger();
    let ev = t.eigenvalues_below(0.0);
    let got: f64 = ev.iter().take(10).sum();
    let want: f64 = (1..=10).map(|n| -0.5 / (n * n) as f64).sum();
    assert!((got - want).abs() < 1e-2, "{got} vs {want}");
}

#[test]
fn negative_sum_examples() {
    let m = Mat::from_fn(3, 3, |i, j| if i == j { [-1.0, 2.0, -3.0][i] } else { 0.0 });
    assert!((negative_sum(&m, None).unwrap() + 4.0).abs() < 1e-14);
    let pd = Mat::from_fn(4, 4, |i, j| if i == j { 1.0 + i as f64 } else { 0.1 });
    assert_eq!(negative_sum(&pd, None).unwrap(), 0.0);
}

#[test]
fn rel_transform_small_beta_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let beta = 1e-3;
    for n in [3, 8, 15] {
        let k = random_psd(&mut rng, n, 3.0);
        let r = rel_transform(&k, beta).unwrap();
        let d = &r - &k * faer::Scale(0.5);
        let kn = opnorm(&k);
        assert!(opnorm(&d) <= beta * beta * kn * kn / 8.0 + 1e-12 * kn);
    }
    let z = Mat::<f64>::zeros(4, 4);
    assert!(opnorm(&rel_transform(&z, 0.7).unwrap()) == 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rel_transform_is_operator_monotone(seed in 0u64..10_000, n in 2usize..10, beta in 0.05f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k1 = random_psd(&mut rng, n, 2.0);
        let k2 = &k1 + random_psd(&mut rng, n, 1.0);
        let d = rel_transform(&k2, beta).unwrap() - rel_transform(&k1, beta).unwrap();
        let m = dense::eigvals_sym(&dense::symmetrize(&d)).unwrap()[0];
        prop_assert!(m >= -1e-10 * (1.0 + opnorm(&k2)));
    }

    #[test]
    fn localization_raises_negative_sum(seed in 0u64..10_000, n in 2usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Mat::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let h = &a + a.transpose();
        let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let plain = negative_sum(&h, None).unwrap();
        let loc = negative_sum(&h, Some(&w)).unwrap();
        prop_assert!(loc >= plain - 1e-12);
    }
}

#[test]
fn pauli_without_field_is_two_scalar_copies() {
    let f = VectorField::zero(Grid3::cube(5, 0.4));
    let p = build_pauli_grid(&f, 0.7).unwrap().matrix.to_dense();
    let s = build_lattice(&f, 0.7, LatticeKind::Schrodinger).unwrap().matrix.to_dense();
    let n = s.nrows();
    for i in 0..2 * n {
        for j in 0..2 * n {
            let want = if i % 2 == j % 2 { s[(i / 2, j / 2)] } else { c64::new(0.0, 0.0) };
            assert!((p[(i, j)] - want).norm() < 1e-14);
        }
    }
}

fn bump_field(n: usize, a: f64) -> VectorField {
    let fam = FieldFamily::PolynomialBump { center: [0.0; 3], radius: 0.7, amplitude: 0.8, direction: [0.3, 0.4, 0.866], power: 3 };
    make_divfree_field(&fam, Grid3::cube(n, a)).unwrap()
}

#[test]
fn pauli_trivial_lower_bound() {
    let f = bump_field(7, 0.4);
    for h in [0.3, 1.0] {
        let p = build_pauli_grid(&f, h).unwrap();
        let s = build_lattice(&f, h, LatticeKind::Schrodinger).unwrap();
        let mp = dense::eigvals_herm(&p.matrix.to_dense()).unwrap()[0];
        let ms = dense::eigvals_herm(&s.matrix.to_dense()).unwrap()[0];
        assert!(mp >= ms - h * p.max_b - 1e-10, "{mp} < {ms} - {}", h * p.max_b);
        assert!(p.matrix.hermiticity_defect() < 1e-14);
    }
}

#[test]
fn gauge_covariance() {
    // χ = 0.3 sin(x) cos(y) z on a box; A → A + ∇χ
    let grad = |x: [f64; 3]| {
        [0.3 * x[0].cos() * x[1].cos() * x[2], -0.3 * x[0].sin() * x[1].sin() * x[2], 0.3 * x[0].sin() * x[1].cos()]
    };
    let defect = |n: usize, a: f64| {
        let f = bump_field(n, a);
        let mut g = f.clone();
        for (i, v) in g.a.iter_mut().enumerate() {
            let d = grad(f.grid.point(i));
            for c in 0..3 {
                v[c] += d[c];
            }
        }
        let opts = LanczosOptions { block: 4, max_dim: 600, tol: 1e-10, seed: 1 };
        let e1 = lowest_eigenvalues(&build_pauli_grid(&f, 1.0).unwrap().matrix, 10, &opts).unwrap();
        let e2 = lowest_eigenvalues(&build_pauli_grid(&g, 1.0).unwrap().matrix, 10, &opts).unwrap();
        e1.iter().zip(&e2).take(10).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let coarse = defect(7, 0.4);
    let fine = defect(13, 0.2);
    assert!(coarse < 1e-2, "coarse defect {coarse}");
    assert!(fine < coarse / 2.0, "defects {coarse} -> {fine}");
}
