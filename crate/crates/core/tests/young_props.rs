use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pqvar::numeric::uniform_grid;
use pqvar::pathcore::{SampledField, SampledPath};
use pqvar::young::{
    integrate_f_dl, integration_by_parts_check, left_point_sum, young_integral_1d, young_integral_1d_sampled,
    YoungOptions,
};
use pqvar::young2d::{
    check_series_condition, riemann_sum_2d, summation_by_parts_2d, young_integral_2d_both, Corner, Field2, JumpSets,
    Young2dOptions,
};

fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

proptest! {
    #[test]
    fn riemann_sum_is_bilinear(seed in any::<u64>(), n in 2usize..40, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f1, f2, g1, g2) = (
            random_values(&mut rng, n),
            random_values(&mut rng, n),
            random_values(&mut rng, n),
            random_values(&mut rng, n),
        );
        let f: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| a * x + b * y).collect();
        let g: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| x + y).collect();
        let lhs = left_point_sum(&f, &g);
        let rhs = a * (left_point_sum(&f1, &g1) + left_point_sum(&f1, &g2))
            + b * (left_point_sum(&f2, &g1) + left_point_sum(&f2, &g2));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + a.abs() + b.abs()) * n as f64);
    }

    #[test]
    fn additive_over_adjacent_intervals(seed in any::<u64>(), n in 3usize..60, split in 1usize..59) {
        let split = split % (n - 2) + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_values(&mut rng, n);
        let g = random_values(&mut rng, n);
        let whole = left_point_sum(&f, &g);
        let parts = left_point_sum(&f[..=split], &g[..=split]) + left_point_sum(&f[split..], &g[split..]);
        prop_assert!((whole - parts).abs() <= 1e-12 * n as f64);
    }

    #[test]
    fn summation_by_parts_is_exact(seed in any::<u64>(), ns in 2usize..12, nx in 3usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = uniform_grid(0.0, 1.0, ns - 1);
        let x = uniform_grid(-1.0, 1.0, nx - 1);
        let mut l = random_values(&mut rng, ns * nx);
        for j in 0..ns {
            l[j * nx] = 0.0;
            l[j * nx + nx - 1] = 0.0;
        }
        let l = SampledField::new(s.clone(), x.clone(), l).unwrap();
        let g = SampledField::new(s, x, random_values(&mut rng, ns * nx)).unwrap();
        let r = summation_by_parts_2d(&g, &l).unwrap();
        prop_assert!(r.residual < 1e-12 * r.scale.max(1e-300), "{:?}", r);
    }

    #[test]
    fn integration_by_parts_for_compact_support(seed in any::<u64>(), n in 3usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs = uniform_grid(0.0, 1.0, n - 1);
        let mut lv = random_values(&mut rng, n);
        lv[0] = 0.0;
        lv[n - 1] = 0.0;
        let f = SampledPath::new(xs.clone(), random_values(&mut rng, n)).unwrap();
        let l = SampledPath::new(xs, lv).unwrap();
        prop_assert!(integration_by_parts_check(&f, &l).unwrap() < 1e-12 * n as f64);
    }
}

#[test]
fn smooth_closed_forms() {
    let opts = YoungOptions {
        levels: (4..=12).collect(),
        tol: 1e-3,
        ..Default::default()
    };
    let r = young_integral_1d(|x| x, |x| x * x, 0.0, 1.0, &opts).unwrap();
    assert!((r.value - 2.0 / 3.0).abs() < 1e-3);
    assert!(r.converged());
    let r = young_integral_1d(|x| x.sin(), |x| x.exp(), 0.0, 1.0, &opts).unwrap();
    // ∫ sin x e^x dx = e^x (sin x - cos x)/2
    let exact = (1f64.exp() * (1f64.sin() - 1f64.cos()) + 1.0) / 2.0;
    assert!((r.value - exact).abs() < 1e-3);
}

#[test]
fn hypothesis_refusal_and_force() {
    let opts = YoungOptions {
        exponents: Some((2.0, 2.0)),
        ..Default::default()
    };
    assert!(young_integral_1d(|x| x, |x| x, 0.0, 1.0, &opts).unwrap_err().is_hypothesis_refusal());
    let forced = YoungOptions { force: true, ..opts };
    assert!(!young_integral_1d(|x| x, |x| x, 0.0, 1.0, &forced).unwrap().notes.is_empty());
}

#[test]
fn sampled_matches_closed_form_with_jump() {
    // g has a unit jump at 0.5: ∫ x dg = ∫ x dx + 0.5·1 (f continuous)
    let xs = uniform_grid(0.0, 1.0, 1 << 12);
    let g = SampledPath::from_fn(xs.clone(), |x| x + if x > 0.5 { 1.0 } else { 0.0 }).unwrap();
    let f = SampledPath::from_fn(xs, |x| x).unwrap();
    let opts = YoungOptions {
        levels: (4..=12).collect(),
        extra_points: vec![0.5],
        ..Default::default()
    };
    let r = young_integral_1d_sampled(&f, &g, &opts).unwrap();
    assert!((r.value - 1.0).abs() < 1e-3, "{}", r.value);
}

#[test]
fn local_time_slice_integral_with_jump_part() {
    let xs = uniform_grid(-1.0, 1.0, 256);
    let lt = SampledPath::from_fn(xs.clone(), |x| (1.0 - x * x).max(0.0)).unwrap();
    let h = SampledPath::from_fn(xs, |x| if x >= 0.25 { 0.5 } else { 0.0 }).unwrap();
    let r = integrate_f_dl(|x| x, &lt, Some(&h), &YoungOptions { levels: (3..=8).collect(), ..Default::default() })
        .unwrap();
    // ∫ x d(1 - x²) = -4/3 on [-1, 1], plus 0.25 · 0.5 from the jump
    assert!((r.value - (-4.0 / 3.0 + 0.125)).abs() < 1e-3, "{}", r.value);
}

#[test]
fn product_closed_form_and_corners() {
    let f = |x: f64, y: f64| x * y;
    let (fwd, bwd) =
        young_integral_2d_both(Field2::Func(&f), Field2::Func(&f), &JumpSets::default(), &Young2dOptions::default())
            .unwrap();
    assert!((fwd.value - 0.25).abs() < 1e-3);
    assert!((fwd.value - bwd.value).abs() < 1e-3 * 2.0);
    let xs = uniform_grid(0.0, 1.0, 64);
    let a = SampledField::from_fn(xs.clone(), xs.clone(), f).unwrap();
    let back = riemann_sum_2d(&a, &a, Corner::Backward).unwrap();
    assert!((back - bwd.value).abs() < 0.05);
}

#[test]
fn series_condition_sweep() {
    for i in 0..20 {
        for j in 0..20 {
            let p = 1.0 + i as f64 * 0.05;
            let q = 1.0 + j as f64 * 0.25;
            let c = check_series_condition(p, q, 0.0, 1000).unwrap();
            assert_eq!(c.feasible, 2.0 * q + 1.0 > 2.0 * p * q + 1e-9, "p={p} q={q}");
            assert!((c.alpha_interval.0 - 2.0 * (1.0 - 1.0 / p)).abs() <= 1e-12);
            assert!((c.alpha_interval.1 - 1.0 / (p * q)).abs() <= 1e-12);
        }
    }
}
