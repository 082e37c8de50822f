use proptest::prelude::*;

use pqvar::pathcore::SampledField;
use pqvar::variation::{
    dyadic_bound_from_values, partition_sum, phi_psi_variation_grid, phi_variation_enumerate, phi_variation_values,
    pq_partition_sum, ConvexGauge, Exactness, SearchMode, VariationBudget,
};
use pqvar::pathcore::Partition2D;

fn values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 2..=max_len)
}

/// Brute force over all partitions containing both endpoints, written independently of the library.
fn brute_force_1d(v: &[f64], p: f64) -> f64 {
    let inner = v.len() - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1 << inner) {
        let mut prev = 0;
        let mut s = 0.0;
        for i in 1..v.len() {
            if i == v.len() - 1 || mask & (1 << (i - 1)) != 0 {
                s += (v[i] - v[prev]).abs().powf(p);
                prev = i;
            }
        }
        best = best.max(s);
    }
    best
}

proptest! {
    #[test]
    fn dp_matches_enumeration(v in values(10), p in 1.0f64..4.0) {
        let g = ConvexGauge::power(p).unwrap();
        let (dp, witness) = phi_variation_values(&v, &g);
        let (en, _) = phi_variation_enumerate(&v, &g).unwrap();
        prop_assert_eq!(dp, en);
        prop_assert_eq!(partition_sum(&v, &witness, &g), dp);
        let oracle = brute_force_1d(&v, p);
        prop_assert!((dp - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn dp_is_a_supremum(v in values(40), p in 1.0f64..3.0, mask in any::<u64>()) {
        let g = ConvexGauge::power(p).unwrap();
        let (dp, _) = phi_variation_values(&v, &g);
        let n = v.len();
        let mut idx = vec![0];
        idx.extend((1..n - 1).filter(|i| mask & (1 << (i % 64)) != 0));
        idx.push(n - 1);
        prop_assert!(partition_sum(&v, &idx, &g) <= dp * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn variation_monotone_under_refinement(v in values(30), p in 1.0f64..3.0) {
        // dropping grid points can only lower the supremum
        let g = ConvexGauge::power(p).unwrap();
        let coarse: Vec<f64> = v.iter().step_by(2).copied().chain(std::iter::once(v[v.len() - 1])).collect();
        prop_assert!(phi_variation_values(&coarse, &g).0 <= phi_variation_values(&v, &g).0 * (1.0 + 1e-12));
    }

    #[test]
    fn one_variation_is_total_variation(v in values(30)) {
        let g = ConvexGauge::power(1.0).unwrap();
        let tv: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        prop_assert!((phi_variation_values(&v, &g).0 - tv).abs() <= 1e-12 * tv.max(1.0));
    }

    #[test]
    fn dyadic_bound_dominates(n in 1u32..7, p in 1.0f64..3.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..=(1usize << n)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gamma = p - 1.0 + 0.5;
        let b = dyadic_bound_from_values(&v, p, gamma, None).unwrap();
        let exact = phi_variation_values(&v, &ConvexGauge::power(p).unwrap()).0;
        prop_assert!(b.value >= exact * (1.0 - 1e-12));
        prop_assert_eq!(b.exactness, Exactness::UpperBound);
    }

    #[test]
    fn grid_search_modes_agree(rows in 3usize..7, cols in 3usize..7, seed in any::<u64>(), p in 1.0f64..2.5) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..rows).map(|i| i as f64).collect();
        let ys: Vec<f64> = (0..cols).map(|j| j as f64).collect();
        let vals: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let field = SampledField::new(xs, ys, vals).unwrap();
        let phi = ConvexGauge::power(p).unwrap();
        let psi = ConvexGauge::power(1.0).unwrap();
        let exhaustive = VariationBudget { mode: SearchMode::Exhaustive, ..Default::default() };
        let auto = VariationBudget::default();
        let a = phi_psi_variation_grid(&field, &phi, &psi, &exhaustive).unwrap();
        let b = phi_psi_variation_grid(&field, &phi, &psi, &auto).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.max(1.0));
        let part = Partition2D::new(
            pqvar::pathcore::Partition1D::new(a.witness.xindices.clone(), rows).unwrap(),
            pqvar::pathcore::Partition1D::new(a.witness.yindices.clone().unwrap(), cols).unwrap(),
        );
        prop_assert_eq!(pq_partition_sum(&field, &part, &phi, &psi), a.value);
        let hill = VariationBudget { mode: SearchMode::HillClimb, ..Default::default() };
        let c = phi_psi_variation_grid(&field, &phi, &psi, &hill).unwrap();
        prop_assert!(c.value <= a.value * (1.0 + 1e-12));
    }
}

#[test]
fn quadratic_variation_of_sine_samples() {
    // p = 2 on a monotone piece: the single jump dominates any split
    let v: Vec<f64> = (0..=16).map(|k| (k as f64 / 16.0 * std::f64::consts::FRAC_PI_2).sin()).collect();
    let (val, w) = phi_variation_values(&v, &ConvexGauge::power(2.0).unwrap());
    assert_eq!(w, vec![0, 16]);
    assert!((val - 1.0).abs() < 1e-15);
}
