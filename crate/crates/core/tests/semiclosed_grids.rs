use proptest::prelude::*;
use qlab::optimizer::{solve_stationary_1d, SolveOptions};
use qlab::radius::max_radius;
use qlab::scalar::Extended;
use qlab::semiclosed::{
    exponential_grid, exponential_grid_from_weights, next_weight_exponential, next_weight_pareto, pareto_grid,
    pareto_grid_from_weights, resolve_pareto_reading, WeightFamily, WeightSequence,
};
use qlab::SpecF64;

fn check_weights(w: &WeightSequence<f64>) {
    let limit = w.limit();
    for (i, &a) in w.weights.iter().enumerate() {
        let k = i + 1;
        assert!(a > 0.0);
        if k > 1 {
            assert!(a < w.weights[i - 1], "k={k}");
        }
        if k >= 20 {
            let dev = (k as f64 * a / limit - 1.0).abs();
            assert!(dev < 5.0 / k as f64, "k={k}: k a_k / limit off by {dev}");
        }
    }
}

#[test]
fn weight_sequences_decrease_with_known_limits() {
    for r in [0.5, 1.0, 2.0, 3.0] {
        check_weights(&WeightSequence::compute(WeightFamily::Exponential, r, 1000).unwrap());
    }
    for (r, g) in [(2.0, 5.0), (2.0, 4.0), (1.0, 3.0)] {
        check_weights(&WeightSequence::compute(WeightFamily::Pareto { gamma: g }, r, 1000).unwrap());
    }
}

#[test]
fn pareto_k_times_weight_at_500() {
    let w = WeightSequence::<f64>::compute(WeightFamily::Pareto { gamma: 5.0 }, 2.0, 500).unwrap();
    assert!((500.0 * w.get(500) - 1.0).abs() < 0.02);
}

/// `k a_k = L + c/k + O(1/k²)`: fitting `c` on [200, 400] predicts `k a_k`
/// at 2000 far better than the limit alone.
#[test]
fn weight_correction_is_first_order() {
    let w = WeightSequence::compute(WeightFamily::Exponential, 2.0, 2000).unwrap();
    let ka = |k: usize| k as f64 * w.get(k);
    let c = (ka(200) - 3.0) * 200.0;
    let c2 = (ka(400) - 3.0) * 400.0;
    assert!((c - c2).abs() < 0.05 * c.abs(), "{c} vs {c2}");
    let pred = 3.0 + c2 / 2000.0;
    assert!((ka(2000) - pred).abs() < 0.1 * (ka(2000) - 3.0).abs());
}

#[test]
fn exponential_telescoping_and_radius_identity() {
    let lambda = 1.7f64;
    let w = WeightSequence::compute(WeightFamily::Exponential, 2.0, 2000).unwrap();
    let mut prev = 0.0;
    let mut prefix = 0.0;
    for n in 1..=2000 {
        let rho = max_radius(&exponential_grid_from_weights(&w, lambda, n).unwrap()).unwrap();
        let direct = (w.get(n) / 2.0 + prefix) / lambda;
        assert!((rho - direct).abs() < 1e-12 * rho, "n={n}");
        if n > 1 {
            let step = (w.get(n) + w.get(n - 1)) / (2.0 * lambda);
            assert!(rho > prev);
            assert!((rho - prev - step).abs() < 1e-11 * rho, "n={n}");
        }
        prefix += w.get(n);
        prev = rho;
    }
}

#[test]
fn exponential_grids_are_stationary_for_several_orders() {
    let e = SpecF64::exponential(1.0).unwrap();
    for r in [1.0, 2.0, 3.0] {
        for n in [1, 3, 6] {
            let a = exponential_grid(r, 1.0, n).unwrap();
            let b = solve_stationary_1d(&e, n, r, None, &SolveOptions::default()).unwrap();
            for (x, y) in a.flat().iter().zip(b.flat()) {
                assert!((x - y).abs() < 1e-6, "r={r} n={n}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn pareto_grids_match_direct_solves() {
    for (r, g) in [(2.0, 5.0), (1.0, 3.0), (3.0, 6.0)] {
        let spec = SpecF64::pareto(g).unwrap();
        let reading = resolve_pareto_reading(r, g).unwrap();
        let w = WeightSequence::compute(WeightFamily::Pareto { gamma: g }, r, 12).unwrap();
        for n in [4, 8, 12] {
            let a = pareto_grid_from_weights(&w, n, reading).unwrap();
            let b = solve_stationary_1d(&spec, n, r, None, &SolveOptions::default()).unwrap();
            for (x, y) in a.flat().iter().zip(b.flat()) {
                assert!((x / y - 1.0).abs() < 1e-6, "r={r} γ={g} n={n}: {x} vs {y}");
            }
            assert!(a.within_support_hull(&spec));
        }
    }
}

#[test]
fn pareto_order_at_or_above_tail_is_rejected() {
    assert!(pareto_grid(2.0, 2.0, 3).is_err());
    assert!(next_weight_pareto(3.0, 2.5, Extended::PosInf).is_err());
}

proptest! {
    #[test]
    fn next_weight_is_smaller(r in 0.3f64..5.0, prev in 1e-3f64..50.0) {
        let a = next_weight_exponential(r, Extended::Finite(prev)).unwrap();
        prop_assert!(a > 0.0 && a < prev);
    }

    #[test]
    fn next_pareto_weight_is_smaller(r in 0.5f64..3.0, excess in 0.5f64..6.0, prev in 1e-3f64..50.0) {
        let a = next_weight_pareto(r, r + excess, Extended::Finite(prev)).unwrap();
        prop_assert!(a > 0.0 && a < prev);
    }

    #[test]
    fn exponential_grids_scale_with_rate(lambda in 0.1f64..10.0, n in 1usize..40) {
        let unit = exponential_grid(2.0, 1.0, n).unwrap();
        let scaled = exponential_grid(2.0, lambda, n).unwrap();
        for (x, y) in unit.flat().iter().zip(scaled.flat()) {
            prop_assert!((x / lambda - y).abs() <= 1e-12 * x.max(1.0) / lambda);
        }
    }
}

#[test]
fn single_and_double_precision_agree() {
    let a = exponential_grid(2.0f32, 1.0, 50).unwrap();
    let b = exponential_grid(2.0f64, 1.0, 50).unwrap();
    for (x, y) in a.flat().iter().zip(b.flat()) {
        assert!((*x as f64 - y).abs() < 1e-4 * y.max(1.0));
    }
}
