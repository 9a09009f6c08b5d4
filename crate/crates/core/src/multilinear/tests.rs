use super::*;
use crate::env::random_coverage;
use crate::objective::{AdditiveObjective, CoverageObjective};
use proptest::prelude::*;
use rand::Rng;

/// F by the defining sum over all 2^m subsets, independent of the
/// fractional-coordinate shortcut.
fn brute_f<O: Objective>(obj: &O, x: &[f64]) -> f64 {
    let m = x.len();
    let mut total = 0.0;
    for mask in 0u64..(1 << m) {
        let mut p = 1.0;
        for (e, &xe) in x.iter().enumerate() {
            p *= if mask >> e & 1 == 1 { xe } else { 1.0 - xe };
        }
        let set = PairSet::from_indices(m, (0..m).filter(|e| mask >> e & 1 == 1));
        total += p * obj.evaluate(&set).unwrap();
    }
    total
}

fn random_x(m: usize, seed: u64) -> MarginalVector {
    let mut rng = rng::stream(&[seed, 0xf]);
    MarginalVector((0..m).map(|_| rng.random_range(0.0..1.0)).collect())
}

#[test]
fn degenerate_draws() {
    assert!(sample_set(&MarginalVector::zeros(9), 4).unwrap().is_empty());
    assert_eq!(
        sample_set(&MarginalVector(vec![1.0; 9]), 4).unwrap().len(),
        9
    );
}

#[test]
fn inclusion_frequency() {
    let mut x = MarginalVector::zeros(3);
    x.0[1] = 0.3;
    let n = 100_000;
    let hits = (0..n)
        .filter(|&s| sample_set(&x, s).unwrap().contains(1))
        .count();
    let freq = hits as f64 / n as f64;
    assert!((freq - 0.3).abs() < 0.01, "{freq}");
}

#[test]
fn range_is_checked() {
    let err = sample_set(&MarginalVector(vec![0.5, 1.1]), 0).unwrap_err();
    assert!(err.to_string().contains("marginal out of range"), "{err}");
    assert!(sample_set(&MarginalVector(vec![-1e-13, 1.0 + 1e-13]), 0).is_ok());
}

#[test]
fn additive_estimate_within_three_sigma() {
    let obj = AdditiveObjective::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    let x = MarginalVector(vec![0.1, 0.5, 0.9, 0.3, 0.7]);
    let exact: f64 = x
        .as_slice()
        .iter()
        .zip(obj.weights())
        .map(|(a, b)| a * b)
        .sum();
    let r = 2000;
    let (mean, std) = estimate_value_with_spread(&obj, &x, r, 9).unwrap();
    assert!(
        (mean - exact).abs() <= 3.0 * std / (r as f64).sqrt(),
        "{mean} vs {exact}"
    );
}

#[test]
fn integral_x_is_exact() {
    let obj = random_coverage(10, 12, 0.3, 1);
    let x = MarginalVector::indicator(10, &[0, 3, 7]);
    let direct = obj.evaluate_indices(&[0, 3, 7]).unwrap();
    assert!((estimate_value(&obj, &x, 7, 3).unwrap() - direct).abs() < 1e-12);
    assert!((exact_value(&obj, &x).unwrap() - direct).abs() < 1e-12);
}

#[test]
fn coverage_estimate_within_three_sigma() {
    let obj = random_coverage(10, 12, 0.3, 2);
    let x = random_x(10, 2);
    let exact = exact_value(&obj, &x).unwrap();
    let r = 5000;
    let (mean, std) = estimate_value_with_spread(&obj, &x, r, 5).unwrap();
    assert!(
        (mean - exact).abs() <= 3.0 * std / (r as f64).sqrt(),
        "{mean} vs {exact}"
    );
}

#[test]
fn gradient_at_zero_is_the_singleton_gain() {
    let obj = random_coverage(6, 10, 0.3, 3);
    let coords: Vec<usize> = (0..6).collect();
    let g = estimate_gradient(
        &obj,
        &MarginalVector::zeros(6),
        &coords,
        &GradientOptions::monte_carlo(5, 1),
    )
    .unwrap();
    for e in 0..6 {
        assert!((g.w[e] - obj.evaluate_indices(&[e]).unwrap()).abs() < 1e-12);
        assert!(g.std[e] < 1e-12);
    }
    assert_eq!(g.samples_used, 5);
}

#[test]
fn exact_mode_uses_the_closed_form() {
    let obj = AdditiveObjective::new(vec![2.0, 7.0]).unwrap();
    let opts = GradientOptions {
        prefer_exact: true,
        ..GradientOptions::monte_carlo(3, 0)
    };
    let g = estimate_gradient(&obj, &MarginalVector(vec![0.2, 0.9]), &[1, 0], &opts).unwrap();
    assert_eq!(g.w, vec![7.0, 2.0]);
    assert_eq!(g.samples_used, 0);
}

#[test]
fn gradient_modes_agree_with_finite_difference() {
    let obj = random_coverage(10, 12, 0.3, 4);
    let x = random_x(10, 4);
    let coords: Vec<usize> = (0..10).collect();
    let r = 10_000;
    for sharing in [SampleSharing::Shared, SampleSharing::Independent] {
        let opts = GradientOptions {
            sharing,
            ..GradientOptions::monte_carlo(r, 11)
        };
        let g = estimate_gradient(&obj, &x, &coords, &opts).unwrap();
        for e in 0..10 {
            let fd = exact_partial(&obj, &x, e).unwrap();
            let sigma = g.std[e] / (r as f64).sqrt();
            assert!(
                (g.w[e] - fd).abs() <= 4.0 * sigma + 1e-12,
                "{sharing:?} e={e}: {} vs {fd}",
                g.w[e]
            );
        }
    }
}

#[test]
fn estimates_are_reproducible() {
    let obj = random_coverage(8, 10, 0.3, 6);
    let x = random_x(8, 6);
    let coords: Vec<usize> = (0..8).collect();
    let opts = GradientOptions::monte_carlo(50, 42);
    assert_eq!(
        estimate_gradient(&obj, &x, &coords, &opts).unwrap(),
        estimate_gradient(&obj, &x, &coords, &opts).unwrap()
    );
    assert_eq!(
        estimate_value(&obj, &x, 50, 1).unwrap(),
        estimate_value(&obj, &x, 50, 1).unwrap()
    );
}

#[test]
fn eight_term_example() {
    let obj = CoverageObjective::unweighted(vec![vec![0], vec![0, 1], vec![1]], 2).unwrap();
    // f over the 8 subsets of {0,1,2}: {}=0, {0}=1, {1}=2, {2}=1, {0,1}=2,
    // {0,2}=2, {1,2}=2, {0,1,2}=2
    let by_hand = (0.0 + 1.0 + 2.0 + 1.0 + 2.0 + 2.0 + 2.0 + 2.0) / 8.0;
    let x = MarginalVector(vec![0.5; 3]);
    assert!((exact_value(&obj, &x).unwrap() - by_hand).abs() < 1e-12);
}

#[test]
fn additive_exact_value_is_linear() {
    let obj = AdditiveObjective::new(vec![1.5, 0.0, 4.0, 2.0]).unwrap();
    let x = MarginalVector(vec![0.3, 0.6, 0.25, 1.0]);
    let linear: f64 = x
        .as_slice()
        .iter()
        .zip(obj.weights())
        .map(|(a, b)| a * b)
        .sum();
    assert!((exact_value(&obj, &x).unwrap() - linear).abs() < 1e-9);
}

#[test]
fn too_many_fractional_coordinates() {
    let obj = AdditiveObjective::new(vec![1.0; 30]).unwrap();
    let err = exact_value(&obj, &MarginalVector(vec![0.5; 30])).unwrap_err();
    assert!(
        err.to_string().contains("exact evaluation infeasible"),
        "{err}"
    );
    // integral coordinates do not count toward the limit
    let mut x = vec![1.0; 30];
    x[3] = 0.5;
    assert!((exact_value(&obj, &MarginalVector(x)).unwrap() - 29.5).abs() < 1e-9);
}

#[test]
fn unbiased_over_independent_seeds() {
    for inst in 0..3 {
        let obj = random_coverage(12, 14, 0.25, 100 + inst);
        let x = random_x(12, inst);
        let exact = exact_value(&obj, &x).unwrap();
        let estimates: Vec<f64> = (0..200)
            .map(|s| estimate_value(&obj, &x, 20, s).unwrap())
            .collect();
        let (mean, std) = mean_std(&estimates);
        assert!(
            (mean - exact).abs() <= 4.0 * std / 200f64.sqrt(),
            "{mean} vs {exact}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shortcut_matches_full_enumeration(seed in 0u64..10_000, m in 1usize..=10, zeros in 0usize..4) {
        let obj = random_coverage(m, 8, 0.35, seed);
        let mut x = random_x(m, seed);
        for k in 0..zeros.min(m) {
            x.0[(k * 7 + seed as usize) % m] = if k % 2 == 0 { 0.0 } else { 1.0 };
        }
        let a = exact_value(&obj, &x).unwrap();
        let b = brute_f(&obj, x.as_slice());
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn f_is_monotone(seed in 0u64..10_000) {
        let obj = random_coverage(8, 10, 0.3, seed);
        let x = random_x(8, seed);
        let bump = random_x(8, seed + 1);
        let y = MarginalVector(x.as_slice().iter().zip(bump.as_slice()).map(|(a, b)| a + (1.0 - a) * b).collect());
        prop_assert!(exact_value(&obj, &x).unwrap() <= exact_value(&obj, &y).unwrap() + 1e-9);
    }

    #[test]
    fn f_is_concave_along_nonnegative_directions(seed in 0u64..10_000) {
        let obj = random_coverage(7, 10, 0.3, seed);
        let x = MarginalVector(random_x(7, seed).as_slice().iter().map(|v| v * 0.5).collect());
        let dir = MarginalVector(random_x(7, seed + 9).as_slice().iter().map(|v| v * 0.5).collect());
        let at = |xi: f64| {
            let mut p = x.clone();
            p.add_scaled(xi, &dir);
            exact_value(&obj, &p).unwrap()
        };
        let grid: Vec<f64> = (0..=10).map(|k| at(k as f64 / 10.0)).collect();
        for k in 1..10 {
            prop_assert!(grid[k - 1] - 2.0 * grid[k] + grid[k + 1] <= 1e-9);
        }
    }
}
