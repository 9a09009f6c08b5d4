use super::*;
use crate::env::{
    build_cardinality, build_grid, cardinality_objective, random_coverage, random_coverage_items,
    random_mdp, RandomMdpSpec,
};
use crate::objective::{mixture_value, AdditiveObjective, CoverageObjective};
use crate::{dp, MdpBuilder};

fn chain(levels: usize) -> LeveledMdp {
    let mut b = MdpBuilder::new(levels);
    let s: Vec<_> = (1..=levels)
        .map(|h| b.state(format!("s{h}"), h, h < levels))
        .collect();
    for h in 0..levels - 1 {
        b.action(s[h], "go", vec![(s[h + 1], 1.0)]);
    }
    b.build().unwrap()
}

fn cfg(delta: f64, samples: usize, seed: u64) -> CgConfig {
    CgConfig {
        delta,
        samples,
        seed,
        final_samples: 200,
        ..CgConfig::default()
    }
}

/// Best value over all k-subsets of items.
fn subset_opt(items: &[Vec<usize>], weights: &[f64], k: usize) -> f64 {
    let obj = CoverageObjective::new(items.to_vec(), weights.to_vec()).unwrap();
    let n = items.len();
    let mut best: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            let chosen: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            best = best.max(obj.evaluate_indices(&chosen).unwrap());
        }
    }
    best
}

#[test]
fn additive_exact_mode_repeats_the_optimum() {
    for seed in 0..10 {
        let mdp = build_grid(4).unwrap();
        let w: Vec<f64> = (0..mdp.ground_size())
            .map(|e| ((e as u64 * 31 + seed * 7) % 11) as f64)
            .collect();
        let obj = AdditiveObjective::new(w.clone()).unwrap();
        let c = CgConfig {
            gradient_mode: GradientMode::ExactWhenAvailable,
            ..cfg(0.05, 1, seed)
        };
        let result = run(&mdp, &obj, &c).unwrap();
        let (opt_policy, opt) = dp::solve_linear(&mdp, &w);
        assert!(result.mixture.members().iter().all(|p| *p == opt_policy));
        assert!((mixture_value(&mdp, &obj, &result.mixture).unwrap() - opt).abs() < 1e-9);
    }
}

#[test]
fn single_path_is_copied() {
    let mdp = chain(5);
    let obj = random_coverage(4, 6, 0.5, 1);
    let result = run(&mdp, &obj, &cfg(0.1, 3, 0)).unwrap();
    assert_eq!(result.mixture.len(), 10);
    assert!(result
        .mixture
        .members()
        .iter()
        .all(|p| *p == DeterministicPolicy::lowest(&mdp)));
    assert!(result.y_final.max_abs_diff(&MarginalVector(vec![1.0; 4])) < 1e-12);
}

#[test]
fn cardinality_reaches_the_bound() {
    let (n, k) = (8, 3);
    let mdp = build_cardinality(n, k).unwrap();
    for seed in 0..3 {
        let (items, weights) = random_coverage_items(n, 12, 0.25, seed);
        let obj = cardinality_objective(&mdp, &items, weights.clone()).unwrap();
        let result = run(&mdp, &obj, &cfg(0.01, 200, seed)).unwrap();
        let opt = subset_opt(&items, &weights, k);
        let bound = (1.0 - (-1f64).exp() - 0.05) * opt;
        assert!(
            result.estimated_f >= bound,
            "seed {seed}: {} < {bound}",
            result.estimated_f
        );
    }
}

#[test]
fn y_final_is_the_member_average() {
    let mdp = random_mdp(&RandomMdpSpec::default(), 4).unwrap();
    let obj = random_coverage(mdp.ground_size(), 12, 0.3, 4);
    let result = run(&mdp, &obj, &cfg(0.02, 5, 4)).unwrap();
    assert_eq!(result.mixture.len(), 50);
    assert_eq!(result.per_iteration.len(), 50);
    let avg = mdp.mixture_marginals(&result.mixture);
    assert!(result.y_final.max_abs_diff(&avg) < 1e-9);
    assert!(result
        .y_final
        .as_slice()
        .iter()
        .all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn stochastic_models_are_supported() {
    let spec = RandomMdpSpec {
        stochastic: true,
        ..RandomMdpSpec::default()
    };
    let mdp = random_mdp(&spec, 12).unwrap();
    let obj = random_coverage(mdp.ground_size(), 10, 0.3, 12);
    let result = run(&mdp, &obj, &cfg(0.1, 5, 1)).unwrap();
    assert!(
        result
            .y_final
            .max_abs_diff(&mdp.mixture_marginals(&result.mixture))
            < 1e-9
    );
}

#[test]
fn exact_f_grows_along_the_run() {
    let mdp = build_grid(3).unwrap();
    let obj = random_coverage(mdp.ground_size(), 10, 0.3, 7);
    let c = CgConfig {
        gradient_mode: GradientMode::ExactWhenAvailable,
        ..cfg(0.05, 1, 7)
    };
    let result = run(&mdp, &obj, &c).unwrap();
    let mut y = MarginalVector::zeros(mdp.ground_size());
    let mut prev = multilinear::exact_value(&obj, &y).unwrap();
    for rec in &result.per_iteration {
        y.add_scaled(c.delta, &mdp.policy_marginals(&rec.policy));
        let now = multilinear::exact_value(&obj, &clamp(&y)).unwrap();
        assert!(now >= prev - 1e-9, "{now} < {prev}");
        prev = now;
    }
}

#[test]
fn runs_are_reproducible() {
    let mdp = build_grid(4).unwrap();
    let obj = random_coverage(mdp.ground_size(), 12, 0.3, 2);
    let a = run(&mdp, &obj, &cfg(0.05, 4, 99)).unwrap();
    let b = run(&mdp, &obj, &cfg(0.05, 4, 99)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_is_checked() {
    let mdp = build_grid(2).unwrap();
    let obj = AdditiveObjective::new(vec![1.0; 4]).unwrap();
    assert!(run(&mdp, &obj, &cfg(0.3, 1, 0)).is_err());
    assert!(run(&mdp, &obj, &cfg(0.0, 1, 0)).is_err());
    assert!(run(&mdp, &obj, &cfg(0.5, 0, 0)).is_err());
    assert_eq!(cfg(0.01, 1, 0).iterations().unwrap(), 100);
    assert_eq!(cfg(0.125, 1, 0).iterations().unwrap(), 8);
    let wrong = AdditiveObjective::new(vec![1.0; 5]).unwrap();
    assert!(matches!(
        run(&mdp, &wrong, &cfg(0.5, 1, 0)),
        Err(Error::GroundSetMismatch { .. })
    ));
}

#[test]
fn theoretical_parameters() {
    let mdp = build_grid(2).unwrap();
    let c = CgConfig::theoretical(&mdp);
    // 4 states, at most 2 actions
    assert_eq!(c.iterations().unwrap(), 9 * 16 * 4);
    let expected = 10.0 * (1.0 + 8f64.ln()) * (576.0f64).powi(2);
    assert_eq!(c.samples, expected.ceil() as usize);
}

#[test]
fn restarts_keep_the_best_estimate() {
    let mdp = build_grid(4).unwrap();
    let obj = random_coverage(mdp.ground_size(), 12, 0.3, 5);
    let c = cfg(0.1, 2, 5);
    let single = run(&mdp, &obj, &c).unwrap();
    assert_eq!(run_with_restarts(&mdp, &obj, &c, 1).unwrap(), single);
    let best = run_with_restarts(&mdp, &obj, &c, 4).unwrap();
    assert!(best.estimated_f >= single.estimated_f);
}

#[test]
fn shift_changes_only_reported_values() {
    let mdp = build_grid(3).unwrap();
    let obj = crate::env::build_synthetic(&crate::env::SyntheticSpec::new(3, 1, 3))
        .unwrap()
        .1;
    let raw = run(&mdp, &obj, &cfg(0.1, 5, 1)).unwrap();
    let shifted = run(
        &mdp,
        &obj,
        &CgConfig {
            offset_mode: OffsetMode::NonnegativeShift,
            ..cfg(0.1, 5, 1)
        },
    )
    .unwrap();
    assert_eq!(raw.mixture, shifted.mixture);
    assert!((shifted.estimated_f - raw.estimated_f + obj.empty_value()).abs() < 1e-9);
    assert!(shifted.estimated_f >= 0.0);
}

#[test]
fn trace_csv() {
    let mdp = build_grid(3).unwrap();
    let obj = random_coverage(mdp.ground_size(), 8, 0.3, 3);
    let c = CgConfig {
        trace_samples: 20,
        ..cfg(0.25, 3, 3)
    };
    let result = run(&mdp, &obj, &c).unwrap();
    let mut buf = Vec::new();
    write_trace(&result, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,linear_value,estimated_f");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("4,"));
    assert!(!lines[4].ends_with(','));
}
