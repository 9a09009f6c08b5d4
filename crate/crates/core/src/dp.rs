//! Backward induction for linear rewards and an exhaustive path oracle.

use crate::mdp::{DeterministicPolicy, LeveledMdp};
use crate::objective::{Objective, PairSet};
use crate::{Error, Result};

/// Path budget for [`brute_force_plan`].
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Maximize `x(π)·w` over deterministic policies.
///
/// `V(s) = max_a [w(s,a) + Σ P(s'|s,a) V(s')]` with `V = 0` at non-acting
/// states. Every acting state gets an action, reachable or not; ties go to
/// the lowest action index. Negative weights are fine.
pub fn solve_linear(mdp: &LeveledMdp, w: &[f64]) -> (DeterministicPolicy, f64) {
    assert_eq!(w.len(), mdp.ground_size(), "weight vector length");
    let mut v = vec![0.0; mdp.num_states()];
    let mut policy = DeterministicPolicy::empty(mdp);
    for level in (1..=mdp.levels()).rev() {
        for &s in mdp.level_states(level) {
            if !mdp.is_acting(s) {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for (a, action) in mdp.actions(s).iter().enumerate() {
                let q = w[mdp.pair_index(s, a)]
                    + action.outcomes.iter().map(|&(t, p)| p * v[t]).sum::<f64>();
                if best.is_none_or(|(_, b)| q > b) {
                    best = Some((a, q));
                }
            }
            if let Some((a, q)) = best {
                policy.set(s, a);
                v[s] = q;
            }
        }
    }
    (policy, v[mdp.initial()])
}

/// Exact optimum of `f` over deterministic policies by listing every
/// root-to-terminal path. Ties keep the path found first, which is the one
/// that is lexicographically smallest in action indices.
pub fn brute_force_plan<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
) -> Result<(DeterministicPolicy, f64)> {
    if !mdp.is_deterministic() {
        return Err(Error::StochasticTransitions);
    }
    let paths = mdp.count_paths();
    if paths > ENUMERATION_LIMIT {
        return Err(Error::EnumerationInfeasible {
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best: Option<(Vec<(usize, usize)>, f64)> = None;
    let mut steps = Vec::new();
    let mut set = PairSet::empty(mdp.ground_size());
    walk(mdp, obj, mdp.initial(), &mut steps, &mut set, &mut best)?;
    let (steps, value) = best.expect("at least one path");
    let mut policy = DeterministicPolicy::lowest(mdp);
    for (s, a) in steps {
        policy.set(s, a);
    }
    Ok((policy, value))
}

fn walk<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    s: usize,
    steps: &mut Vec<(usize, usize)>,
    set: &mut PairSet,
    best: &mut Option<(Vec<(usize, usize)>, f64)>,
) -> Result<()> {
    if !mdp.is_acting(s) {
        let value = obj.evaluate(set)?;
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            *best = Some((steps.clone(), value));
        }
        return Ok(());
    }
    for a in 0..mdp.actions(s).len() {
        let e = mdp.pair_index(s, a);
        steps.push((s, a));
        set.insert(e);
        walk(mdp, obj, mdp.next_state(s, a), steps, set, best)?;
        set.remove(e);
        steps.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_grid, random_deterministic_policy, random_mdp, RandomMdpSpec};
    use crate::objective::AdditiveObjective;

    fn grid2_weights(mdp: &LeveledMdp) -> Vec<f64> {
        let mut w = vec![1.0; mdp.ground_size()];
        for e in 0..mdp.ground_size() {
            match mdp.pair_label(e).as_str() {
                "(1,1)R" | "(1,2)D" => w[e] = 5.0,
                _ => {}
            }
        }
        w
    }

    #[test]
    fn two_by_two_prefers_right_then_down() {
        let mdp = build_grid(2).unwrap();
        let w = grid2_weights(&mdp);
        let (policy, value) = solve_linear(&mdp, &w);
        assert_eq!(value, 10.0);
        let labels: Vec<_> = mdp
            .follow(&policy)
            .unwrap()
            .pairs(&mdp)
            .iter()
            .map(|&e| mdp.pair_label(e))
            .collect();
        assert_eq!(labels, ["(1,1)R", "(1,2)D"]);
        let obj = AdditiveObjective::new(w).unwrap();
        let (_, brute) = brute_force_plan(&mdp, &obj).unwrap();
        assert!((brute - value).abs() < 1e-12);
    }

    #[test]
    fn zero_weights_pick_lowest_actions() {
        let mdp = build_grid(4).unwrap();
        let (policy, value) = solve_linear(&mdp, &vec![0.0; mdp.ground_size()]);
        assert_eq!(value, 0.0);
        assert_eq!(policy, DeterministicPolicy::lowest(&mdp));
    }

    #[test]
    fn single_path_sums_weights() {
        let mut b = crate::MdpBuilder::new(4);
        let s: Vec<_> = (1..=4)
            .map(|h| b.state(format!("s{h}"), h, h < 4))
            .collect();
        for h in 0..3 {
            b.action(s[h], "go", vec![(s[h + 1], 1.0)]);
        }
        let mdp = b.build().unwrap();
        let (_, value) = solve_linear(&mdp, &[1.0, 2.0, 4.0]);
        assert_eq!(value, 7.0);
    }

    #[test]
    fn value_matches_marginals_and_beats_random_policies() {
        for seed in 0..20 {
            let spec = RandomMdpSpec {
                stochastic: seed % 2 == 0,
                ..RandomMdpSpec::default()
            };
            let mdp = random_mdp(&spec, seed).unwrap();
            let w: Vec<f64> = (0..mdp.ground_size())
                .map(|e| ((e * 37 + seed as usize * 11) % 17) as f64 - 8.0)
                .collect();
            let (policy, value) = solve_linear(&mdp, &w);
            assert!((mdp.policy_marginals(&policy).dot(&w) - value).abs() < 1e-9);
            for k in 0..100 {
                let other = random_deterministic_policy(&mdp, seed * 1000 + k);
                assert!(mdp.policy_marginals(&other).dot(&w) <= value + 1e-9);
            }
        }
    }

    #[test]
    fn positive_scaling_keeps_the_action_table() {
        let mdp = build_grid(5).unwrap();
        let w: Vec<f64> = (0..mdp.ground_size())
            .map(|e| ((e * 7) % 5) as f64 * 0.3)
            .collect();
        let (base, _) = solve_linear(&mdp, &w);
        for c in [0.25, 2.0, 8.0, 1024.0] {
            let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
            assert_eq!(solve_linear(&mdp, &scaled).0, base);
        }
    }

    #[test]
    fn brute_force_refuses_stochastic_models() {
        let spec = RandomMdpSpec {
            stochastic: true,
            ..RandomMdpSpec::default()
        };
        let mdp = (0..50)
            .map(|s| random_mdp(&spec, s).unwrap())
            .find(|m| !m.is_deterministic())
            .unwrap();
        let obj = AdditiveObjective::new(vec![1.0; mdp.ground_size()]).unwrap();
        assert!(matches!(
            brute_force_plan(&mdp, &obj),
            Err(Error::StochasticTransitions)
        ));
    }

    #[test]
    fn brute_force_refuses_huge_grids() {
        let mdp = build_grid(14).unwrap();
        let obj = AdditiveObjective::new(vec![1.0; mdp.ground_size()]).unwrap();
        let err = brute_force_plan(&mdp, &obj).unwrap_err();
        assert!(err.to_string().contains("enumeration infeasible"), "{err}");
    }
}
