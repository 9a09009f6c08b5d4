//! Per-step baselines on deterministic MDPs, optionally over `Aug_l`: the
//! action-augmented model in which one decision fixes `l` consecutive
//! primitive actions.
//!
//! The DP baseline scores a block `B` of pairs by `f(B)` alone, which for a
//! log-determinant objective is `ln det(Σ_{e∈B} r(e) + λI)`. Greedy scores
//! it by `f(visited ∪ B)`. When fewer than `l` acting levels remain, the
//! last block is shorter. Both report `f` of the realized trajectory.

use crate::mdp::{DeterministicPolicy, LeveledMdp};
use crate::objective::{self, Family, Objective};
use crate::{Error, Result};

/// Every feasible tuple of up to `l` primitive actions from `s`, in
/// lexicographic order of action indices. A tuple stops early where the
/// episode ends.
pub fn macro_actions(mdp: &LeveledMdp, s: usize, l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    extend(mdp, s, l, &mut cur, &mut out);
    out
}

fn extend(
    mdp: &LeveledMdp,
    s: usize,
    left: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if left == 0 || !mdp.is_acting(s) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        return;
    }
    for a in 0..mdp.actions(s).len() {
        cur.push(a);
        extend(mdp, mdp.next_state(s, a), left - 1, cur, out);
        cur.pop();
    }
}

/// Pairs visited by `tuple` from `s` and the state it ends in.
fn apply(mdp: &LeveledMdp, mut s: usize, tuple: &[usize]) -> (Vec<usize>, usize) {
    let mut pairs = Vec::with_capacity(tuple.len());
    for &a in tuple {
        pairs.push(mdp.pair_index(s, a));
        s = mdp.next_state(s, a);
    }
    (pairs, s)
}

fn check(mdp: &LeveledMdp, l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::Config("augmentation level must be >= 1".into()));
    }
    if !mdp.is_deterministic() {
        return Err(Error::InvalidMdp(
            "baselines require deterministic transitions".into(),
        ));
    }
    Ok(())
}

/// Exact DP over `Aug_l` with block rewards `f(block)`. Returns the policy
/// realizing the optimal macro sequence from the initial state (other states
/// play action 0) and the true value of its trajectory.
pub fn dp_baseline<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    l: usize,
) -> Result<(DeterministicPolicy, f64)> {
    check(mdp, l)?;
    if !matches!(obj.family(), Family::LogDet | Family::Additive) {
        return Err(Error::UnsupportedObjective);
    }
    let mut value = vec![0.0; mdp.num_states()];
    let mut choice: Vec<Option<Vec<usize>>> = vec![None; mdp.num_states()];
    // decision levels are 1, 1 + l, 1 + 2l, ...; solve them last to first
    let decision_levels: Vec<usize> = (1..=mdp.levels()).step_by(l).collect();
    for &level in decision_levels.iter().rev() {
        for &s in mdp.level_states(level) {
            if !mdp.is_acting(s) {
                continue;
            }
            let mut best: Option<(Vec<usize>, f64)> = None;
            for tuple in macro_actions(mdp, s, l) {
                let (pairs, end) = apply(mdp, s, &tuple);
                let q = obj.evaluate_indices(&pairs)? + value[end];
                if best.as_ref().is_none_or(|(_, b)| q > *b) {
                    best = Some((tuple, q));
                }
            }
            if let Some((tuple, q)) = best {
                value[s] = q;
                choice[s] = Some(tuple);
            }
        }
    }
    let mut policy = DeterministicPolicy::lowest(mdp);
    let mut s = mdp.initial();
    while let Some(tuple) = choice[s].as_ref() {
        for &a in tuple {
            policy.set(s, a);
            s = mdp.next_state(s, a);
        }
    }
    let v = objective::policy_value(mdp, obj, &policy)?;
    Ok((policy, v))
}

/// Greedy over `Aug_l`: at each decision pick the tuple maximizing
/// `f(visited ∪ block)`, lexicographically smallest on ties. Accepts any
/// objective.
pub fn greedy_baseline<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    l: usize,
) -> Result<(DeterministicPolicy, f64)> {
    check(mdp, l)?;
    let mut policy = DeterministicPolicy::lowest(mdp);
    let mut visited = Vec::new();
    let mut s = mdp.initial();
    while mdp.is_acting(s) {
        let mut best: Option<(Vec<usize>, Vec<usize>, usize, f64)> = None;
        for tuple in macro_actions(mdp, s, l) {
            let (pairs, end) = apply(mdp, s, &tuple);
            let mut items = visited.clone();
            items.extend_from_slice(&pairs);
            let q = obj.evaluate_indices(&items)?;
            if best.as_ref().is_none_or(|b| q > b.3) {
                best = Some((tuple, pairs, end, q));
            }
        }
        let (tuple, pairs, end, _) = best.expect("acting state has an action");
        let mut t = s;
        for &a in &tuple {
            policy.set(t, a);
            t = mdp.next_state(t, a);
        }
        visited.extend(pairs);
        s = end;
    }
    let v = objective::policy_value(mdp, obj, &policy)?;
    Ok((policy, v))
}
