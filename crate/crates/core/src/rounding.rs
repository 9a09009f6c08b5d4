//! Turning a mixture (or its marginal vector) into one deterministic policy.
//!
//! [`round_high`] keeps the best mixture member. [`round_sub`] works on the
//! marginals of a deterministic MDP, read as a unit flow on the level DAG:
//! it repeatedly finds two sub-trajectories that split at a fractional state
//! and meet again (or both run to the last level), then moves mass from one
//! onto the other until a pair on the donor side hits zero. Of the two
//! possible directions the one with the larger multilinear value wins.

use std::collections::HashMap;

use crate::mdp::{DeterministicPolicy, LeveledMdp, MarginalVector, MixturePolicy};
use crate::multilinear::{self, EXACT_LIMIT};
use crate::objective::{self, Objective};
use crate::rng;
use crate::{Error, Result};

/// Flows below this count as zero.
pub const FLOW_ZERO: f64 = 1e-12;
/// Tolerance of [`check_flow`].
pub const FLOW_TOL: f64 = 1e-9;

/// The member with the highest objective, earliest on ties, together with
/// its index and score.
///
/// Deterministic MDPs score each member exactly on its trajectory. Otherwise
/// a member's score is the mean of `eval_samples` rollouts.
pub fn round_high_scored<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    mixture: &MixturePolicy,
    eval_samples: usize,
    seed: u64,
) -> Result<(DeterministicPolicy, usize, f64)> {
    let mut seen: HashMap<&DeterministicPolicy, f64> = HashMap::new();
    let mut best: Option<(usize, f64)> = None;
    for (i, member) in mixture.members().iter().enumerate() {
        let score = match seen.get(member) {
            Some(&v) => v,
            None => {
                let v = if mdp.is_deterministic() {
                    objective::policy_value(mdp, obj, member)?
                } else {
                    rollout_mean(
                        mdp,
                        obj,
                        member,
                        eval_samples,
                        rng::derive(&[seed, i as u64]),
                    )?
                };
                seen.insert(member, v);
                v
            }
        };
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    let (i, score) = best.expect("mixture is nonempty");
    Ok((mixture.members()[i].clone(), i, score))
}

/// [`round_high_scored`] without the bookkeeping.
pub fn round_high<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    mixture: &MixturePolicy,
    eval_samples: usize,
    seed: u64,
) -> Result<DeterministicPolicy> {
    Ok(round_high_scored(mdp, obj, mixture, eval_samples, seed)?.0)
}

fn rollout_mean<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    policy: &DeterministicPolicy,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Config(
            "eval_samples must be >= 1 on stochastic models".into(),
        ));
    }
    let mut total = 0.0;
    for k in 0..samples {
        let traj = mdp.sample_trajectory(policy, rng::derive(&[seed, k as u64]))?;
        total += obj.evaluate_indices(&traj.pairs(mdp))?;
    }
    Ok(total / samples as f64)
}

/// Check that `y` is a unit flow: entries in `[0, 1]` and, at every acting
/// state, outflow equal to inflow (1 at the initial state).
pub fn check_flow(mdp: &LeveledMdp, y: &MarginalVector) -> Result<()> {
    if !mdp.is_deterministic() {
        return Err(Error::StochasticTransitions);
    }
    if y.len() != mdp.ground_size() {
        return Err(Error::InvalidFlow(format!(
            "length {} but the ground set has {} pairs",
            y.len(),
            mdp.ground_size()
        )));
    }
    for (e, &v) in y.as_slice().iter().enumerate() {
        if !(-FLOW_TOL..=1.0 + FLOW_TOL).contains(&v) {
            return Err(Error::InvalidFlow(format!(
                "{} = {v} outside [0, 1]",
                mdp.pair_label(e)
            )));
        }
    }
    let inflow = inflows(mdp, y);
    for s in 0..mdp.num_states() {
        if !mdp.is_acting(s) {
            continue;
        }
        let out: f64 = (0..mdp.actions(s).len())
            .map(|a| y.get(mdp.pair_index(s, a)))
            .sum();
        if (out - inflow[s]).abs() > FLOW_TOL {
            return Err(Error::InvalidFlow(format!(
                "state {} has inflow {} but outflow {out}",
                mdp.state(s).name,
                inflow[s]
            )));
        }
    }
    Ok(())
}

fn inflows(mdp: &LeveledMdp, y: &MarginalVector) -> Vec<f64> {
    let mut inflow = vec![0.0; mdp.num_states()];
    inflow[mdp.initial()] = 1.0;
    for e in 0..mdp.ground_size() {
        let (s, a) = mdp.pair(e);
        inflow[mdp.next_state(s, a)] += y.get(e);
    }
    inflow
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubOptions {
    /// Monte-Carlo samples per direction when exact evaluation is too big.
    pub samples: usize,
    pub seed: u64,
    /// Exact `F` is used while a candidate has at most this many fractional
    /// coordinates.
    pub exact_limit: usize,
    /// Keep a copy of the flow after every shift.
    pub record_flows: bool,
}

impl Default for SubOptions {
    fn default() -> Self {
        SubOptions {
            samples: 100,
            seed: 0,
            exact_limit: EXACT_LIMIT,
            record_flows: false,
        }
    }
}

/// One mass shift.
#[derive(Debug, Clone, PartialEq)]
pub struct Shift {
    /// Where the two sub-trajectories split.
    pub split_state: usize,
    /// Ground indices of the two branches.
    pub branches: [Vec<usize>; 2],
    /// `values[i]` scores the direction in which branch `i` receives.
    pub values: [f64; 2],
    /// Index of the receiving branch that was kept.
    pub receiver: usize,
    pub epsilon: f64,
    /// Whether `values` are exact.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubRounding {
    pub policy: DeterministicPolicy,
    pub shifts: Vec<Shift>,
    /// Flow after each shift, first entry the input; empty unless
    /// `record_flows` was set.
    pub flows: Vec<MarginalVector>,
}

/// Sub-trajectory rounding with default options apart from the sample
/// budget and seed.
pub fn round_sub<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    y: &MarginalVector,
    round_samples: usize,
    seed: u64,
) -> Result<DeterministicPolicy> {
    let opts = SubOptions {
        samples: round_samples,
        seed,
        ..SubOptions::default()
    };
    Ok(round_sub_traced(mdp, obj, y, &opts)?.policy)
}

pub fn round_sub_traced<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    y: &MarginalVector,
    opts: &SubOptions,
) -> Result<SubRounding> {
    check_flow(mdp, y)?;
    let mut flow = MarginalVector(y.as_slice().iter().map(|&v| snap(v)).collect());
    let mut shifts = Vec::new();
    let mut flows = Vec::new();
    if opts.record_flows {
        flows.push(flow.clone());
    }
    while let Some(split) = first_fractional(mdp, &flow) {
        let branches = trace_branches(mdp, &flow, split);
        let mut candidates = [flow.clone(), flow.clone()];
        let mut eps = [0.0; 2];
        for receiver in 0..2 {
            let donor = &branches[1 - receiver];
            eps[receiver] = donor
                .iter()
                .map(|&e| flow.get(e))
                .fold(f64::INFINITY, f64::min);
            let cand = &mut candidates[receiver];
            for &e in donor {
                cand.0[e] = snap(cand.0[e] - eps[receiver]);
            }
            for &e in &branches[receiver] {
                cand.0[e] = snap(cand.0[e] + eps[receiver]);
            }
        }
        let step = shifts.len() as u64;
        let (values, exact) = score(obj, &candidates, opts, step)?;
        // ties favour moving mass onto the branch of the larger action
        let receiver = if values[1] > values[0] { 1 } else { 0 };
        let [c0, c1] = candidates;
        flow = if receiver == 0 { c0 } else { c1 };
        if opts.record_flows {
            flows.push(flow.clone());
        }
        shifts.push(Shift {
            split_state: split,
            branches,
            values,
            receiver,
            epsilon: eps[receiver],
            exact,
        });
        if shifts.len() > mdp.ground_size() {
            return Err(Error::InvalidFlow("rounding failed to terminate".into()));
        }
    }
    Ok(SubRounding {
        policy: integral_policy(mdp, &flow),
        shifts,
        flows,
    })
}

fn snap(v: f64) -> f64 {
    if v < FLOW_ZERO {
        0.0
    } else if v > 1.0 - FLOW_ZERO {
        1.0
    } else {
        v
    }
}

fn positive_actions(mdp: &LeveledMdp, flow: &MarginalVector, s: usize) -> Vec<(usize, f64)> {
    (0..mdp.actions(s).len())
        .map(|a| (a, flow.get(mdp.pair_index(s, a))))
        .filter(|&(_, v)| v > FLOW_ZERO)
        .collect()
}

/// Walk from the initial state along the single positive action until a
/// state with two or more positive actions appears.
fn first_fractional(mdp: &LeveledMdp, flow: &MarginalVector) -> Option<usize> {
    let mut s = mdp.initial();
    while mdp.is_acting(s) {
        let acts = positive_actions(mdp, flow, s);
        match acts.len() {
            0 => return None,
            1 => s = mdp.next_state(s, acts[0].0),
            _ => return Some(s),
        }
    }
    None
}

/// Largest positive action at `s`, lowest index on ties.
fn heaviest(mdp: &LeveledMdp, flow: &MarginalVector, s: usize) -> Option<usize> {
    positive_actions(mdp, flow, s)
        .into_iter()
        .fold(None, |best: Option<(usize, f64)>, (a, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((a, v)),
        })
        .map(|(a, _)| a)
}

fn trace_branches(mdp: &LeveledMdp, flow: &MarginalVector, split: usize) -> [Vec<usize>; 2] {
    let mut acts = positive_actions(mdp, flow, split);
    // stable: largest flow first, lower index first among equals
    acts.sort_by(|x, y| y.1.total_cmp(&x.1));
    let starts = [acts[0].0, acts[1].0];
    let mut branches = [
        vec![mdp.pair_index(split, starts[0])],
        vec![mdp.pair_index(split, starts[1])],
    ];
    let mut cur = [
        mdp.next_state(split, starts[0]),
        mdp.next_state(split, starts[1]),
    ];
    while cur[0] != cur[1] && mdp.is_acting(cur[0]) && mdp.is_acting(cur[1]) {
        for i in 0..2 {
            let a = heaviest(mdp, flow, cur[i]).expect("positive inflow has positive outflow");
            branches[i].push(mdp.pair_index(cur[i], a));
            cur[i] = mdp.next_state(cur[i], a);
        }
    }
    branches
}

fn score<O: Objective + ?Sized>(
    obj: &O,
    candidates: &[MarginalVector; 2],
    opts: &SubOptions,
    step: u64,
) -> Result<([f64; 2], bool)> {
    let fractional =
        |y: &MarginalVector| y.as_slice().iter().filter(|&&v| v > 0.0 && v < 1.0).count();
    if candidates.iter().all(|c| fractional(c) <= opts.exact_limit) {
        let (a, b) = rayon::join(
            || multilinear::exact_value_limited(obj, &candidates[0], opts.exact_limit),
            || multilinear::exact_value_limited(obj, &candidates[1], opts.exact_limit),
        );
        return Ok(([a?, b?], true));
    }
    // common random numbers: both directions see the same uniforms
    let seed = rng::derive(&[opts.seed, step]);
    let a = multilinear::estimate_value(obj, &candidates[0], opts.samples, seed)?;
    let b = multilinear::estimate_value(obj, &candidates[1], opts.samples, seed)?;
    Ok(([a, b], false))
}

/// Follow the unit-flow action from the initial state; states off the path
/// play action 0.
fn integral_policy(mdp: &LeveledMdp, flow: &MarginalVector) -> DeterministicPolicy {
    let mut policy = DeterministicPolicy::lowest(mdp);
    let mut s = mdp.initial();
    while mdp.is_acting(s) {
        let a = heaviest(mdp, flow, s).unwrap_or(0);
        policy.set(s, a);
        s = mdp.next_state(s, a);
    }
    policy
}
