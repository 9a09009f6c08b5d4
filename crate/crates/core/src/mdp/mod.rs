//! Leveled tabular MDPs.
//!
//! States are partitioned into levels `1..=H` and every transition moves
//! exactly one level deeper. Acting states expose an ordered list of legal
//! actions; non-acting states close the episode and only live on the last
//! level. The ground set of the objective is the dense enumeration of all
//! legal (acting state, action) pairs.

mod format;

use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::rng;
use crate::{Error, Result};

pub use format::{parse_mdp, read_mdp, write_mdp};

/// Probability mass below this is treated as absent when checking supports.
const PROB_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub name: String,
    pub level: usize,
    pub acting: bool,
}

/// A legal action together with its successor distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub label: String,
    pub outcomes: Vec<(usize, f64)>,
}

/// Incrementally assembles a [`LeveledMdp`].
///
/// `build` only rejects structurally broken input (dangling state indices,
/// levels outside `1..=H`, duplicate names). Semantic invariants are reported
/// by [`LeveledMdp::validate`].
#[derive(Debug, Clone, Default)]
pub struct MdpBuilder {
    levels: usize,
    states: Vec<State>,
    names: HashMap<String, usize>,
    actions: Vec<Vec<Action>>,
    initial: Option<usize>,
}

impl MdpBuilder {
    pub fn new(levels: usize) -> Self {
        MdpBuilder {
            levels,
            ..Default::default()
        }
    }

    pub fn state(&mut self, name: impl Into<String>, level: usize, acting: bool) -> usize {
        let name = name.into();
        let id = self.states.len();
        self.names.insert(name.clone(), id);
        self.states.push(State {
            name,
            level,
            acting,
        });
        self.actions.push(Vec::new());
        id
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn action(&mut self, state: usize, label: impl Into<String>, outcomes: Vec<(usize, f64)>) {
        self.actions[state].push(Action {
            label: label.into(),
            outcomes,
        });
    }

    pub fn initial(&mut self, state: usize) {
        self.initial = Some(state);
    }

    pub fn build(self) -> Result<LeveledMdp> {
        let MdpBuilder {
            levels,
            states,
            names,
            actions,
            initial,
        } = self;
        if levels == 0 {
            return Err(Error::InvalidMdp("at least one level is required".into()));
        }
        if states.is_empty() {
            return Err(Error::InvalidMdp("no states".into()));
        }
        if names.len() != states.len() {
            return Err(Error::InvalidMdp("duplicate state names".into()));
        }
        for s in &states {
            if s.level == 0 || s.level > levels {
                return Err(Error::InvalidMdp(format!(
                    "state {} has level {} outside 1..={levels}",
                    s.name, s.level
                )));
            }
        }
        for (s, acts) in actions.iter().enumerate() {
            for a in acts {
                if let Some(&(t, _)) = a.outcomes.iter().find(|(t, _)| *t >= states.len()) {
                    return Err(Error::InvalidMdp(format!(
                        "action {} at {} targets unknown state index {t}",
                        a.label, states[s].name
                    )));
                }
            }
        }
        let initial = match initial {
            Some(i) if i < states.len() => i,
            Some(i) => return Err(Error::InvalidMdp(format!("unknown initial state {i}"))),
            None => states
                .iter()
                .position(|s| s.level == 1)
                .ok_or_else(|| Error::InvalidMdp("no state at level 1".into()))?,
        };

        let mut pair_offset = vec![0; states.len()];
        let mut pairs = Vec::new();
        for (s, st) in states.iter().enumerate() {
            pair_offset[s] = pairs.len();
            if st.acting {
                pairs.extend((0..actions[s].len()).map(|a| (s, a)));
            }
        }
        let mut by_level = vec![Vec::new(); levels];
        for (s, st) in states.iter().enumerate() {
            by_level[st.level - 1].push(s);
        }
        let deterministic = actions
            .iter()
            .flatten()
            .all(|a| a.outcomes.iter().filter(|(_, p)| *p > PROB_EPS).count() == 1);

        Ok(LeveledMdp {
            levels,
            states,
            names,
            actions,
            initial,
            pair_offset,
            pairs,
            by_level,
            deterministic,
        })
    }
}

/// A finite-horizon MDP with disjoint state levels and a fixed initial state.
#[derive(Debug, Clone)]
pub struct LeveledMdp {
    levels: usize,
    states: Vec<State>,
    names: HashMap<String, usize>,
    actions: Vec<Vec<Action>>,
    initial: usize,
    pair_offset: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    by_level: Vec<Vec<usize>>,
    deterministic: bool,
}

impl LeveledMdp {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, s: usize) -> &State {
        &self.states[s]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state_by_name(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn actions(&self, s: usize) -> &[Action] {
        &self.actions[s]
    }

    pub fn is_acting(&self, s: usize) -> bool {
        self.states[s].acting
    }

    /// States on `level` (1-based).
    pub fn level_states(&self, level: usize) -> &[usize] {
        &self.by_level[level - 1]
    }

    /// True iff every transition distribution is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// Number of levels that contain at least one acting state.
    pub fn acting_levels(&self) -> usize {
        self.by_level
            .iter()
            .filter(|l| l.iter().any(|&s| self.states[s].acting))
            .count()
    }

    /// Size of the ground set (number of legal state-action pairs).
    pub fn ground_size(&self) -> usize {
        self.pairs.len()
    }

    /// Ground-set index of `(state, action index)`.
    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        debug_assert!(self.states[s].acting && a < self.actions[s].len());
        self.pair_offset[s] + a
    }

    /// Inverse of [`pair_index`](Self::pair_index).
    pub fn pair(&self, e: usize) -> (usize, usize) {
        self.pairs[e]
    }

    pub fn pair_label(&self, e: usize) -> String {
        let (s, a) = self.pairs[e];
        format!("{}{}", self.states[s].name, self.actions[s][a].label)
    }

    /// Successor of a deterministic transition.
    pub fn next_state(&self, s: usize, a: usize) -> usize {
        let outcomes = &self.actions[s][a].outcomes;
        outcomes
            .iter()
            .copied()
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(t, _)| t)
            .expect("action without outcomes")
    }

    /// Check every model invariant. An empty report means the MDP is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let init = &self.states[self.initial];
        if init.level != 1 {
            out.push(Violation::new(
                Some(init),
                ViolationKind::InitialNotFirstLevel,
            ));
        }
        for (s, st) in self.states.iter().enumerate() {
            let acts = &self.actions[s];
            if !st.acting {
                if st.level != self.levels {
                    out.push(Violation::new(
                        Some(st),
                        ViolationKind::TerminalBeforeLastLevel,
                    ));
                }
                if !acts.is_empty() {
                    out.push(Violation::new(Some(st), ViolationKind::TerminalWithActions));
                }
                continue;
            }
            if acts.is_empty() {
                out.push(Violation::new(Some(st), ViolationKind::NoActions));
            }
            let mut seen = std::collections::HashSet::new();
            for a in acts {
                if !seen.insert(a.label.as_str()) {
                    out.push(Violation::new(
                        Some(st),
                        ViolationKind::DuplicateAction(a.label.clone()),
                    ));
                }
                if a.outcomes.is_empty() {
                    out.push(Violation::new(
                        Some(st),
                        ViolationKind::NoOutcomes(a.label.clone()),
                    ));
                    continue;
                }
                let mut total = 0.0;
                for &(t, p) in &a.outcomes {
                    if !(p >= 0.0) || !p.is_finite() {
                        out.push(Violation::new(
                            Some(st),
                            ViolationKind::BadProbability(a.label.clone()),
                        ));
                    }
                    total += p;
                    if self.states[t].level != st.level + 1 {
                        out.push(Violation::new(
                            Some(st),
                            ViolationKind::LevelSkip {
                                action: a.label.clone(),
                                target: self.states[t].name.clone(),
                            },
                        ));
                    }
                }
                if (total - 1.0).abs() > 1e-12 {
                    out.push(Violation::new(
                        Some(st),
                        ViolationKind::NotNormalized {
                            action: a.label.clone(),
                            total,
                        },
                    ));
                }
            }
        }
        out
    }

    /// `Ok(())` if [`validate`](Self::validate) reports nothing.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = report.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidMdp(msgs.join("; ")))
        }
    }

    /// The episode produced by `policy` on a deterministic MDP.
    pub fn follow(&self, policy: &DeterministicPolicy) -> Result<Trajectory> {
        let mut steps = Vec::new();
        let mut s = self.initial;
        while self.states[s].acting {
            let a = policy
                .action(s)
                .ok_or_else(|| Error::IncompletePolicy(self.states[s].name.clone()))?;
            steps.push((s, a));
            s = self.next_state(s, a);
        }
        Ok(Trajectory {
            steps,
            final_state: s,
        })
    }

    /// Sample an episode. A mixture first draws one member uniformly and then
    /// follows it for the whole episode.
    pub fn sample_trajectory<P: Policy + ?Sized>(
        &self,
        policy: &P,
        seed: u64,
    ) -> Result<Trajectory> {
        let mut rng = rng::stream(&[seed]);
        self.sample_trajectory_with(policy, &mut rng)
    }

    pub fn sample_trajectory_with<P: Policy + ?Sized, R: Rng + ?Sized>(
        &self,
        policy: &P,
        rng: &mut R,
    ) -> Result<Trajectory> {
        let member = policy.draw(rng);
        let mut steps = Vec::new();
        let mut s = self.initial;
        while self.states[s].acting {
            let a = member
                .action(s)
                .ok_or_else(|| Error::IncompletePolicy(self.states[s].name.clone()))?;
            steps.push((s, a));
            s = sample_outcome(&self.actions[s][a].outcomes, rng);
        }
        Ok(Trajectory {
            steps,
            final_state: s,
        })
    }

    /// Exact per-pair visit probabilities of a deterministic policy, by a
    /// forward pass over state occupancies.
    pub fn policy_marginals(&self, policy: &DeterministicPolicy) -> MarginalVector {
        let mut occ = vec![0.0; self.states.len()];
        occ[self.initial] = 1.0;
        let mut x = MarginalVector::zeros(self.ground_size());
        for level in &self.by_level {
            for &s in level {
                if occ[s] == 0.0 || !self.states[s].acting {
                    continue;
                }
                let Some(a) = policy.action(s) else { continue };
                x.0[self.pair_index(s, a)] = occ[s];
                for &(t, p) in &self.actions[s][a].outcomes {
                    occ[t] += occ[s] * p;
                }
            }
        }
        x
    }

    /// Uniform average of the members' marginals.
    pub fn mixture_marginals(&self, mixture: &MixturePolicy) -> MarginalVector {
        let mut x = MarginalVector::zeros(self.ground_size());
        let w = 1.0 / mixture.len() as f64;
        for member in mixture.members() {
            x.add_scaled(w, &self.policy_marginals(member));
        }
        x
    }

    /// Number of root-to-terminal paths, saturating at `u64::MAX`.
    pub fn count_paths(&self) -> u64 {
        let mut paths = vec![0u64; self.states.len()];
        for level in self.by_level.iter().rev() {
            for &s in level {
                paths[s] = if self.states[s].acting {
                    self.actions[s]
                        .iter()
                        .flat_map(|a| a.outcomes.iter())
                        .filter(|(_, p)| *p > PROB_EPS)
                        .fold(0u64, |acc, &(t, _)| acc.saturating_add(paths[t]))
                } else {
                    1
                };
            }
        }
        paths[self.initial]
    }
}

fn sample_outcome<R: Rng + ?Sized>(outcomes: &[(usize, f64)], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(t, p) in outcomes {
        acc += p;
        if u < acc {
            return t;
        }
    }
    // Rounding left a sliver above the cumulative sum; take the last
    // outcome with positive mass.
    outcomes
        .iter()
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(t, _)| *t)
        .unwrap_or(outcomes[0].0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    InitialNotFirstLevel,
    TerminalBeforeLastLevel,
    TerminalWithActions,
    NoActions,
    NoOutcomes(String),
    DuplicateAction(String),
    BadProbability(String),
    LevelSkip { action: String, target: String },
    NotNormalized { action: String, total: f64 },
}

/// One broken invariant, located by state and level.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub state: Option<String>,
    pub level: Option<usize>,
    pub kind: ViolationKind,
}

impl Violation {
    fn new(state: Option<&State>, kind: ViolationKind) -> Self {
        Violation {
            state: state.map(|s| s.name.clone()),
            level: state.map(|s| s.level),
            kind,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(s), Some(l)) = (&self.state, self.level) {
            write!(f, "state {s} (level {l}): ")?;
        }
        match &self.kind {
            ViolationKind::InitialNotFirstLevel => write!(f, "initial state not at level 1"),
            ViolationKind::TerminalBeforeLastLevel => {
                write!(f, "non-acting state before the last level")
            }
            ViolationKind::TerminalWithActions => write!(f, "non-acting state has actions"),
            ViolationKind::NoActions => write!(f, "acting state has no legal action"),
            ViolationKind::NoOutcomes(a) => write!(f, "action {a} has no outcomes"),
            ViolationKind::DuplicateAction(a) => write!(f, "duplicate action {a}"),
            ViolationKind::BadProbability(a) => write!(f, "action {a} has an invalid probability"),
            ViolationKind::LevelSkip { action, target } => {
                write!(f, "transition not level+1 ({action} -> {target})")
            }
            ViolationKind::NotNormalized { action, total } => {
                write!(f, "distribution not normalized ({action} sums to {total})")
            }
        }
    }
}

/// One legal action index per acting state. `None` marks a state the policy
/// does not define.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicPolicy {
    choice: Vec<Option<usize>>,
}

impl DeterministicPolicy {
    /// The policy that plays action index 0 at every acting state.
    pub fn lowest(mdp: &LeveledMdp) -> Self {
        Self::from_fn(mdp, |_| 0)
    }

    pub fn from_fn(mdp: &LeveledMdp, mut f: impl FnMut(usize) -> usize) -> Self {
        let choice = (0..mdp.num_states())
            .map(|s| mdp.is_acting(s).then(|| f(s)))
            .collect();
        DeterministicPolicy { choice }
    }

    /// A policy with no choices made yet.
    pub fn empty(mdp: &LeveledMdp) -> Self {
        DeterministicPolicy {
            choice: vec![None; mdp.num_states()],
        }
    }

    /// Pick actions by label; unlisted acting states play action 0.
    pub fn from_labels(mdp: &LeveledMdp, labels: &[(usize, &str)]) -> Result<Self> {
        let mut p = Self::lowest(mdp);
        for &(s, label) in labels {
            let a = mdp
                .actions(s)
                .iter()
                .position(|a| a.label == label)
                .ok_or_else(|| {
                    Error::InvalidMdp(format!("no action {label} at {}", mdp.state(s).name))
                })?;
            p.set(s, a);
        }
        Ok(p)
    }

    pub fn action(&self, s: usize) -> Option<usize> {
        self.choice.get(s).copied().flatten()
    }

    pub fn set(&mut self, s: usize, a: usize) {
        self.choice[s] = Some(a);
    }

    pub fn unset(&mut self, s: usize) {
        self.choice[s] = None;
    }

    /// True iff the policy picks a legal action at every acting state.
    pub fn is_total(&self, mdp: &LeveledMdp) -> bool {
        (0..mdp.num_states()).all(|s| {
            !mdp.is_acting(s) || matches!(self.action(s), Some(a) if a < mdp.actions(s).len())
        })
    }
}

/// Uniform mixture over deterministic policies: one member is drawn at the
/// start of an episode and followed throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePolicy {
    members: Vec<DeterministicPolicy>,
}

impl MixturePolicy {
    pub fn new(members: Vec<DeterministicPolicy>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config(
                "mixture policy needs at least one member".into(),
            ));
        }
        Ok(MixturePolicy { members })
    }

    pub fn members(&self) -> &[DeterministicPolicy] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Anything that hands out a deterministic policy for an episode.
pub trait Policy {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &DeterministicPolicy;
}

impl Policy for DeterministicPolicy {
    fn draw<R: Rng + ?Sized>(&self, _rng: &mut R) -> &DeterministicPolicy {
        self
    }
}

impl Policy for MixturePolicy {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &DeterministicPolicy {
        &self.members[rng.random_range(0..self.members.len())]
    }
}

/// The (state, action index) pairs of one episode plus the state it ends in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    pub steps: Vec<(usize, usize)>,
    pub final_state: usize,
}

impl Trajectory {
    /// Ground indices of the visited pairs, in visiting order.
    pub fn pairs(&self, mdp: &LeveledMdp) -> Vec<usize> {
        self.steps
            .iter()
            .map(|&(s, a)| mdp.pair_index(s, a))
            .collect()
    }

    /// Visited states including the final one.
    pub fn states(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.steps.iter().map(|&(s, _)| s).collect();
        v.push(self.final_state);
        v
    }
}

/// A point in `[0,1]^m` over the ground set: per-pair visit probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalVector(pub Vec<f64>);

impl MarginalVector {
    pub fn zeros(m: usize) -> Self {
        MarginalVector(vec![0.0; m])
    }

    /// 0/1 vector of the given support.
    pub fn indicator(m: usize, support: &[usize]) -> Self {
        let mut x = Self::zeros(m);
        for &e in support {
            x.0[e] = 1.0;
        }
        x
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, e: usize) -> f64 {
        self.0[e]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    pub fn add_scaled(&mut self, c: f64, other: &MarginalVector) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &MarginalVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
