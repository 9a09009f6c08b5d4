use rand::Rng;

use crate::mdp::{DeterministicPolicy, LeveledMdp, MdpBuilder};
use crate::objective::CoverageObjective;
use crate::rng;
use crate::Result;

/// Shape of a random leveled MDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMdpSpec {
    /// Number of acting levels; one non-acting level follows.
    pub acting_levels: usize,
    pub max_states_per_level: usize,
    pub max_actions: usize,
    /// Draw transition distributions with up to three successors.
    pub stochastic: bool,
}

impl Default for RandomMdpSpec {
    fn default() -> Self {
        RandomMdpSpec {
            acting_levels: 4,
            max_states_per_level: 3,
            max_actions: 3,
            stochastic: false,
        }
    }
}

/// A single initial state, then levels with `1..=max_states_per_level`
/// states. Each acting state gets `1..=max_actions` actions.
pub fn random_mdp(spec: &RandomMdpSpec, seed: u64) -> Result<LeveledMdp> {
    let mut rng = rng::stream(&[0x4d4450, seed]);
    let levels = spec.acting_levels + 1;
    let mut b = MdpBuilder::new(levels);
    let mut by_level: Vec<Vec<usize>> = Vec::with_capacity(levels);
    for h in 1..=levels {
        let count = if h == 1 {
            1
        } else {
            rng.random_range(1..=spec.max_states_per_level.max(1))
        };
        let acting = h < levels;
        by_level.push(
            (0..count)
                .map(|k| b.state(format!("h{h}s{k}"), h, acting))
                .collect(),
        );
    }
    for h in 0..spec.acting_levels {
        for &s in &by_level[h] {
            let next = &by_level[h + 1];
            let actions = rng.random_range(1..=spec.max_actions.max(1));
            for a in 0..actions {
                let outcomes = if spec.stochastic && next.len() > 1 {
                    let support = rng.random_range(1..=next.len().min(3));
                    let picks = rand::seq::index::sample(&mut rng, next.len(), support);
                    let raw: Vec<f64> = (0..support).map(|_| rng.random_range(0.1..1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    let mut out: Vec<(usize, f64)> = picks
                        .into_iter()
                        .zip(&raw)
                        .map(|(k, w)| (next[k], w / total))
                        .collect();
                    // fold rounding error into the last outcome
                    let sum: f64 = out.iter().map(|(_, p)| p).sum();
                    if let Some(last) = out.last_mut() {
                        last.1 += 1.0 - sum;
                    }
                    out
                } else {
                    vec![(next[rng.random_range(0..next.len())], 1.0)]
                };
                b.action(s, format!("a{a}"), outcomes);
            }
        }
    }
    b.initial(by_level[0][0]);
    b.build()
}

/// Uniformly random legal action at every acting state.
pub fn random_deterministic_policy(mdp: &LeveledMdp, seed: u64) -> DeterministicPolicy {
    let mut rng = rng::stream(&[0x706f6c, seed]);
    DeterministicPolicy::from_fn(mdp, |s| rng.random_range(0..mdp.actions(s).len()))
}

/// Random weighted coverage over `m` elements.
pub fn random_coverage(m: usize, universe: usize, density: f64, seed: u64) -> CoverageObjective {
    let (covers, weights) = super::random_coverage_items(m, universe, density, seed);
    CoverageObjective::new(covers, weights).expect("generated coverage is valid")
}
