use rand::Rng;

use crate::mdp::{LeveledMdp, MdpBuilder};
use crate::objective::CoverageObjective;
use crate::rng;
use crate::{Error, Result};

/// Choosing `k` of `n` items as a `k`-level MDP: one state per level, action
/// `a` at any level picks item `a`, and a non-acting closing state follows
/// the last choice.
pub fn build_cardinality(n: usize, k: usize) -> Result<LeveledMdp> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::Config(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    let mut b = MdpBuilder::new(k + 1);
    let ids: Vec<usize> = (1..=k + 1)
        .map(|h| b.state(format!("s{h}"), h, h <= k))
        .collect();
    for h in 0..k {
        for a in 1..=n {
            b.action(ids[h], a.to_string(), vec![(ids[h + 1], 1.0)]);
        }
    }
    b.initial(ids[0]);
    b.build()
}

/// Lift an item-level coverage function to the pairs of
/// [`build_cardinality`]: pair `(s_h, a)` covers what item `a` covers.
pub fn cardinality_objective(
    mdp: &LeveledMdp,
    item_covers: &[Vec<usize>],
    weights: Vec<f64>,
) -> Result<CoverageObjective> {
    let covers = (0..mdp.ground_size())
        .map(|e| {
            let (_, a) = mdp.pair(e);
            item_covers
                .get(a)
                .cloned()
                .ok_or_else(|| Error::InvalidObjective(format!("no cover set for item {}", a + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    CoverageObjective::new(covers, weights)
}

/// `n` random cover sets over a universe of `universe` items, each item
/// included with probability `density`; universe weights uniform on
/// `[0.5, 1.5)`.
pub fn random_coverage_items(
    n: usize,
    universe: usize,
    density: f64,
    seed: u64,
) -> (Vec<Vec<usize>>, Vec<f64>) {
    let mut rng = rng::stream(&[0xc0de, seed]);
    let covers = (0..n)
        .map(|_| (0..universe).filter(|_| rng.random_bool(density)).collect())
        .collect();
    let weights = (0..universe).map(|_| rng.random_range(0.5..1.5)).collect();
    (covers, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;

    #[test]
    fn structure() {
        let mdp = build_cardinality(5, 3).unwrap();
        assert!(mdp.validate().is_empty());
        assert_eq!(mdp.ground_size(), 15);
        assert_eq!(mdp.acting_levels(), 3);
        assert_eq!(mdp.count_paths(), 125);
    }

    #[test]
    fn lifted_objective_sees_items() {
        let mdp = build_cardinality(3, 2).unwrap();
        let obj =
            cardinality_objective(&mdp, &[vec![0], vec![0, 1], vec![1]], vec![1.0, 1.0]).unwrap();
        // pick item 1 twice: value is that of {item 1}
        let e1 = mdp.pair_index(mdp.state_by_name("s1").unwrap(), 0);
        let e2 = mdp.pair_index(mdp.state_by_name("s2").unwrap(), 0);
        assert_eq!(obj.evaluate_indices(&[e1, e2]).unwrap(), 1.0);
        let e3 = mdp.pair_index(mdp.state_by_name("s2").unwrap(), 1);
        assert_eq!(obj.evaluate_indices(&[e1, e3]).unwrap(), 2.0);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_cardinality(3, 4).is_err());
        assert!(build_cardinality(3, 0).is_err());
    }
}
