use crate::mdp::{LeveledMdp, MdpBuilder};
use crate::{Error, Result};

/// The `n × n` right/down grid from `(1,1)` to `(n,n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
}

pub fn grid_state_name(i: usize, j: usize) -> String {
    format!("({i},{j})")
}

/// 1-based `(row, column)` of a grid state name such as `(3,7)`.
pub fn cell_of(name: &str) -> Option<(usize, usize)> {
    let inner = name.strip_prefix('(')?.strip_suffix(')')?;
    let (i, j) = inner.split_once(',')?;
    Some((i.parse().ok()?, j.parse().ok()?))
}

/// Cell `(i, j)` sits on level `i + j − 1`; `R` moves to column `j + 1`, `D`
/// to row `i + 1`. The goal `(n,n)` is non-acting, so every episode visits
/// `2n − 2` pairs.
pub fn build_grid(n: usize) -> Result<LeveledMdp> {
    build_masked_grid(n, (1, 1), |_, _| true)
}

/// Grid restricted to cells where `keep(i, j)` holds, started from `start`.
/// Callers guarantee the kept cells are forward- and backward-reachable.
pub(crate) fn build_masked_grid(
    n: usize,
    start: (usize, usize),
    keep: impl Fn(usize, usize) -> bool,
) -> Result<LeveledMdp> {
    if n < 2 {
        return Err(Error::Config(format!("grid side must be >= 2, got {n}")));
    }
    let level = |i: usize, j: usize| (i - start.0) + (j - start.1) + 1;
    let levels = level(n, n);
    let mut b = MdpBuilder::new(levels);
    let mut ids = vec![vec![None; n + 1]; n + 1];
    for i in start.0..=n {
        for j in start.1..=n {
            if keep(i, j) {
                let acting = (i, j) != (n, n);
                ids[i][j] = Some(b.state(grid_state_name(i, j), level(i, j), acting));
            }
        }
    }
    for i in start.0..=n {
        for j in start.1..=n {
            let Some(s) = ids[i][j] else { continue };
            if (i, j) == (n, n) {
                continue;
            }
            if j < n {
                if let Some(t) = ids[i][j + 1] {
                    b.action(s, "R", vec![(t, 1.0)]);
                }
            }
            if i < n {
                if let Some(t) = ids[i + 1][j] {
                    b.action(s, "D", vec![(t, 1.0)]);
                }
            }
        }
    }
    let init = ids[start.0][start.1].ok_or(Error::GoalUnreachable)?;
    b.initial(init);
    b.build()
}
