use std::collections::HashSet;
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use super::grid::{build_masked_grid, cell_of};
use crate::mdp::LeveledMdp;
use crate::objective::{LogDetObjective, RewardMatrix};
use crate::rng;
use crate::{Error, Result};

/// 1-based `(row, column)`.
pub type Cell = (usize, usize);

/// An `n × n` occupancy map with cells to explore.
#[derive(Debug, Clone, PartialEq)]
pub struct NavMap {
    pub n: usize,
    navigable: Vec<bool>,
    pub targets: Vec<Cell>,
    pub start: Cell,
    /// Physical side length of a cell; metadata only.
    pub cell_size_cm: f64,
    /// Strict upper bound on the center-to-center distance, in cells.
    pub vision_range: f64,
}

impl NavMap {
    /// Obstacle-free map.
    pub fn open(n: usize) -> Self {
        NavMap {
            n,
            navigable: vec![true; n * n],
            targets: Vec::new(),
            start: (1, 1),
            cell_size_cm: 20.0,
            vision_range: 3.0,
        }
    }

    pub fn in_bounds(&self, (r, c): Cell) -> bool {
        (1..=self.n).contains(&r) && (1..=self.n).contains(&c)
    }

    pub fn is_navigable(&self, (r, c): Cell) -> bool {
        self.in_bounds((r, c)) && self.navigable[(r - 1) * self.n + (c - 1)]
    }

    pub fn set_navigable(&mut self, (r, c): Cell, navigable: bool) {
        self.navigable[(r - 1) * self.n + (c - 1)] = navigable;
    }

    pub fn navigable_cells(&self) -> Vec<Cell> {
        (1..=self.n)
            .flat_map(|r| (1..=self.n).map(move |c| (r, c)))
            .filter(|&cell| self.is_navigable(cell))
            .collect()
    }

    /// Copy of the map with `d` distinct navigable cells drawn as targets,
    /// listed in row-major order as a map file would list them.
    pub fn with_random_targets(&self, d: usize, seed: u64) -> Result<NavMap> {
        let cells = self.navigable_cells();
        if d > cells.len() {
            return Err(Error::Config(format!(
                "{d} targets requested but only {} navigable cells",
                cells.len()
            )));
        }
        let mut rng = rng::stream(&[seed]);
        let mut out = self.clone();
        out.targets = index::sample(&mut rng, cells.len(), d)
            .into_iter()
            .map(|k| cells[k])
            .collect();
        out.targets.sort_unstable();
        Ok(out)
    }

    /// Invariants: start and goal navigable, targets in bounds.
    pub fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("map side must be >= 2".into()));
        }
        if !self.is_navigable(self.start) {
            return Err(Error::Config(format!(
                "start {:?} is not navigable",
                self.start
            )));
        }
        if !self.is_navigable((self.n, self.n)) {
            return Err(Error::Config("goal is not navigable".into()));
        }
        if let Some(t) = self.targets.iter().find(|t| !self.in_bounds(**t)) {
            return Err(Error::Config(format!("target {t:?} out of bounds")));
        }
        Ok(())
    }
}

/// Compare `a/b <= c/d` for positive denominators.
fn frac_le(a: (i64, i64), c: (i64, i64)) -> bool {
    a.0 * c.1 <= c.0 * a.1
}

/// Whether the segment between the centers of `a` and `b` meets the closed
/// square of `cell`. Works in doubled coordinates so everything is integral.
fn segment_meets(a: Cell, b: Cell, cell: Cell) -> bool {
    let p0 = [2 * a.0 as i64 - 1, 2 * a.1 as i64 - 1];
    let p1 = [2 * b.0 as i64 - 1, 2 * b.1 as i64 - 1];
    let lo = [2 * cell.0 as i64 - 2, 2 * cell.1 as i64 - 2];
    let hi = [lo[0] + 2, lo[1] + 2];
    let mut enter = (0i64, 1i64);
    let mut exit = (1i64, 1i64);
    for k in 0..2 {
        let d = p1[k] - p0[k];
        if d == 0 {
            if p0[k] < lo[k] || p0[k] > hi[k] {
                return false;
            }
            continue;
        }
        let (mut t_lo, mut t_hi) = ((lo[k] - p0[k], d), (hi[k] - p0[k], d));
        if d < 0 {
            t_lo = (-t_lo.0, -d);
            t_hi = (-t_hi.0, -d);
            std::mem::swap(&mut t_lo, &mut t_hi);
        }
        if frac_le(enter, t_lo) {
            enter = t_lo;
        }
        if frac_le(t_hi, exit) {
            exit = t_hi;
        }
    }
    frac_le(enter, exit)
}

/// `to` is visible from `from` if the cells are 4-adjacent, or if their
/// centers are closer than the vision range and every cell the connecting
/// segment touches is navigable. The source's own cell is exempt; the target
/// cell is not.
pub fn visibility(map: &NavMap, from: Cell, to: Cell) -> bool {
    let dr = from.0.abs_diff(to.0);
    let dc = from.1.abs_diff(to.1);
    if dr + dc == 1 {
        return true;
    }
    let dist2 = (dr * dr + dc * dc) as f64;
    if dist2 >= map.vision_range * map.vision_range {
        return false;
    }
    let (r_lo, r_hi) = (from.0.min(to.0), from.0.max(to.0));
    let (c_lo, c_hi) = (from.1.min(to.1), from.1.max(to.1));
    for r in r_lo..=r_hi {
        for c in c_lo..=c_hi {
            let cell = (r, c);
            if cell == from || !segment_meets(from, to, cell) {
                continue;
            }
            if !map.is_navigable(cell) {
                return false;
            }
        }
    }
    true
}

fn reachable(map: &NavMap, from: Cell, forward: bool) -> Vec<bool> {
    let n = map.n;
    let mut seen = vec![false; (n + 2) * (n + 2)];
    let idx = |(r, c): Cell| r * (n + 2) + c;
    if !map.is_navigable(from) {
        return seen;
    }
    let mut stack = vec![from];
    seen[idx(from)] = true;
    while let Some((r, c)) = stack.pop() {
        let next: [Option<Cell>; 2] = if forward {
            [Some((r, c + 1)), Some((r + 1, c))]
        } else {
            [(c > 1).then(|| (r, c - 1)), (r > 1).then(|| (r - 1, c))]
        };
        for cell in next.into_iter().flatten() {
            if map.is_navigable(cell) && !seen[idx(cell)] {
                seen[idx(cell)] = true;
                stack.push(cell);
            }
        }
    }
    seen
}

/// Grid MDP over the navigable cells from which the goal stays reachable,
/// with `r(s, a) = diag(visible(s, target_1), …, visible(s, target_d))`.
pub fn build_nav(map: &NavMap, lambda: f64) -> Result<(LeveledMdp, LogDetObjective)> {
    map.check()?;
    if map.targets.is_empty() {
        return Err(Error::Config(
            "navigation map has no explore targets".into(),
        ));
    }
    let n = map.n;
    let fwd = reachable(map, map.start, true);
    let bwd = reachable(map, (n, n), false);
    let idx = |(r, c): Cell| r * (n + 2) + c;
    if !fwd[idx((n, n))] {
        return Err(Error::GoalUnreachable);
    }
    let mdp = build_masked_grid(n, map.start, |r, c| {
        let cell = (r, c);
        map.is_navigable(cell) && fwd[idx(cell)] && bwd[idx(cell)]
    })?;
    let rewards = (0..mdp.ground_size())
        .map(|e| {
            let (s, _) = mdp.pair(e);
            let cell = cell_of(&mdp.state(s).name).expect("grid state name");
            RewardMatrix::Diagonal(
                map.targets
                    .iter()
                    .map(|&t| if visibility(map, cell, t) { 1.0 } else { 0.0 })
                    .collect(),
            )
        })
        .collect();
    let obj = LogDetObjective::new(map.targets.len(), lambda, rewards)?;
    Ok((mdp, obj))
}

fn parse_cell(tok: &str) -> Option<Cell> {
    cell_of(tok)
}

/// Parse the ASCII map format.
///
/// ```text
/// ; comments start with a semicolon
/// targets: (1,5) (3,3)
/// vision: 3
/// S....
/// .##..
/// ..E..
/// .....
/// .....
/// ```
///
/// `#` obstacle, `.` navigable, `E` navigable target, `S` navigable start
/// override. Header targets come first (they may sit on obstacles), then
/// `E` cells in row-major order.
pub fn parse_map(text: &str) -> Result<NavMap> {
    let mut header_targets = Vec::new();
    let mut vision = None;
    let mut rows: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("targets:") {
            for tok in rest.split_whitespace() {
                header_targets.push(
                    parse_cell(tok)
                        .ok_or_else(|| Error::parse(line_no, format!("bad cell `{tok}`")))?,
                );
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("vision:") {
            vision = Some(
                rest.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line_no, "bad vision range"))?,
            );
            continue;
        }
        rows.push((line_no, line));
    }
    let n = rows.len();
    if n < 2 {
        return Err(Error::parse(1, "map needs at least two rows"));
    }
    let mut map = NavMap::open(n);
    if let Some(v) = vision {
        map.vision_range = v;
    }
    let mut starts = Vec::new();
    let mut cell_targets = Vec::new();
    for (r, (line_no, row)) in rows.iter().enumerate() {
        let chars: Vec<char> = row.chars().collect();
        if chars.len() != n {
            return Err(Error::parse(
                *line_no,
                format!(
                    "row has {} cells, expected {n} (maps are square)",
                    chars.len()
                ),
            ));
        }
        for (c, ch) in chars.into_iter().enumerate() {
            let cell = (r + 1, c + 1);
            match ch {
                '#' => map.set_navigable(cell, false),
                '.' => {}
                'E' => cell_targets.push(cell),
                'S' => starts.push(cell),
                other => {
                    return Err(Error::parse(
                        *line_no,
                        format!("unknown map character `{other}`"),
                    ))
                }
            }
        }
    }
    if starts.len() > 1 {
        return Err(Error::parse(1, "more than one start cell"));
    }
    if let Some(&s) = starts.first() {
        map.start = s;
    }
    let mut seen = HashSet::new();
    map.targets = header_targets
        .into_iter()
        .chain(cell_targets)
        .filter(|t| seen.insert(*t))
        .collect();
    map.check()?;
    Ok(map)
}

pub fn read_map(path: impl AsRef<Path>) -> Result<NavMap> {
    parse_map(&std::fs::read_to_string(path)?)
}

/// Serialize in the format read by [`parse_map`].
pub fn render_map(map: &NavMap) -> String {
    let mut out = String::new();
    let hidden: Vec<String> = map
        .targets
        .iter()
        .filter(|&&t| !map.is_navigable(t))
        .map(|(r, c)| format!("({r},{c})"))
        .collect();
    if !hidden.is_empty() {
        out.push_str(&format!("targets: {}\n", hidden.join(" ")));
    }
    if map.vision_range != 3.0 {
        out.push_str(&format!("vision: {}\n", map.vision_range));
    }
    for r in 1..=map.n {
        for c in 1..=map.n {
            let cell = (r, c);
            let ch = if !map.is_navigable(cell) {
                '#'
            } else if map.targets.contains(&cell) {
                'E'
            } else if cell == map.start && cell != (1, 1) {
                'S'
            } else {
                '.'
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

/// An indoor-looking `21 × 21` map: a 3 × 3 arrangement of rooms separated
/// by walls with doorways, plus scattered furniture. Variants that leave
/// the goal unreachable under right/down moves, or leave too little room to
/// maneuver, are redrawn.
pub fn procedural_map(variant: u64) -> NavMap {
    const N: usize = 21;
    for attempt in 0u64.. {
        let mut rng = rng::stream(&[0x6e6176, variant, attempt]);
        let mut map = NavMap::open(N);
        let walls = [7, 14];
        for &w in &walls {
            for k in 1..=N {
                map.set_navigable((w, k), false);
                map.set_navigable((k, w), false);
            }
        }
        // doorways: each wall segment between junctions gets one or two gaps
        let segments = [(1, 6), (8, 13), (15, 21)];
        for &w in &walls {
            for &(a, b) in &segments {
                let gaps = rng.random_range(1..=2);
                for _ in 0..gaps {
                    let k = rng.random_range(a..=b);
                    map.set_navigable((w, k), true);
                    map.set_navigable((k, w), true);
                }
            }
        }
        for r in 1..=N {
            for c in 1..=N {
                let near_corner = r + c <= 4 || r + c >= 2 * N - 2;
                if !walls.contains(&r)
                    && !walls.contains(&c)
                    && !near_corner
                    && rng.random_bool(0.08)
                {
                    map.set_navigable((r, c), false);
                }
            }
        }
        let fwd = reachable(&map, (1, 1), true);
        let bwd = reachable(&map, (N, N), false);
        let kept = (1..=N)
            .flat_map(|r| (1..=N).map(move |c| (r, c)))
            .filter(|&(r, c)| fwd[r * (N + 2) + c] && bwd[r * (N + 2) + c])
            .count();
        if kept >= 120 {
            return map;
        }
    }
    unreachable!()
}
