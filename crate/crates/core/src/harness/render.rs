//! Drawing a trajectory over a navigation map.

use crate::env::{cell_of, Cell, NavMap};
use crate::mdp::{LeveledMdp, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Ascii,
    /// Binary PPM (P6), `scale` pixels per cell.
    Ppm {
        scale: usize,
    },
}

const RED: [u8; 3] = [200, 40, 40];
const BLUE: [u8; 3] = [60, 110, 220];
const ORANGE: [u8; 3] = [245, 150, 30];
const GREEN: [u8; 3] = [40, 180, 60];

/// Grid cells visited by a trajectory of a grid-shaped MDP, in order.
pub fn trajectory_cells(mdp: &LeveledMdp, traj: &Trajectory) -> Result<Vec<Cell>> {
    traj.states()
        .into_iter()
        .map(|s| {
            let name = &mdp.state(s).name;
            cell_of(name)
                .ok_or_else(|| Error::InvalidMdp(format!("state {name} is not a grid cell")))
        })
        .collect()
}

/// Path cells overdraw targets, which overdraw the terrain.
pub fn render_cells(map: &NavMap, path: &[Cell], format: RenderFormat) -> Result<Vec<u8>> {
    if let Some(c) = path.iter().find(|&&c| !map.in_bounds(c)) {
        return Err(Error::Config(format!(
            "trajectory cell {c:?} is outside the map"
        )));
    }
    let n = map.n;
    let mut kind = vec![0u8; n * n];
    for r in 1..=n {
        for c in 1..=n {
            kind[(r - 1) * n + c - 1] = if map.is_navigable((r, c)) { 1 } else { 0 };
        }
    }
    for &(r, c) in &map.targets {
        kind[(r - 1) * n + c - 1] = 2;
    }
    for &(r, c) in path {
        kind[(r - 1) * n + c - 1] = 3;
    }
    Ok(match format {
        RenderFormat::Ascii => {
            let mut out = Vec::with_capacity(n * (n + 1));
            for row in kind.chunks(n) {
                out.extend(row.iter().map(|k| b"#.E*"[*k as usize]));
                out.push(b'\n');
            }
            out
        }
        RenderFormat::Ppm { scale } => {
            let scale = scale.max(1);
            let side = n * scale;
            let mut out = format!("P6\n{side} {side}\n255\n").into_bytes();
            for py in 0..side {
                for px in 0..side {
                    let k = kind[(py / scale) * n + px / scale];
                    out.extend_from_slice(&[RED, BLUE, ORANGE, GREEN][k as usize]);
                }
            }
            out
        }
    })
}

pub fn render_trajectory(
    map: &NavMap,
    mdp: &LeveledMdp,
    traj: &Trajectory,
    format: RenderFormat,
) -> Result<Vec<u8>> {
    render_cells(map, &trajectory_cells(mdp, traj)?, format)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::build_grid;
    use crate::DeterministicPolicy;

    #[test]
    fn ascii_marks_the_path() {
        let map = NavMap::open(3);
        let mdp = build_grid(3).unwrap();
        // R, D at (1,2), then the lowest action everywhere else
        let (s11, s12) = (
            mdp.state_by_name("(1,1)").unwrap(),
            mdp.state_by_name("(1,2)").unwrap(),
        );
        let policy = DeterministicPolicy::from_labels(&mdp, &[(s11, "R"), (s12, "D")]).unwrap();
        let traj = mdp.follow(&policy).unwrap();
        let text =
            String::from_utf8(render_trajectory(&map, &mdp, &traj, RenderFormat::Ascii).unwrap())
                .unwrap();
        assert_eq!(text, "**.\n.**\n..*\n");
    }

    #[test]
    fn path_overdraws_targets() {
        let mut map = NavMap::open(3);
        map.targets = vec![(1, 2), (3, 1)];
        map.set_navigable((2, 1), false);
        let out = render_cells(&map, &[(1, 1), (1, 2)], RenderFormat::Ascii).unwrap();
        assert_eq!(out, b"**.\n#..\nE..\n");
    }

    #[test]
    fn ppm_dimensions() {
        let map = NavMap::open(4);
        let out = render_cells(&map, &[], RenderFormat::Ppm { scale: 5 }).unwrap();
        let header = b"P6\n20 20\n255\n";
        assert!(out.starts_with(header));
        assert_eq!(out.len(), header.len() + 20 * 20 * 3);
        assert_eq!(&out[header.len()..header.len() + 3], &BLUE);
    }

    #[test]
    fn rejects_out_of_bounds() {
        let map = NavMap::open(2);
        assert!(render_cells(&map, &[(3, 1)], RenderFormat::Ascii).is_err());
    }
}
