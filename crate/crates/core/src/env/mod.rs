//! Experiment instances: the right/down grid, the synthetic log-det reward
//! generator, navigation maps with visibility rewards, cardinality-constraint
//! encodings and random leveled MDPs for property tests.

mod cardinality;
mod grid;
mod nav;
mod random;
mod synthetic;

pub use cardinality::{build_cardinality, cardinality_objective, random_coverage_items};
pub use grid::{build_grid, cell_of, grid_state_name, GridSpec};
pub use nav::{
    build_nav, parse_map, procedural_map, read_map, render_map, visibility, Cell, NavMap,
};
pub use random::{random_coverage, random_deterministic_policy, random_mdp, RandomMdpSpec};
pub use synthetic::{build_synthetic, SyntheticSpec};
