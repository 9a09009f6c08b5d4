//! Planning in leveled tabular MDPs whose episode value is a monotone
//! submodular function of the visited state-action pairs.
//!
//! The crate is organized bottom-up:
//!
//! - [`mdp`]: leveled MDPs, policies, trajectories and exact visit marginals.
//! - [`objective`]: log-determinant, additive and coverage set functions.
//! - [`multilinear`]: the multilinear extension, its Monte-Carlo estimators
//!   and exact enumeration for small supports.
//! - [`dp`]: backward induction for per-pair linear rewards.
//! - [`continuous_greedy`]: the discretized continuous-greedy planner.
//! - [`rounding`]: HIGH and SUB rounding of mixture policies.
//! - [`baselines`]: per-step DP and greedy, with action augmentation.
//! - [`env`]: grid, synthetic, navigation and cardinality instances.
//! - [`harness`]: seeded experiment runner, result emission and rendering.
//!
//! ```
//! use submdp::{continuous_greedy, env, rounding, CgConfig};
//!
//! let (mdp, obj) = env::build_synthetic(&env::SyntheticSpec::new(5, 2, 11)).unwrap();
//! let cfg = CgConfig { delta: 0.1, samples: 10, ..CgConfig::default() };
//! let result = continuous_greedy::run(&mdp, &obj, &cfg).unwrap();
//! let policy = rounding::round_high(&mdp, &obj, &result.mixture, 0, 7).unwrap();
//! let value = submdp::objective::policy_value(&mdp, &obj, &policy).unwrap();
//! assert!(value.is_finite());
//! ```

pub mod baselines;
pub mod continuous_greedy;
pub mod dp;
pub mod env;
mod error;
pub mod harness;
pub mod mdp;
pub mod multilinear;
pub mod objective;
pub mod rng;
pub mod rounding;

pub use continuous_greedy::{CgConfig, CgResult, GradientMode, OffsetMode};
pub use error::{Error, Result};
pub use mdp::{
    DeterministicPolicy, LeveledMdp, MarginalVector, MdpBuilder, MixturePolicy, Trajectory,
};
pub use objective::{
    AdditiveObjective, CoverageObjective, Family, LogDetObjective, Objective, PairSet,
};
