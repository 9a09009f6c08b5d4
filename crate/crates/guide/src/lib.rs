//! The guide in `book/`, compiled so its listings run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/objectives.md")]
pub mod objectives {}
#[doc = include_str!("../../../book/src/multilinear.md")]
pub mod multilinear {}
#[doc = include_str!("../../../book/src/continuous-greedy.md")]
pub mod continuous_greedy {}
#[doc = include_str!("../../../book/src/rounding.md")]
pub mod rounding {}
#[doc = include_str!("../../../book/src/baselines.md")]
pub mod baselines {}
#[doc = include_str!("../../../book/src/environments.md")]
pub mod environments {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
