//! Discretized continuous greedy.
//!
//! Starting from `y_0 = 0`, each of the `T = 1/δ` iterations estimates the
//! gradient of the multilinear extension at `y_{t-1}`, asks [`dp::solve_linear`]
//! for the policy whose marginals maximize `x(π)·w_t`, and moves
//! `y_t = y_{t-1} + δ·x(π_t)`. The output is the uniform mixture over the
//! `T` policies, whose marginal vector is exactly `y_T`.

use std::io::Write;

use crate::dp;
use crate::mdp::{DeterministicPolicy, LeveledMdp, MarginalVector, MixturePolicy};
use crate::multilinear::{self, GradientOptions, SampleSharing};
use crate::objective::{Objective, PairSet};
use crate::rng;
use crate::{Error, Result};

const GRADIENT_TAG: u64 = 0x67;
const FINAL_TAG: u64 = 0x66;
const TRACE_TAG: u64 = 0x74;
const RESTART_TAG: u64 = 0x72;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    #[default]
    MonteCarlo,
    /// Closed-form partials when the objective has them, Monte Carlo
    /// otherwise.
    ExactWhenAvailable,
}

/// How `F` values are reported. Gradients are differences of `f` and do not
/// see a constant shift, so this only changes `estimated_f` and the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffsetMode {
    #[default]
    Raw,
    /// Report `F − f(∅)`.
    NonnegativeShift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgConfig {
    /// Step size; `1/delta` must be an integer.
    pub delta: f64,
    /// Monte-Carlo samples per gradient estimate.
    pub samples: usize,
    pub seed: u64,
    pub gradient_mode: GradientMode,
    pub offset_mode: OffsetMode,
    pub sharing: SampleSharing,
    /// Fresh samples used for `estimated_f` after the loop.
    pub final_samples: usize,
    /// When positive, estimate `F(y_t)` with this many samples after every
    /// iteration (for traces).
    pub trace_samples: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            delta: 0.01,
            samples: 10,
            seed: 0,
            gradient_mode: GradientMode::MonteCarlo,
            offset_mode: OffsetMode::Raw,
            sharing: SampleSharing::Shared,
            final_samples: 1000,
            trace_samples: 0,
        }
    }
}

impl CgConfig {
    /// The worst-case parameters: `δ = 1/(9|S|²|A|²)` and
    /// `R = 10(1 + ln(|S||A|))/δ²`. Far too slow for anything but toy models.
    pub fn theoretical(mdp: &LeveledMdp) -> Self {
        let s = mdp.num_states() as f64;
        let a = (0..mdp.num_states())
            .map(|st| mdp.actions(st).len())
            .max()
            .unwrap_or(1)
            .max(1) as f64;
        let delta = 1.0 / (9.0 * s * s * a * a);
        let samples = (10.0 * (1.0 + (s * a).ln()) / (delta * delta)).ceil();
        CgConfig {
            delta,
            samples: if samples >= usize::MAX as f64 {
                usize::MAX
            } else {
                samples as usize
            },
            ..CgConfig::default()
        }
    }

    /// Number of iterations `T = 1/δ`.
    pub fn iterations(&self) -> Result<usize> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        let t = (1.0 / self.delta).round();
        if ((1.0 / self.delta) - t).abs() > 1e-9 * t {
            return Err(Error::Config(format!(
                "1/delta must be an integer, got delta = {}",
                self.delta
            )));
        }
        Ok(t as usize)
    }

    fn check(&self) -> Result<usize> {
        let t = self.iterations()?;
        if self.samples == 0 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if self.final_samples == 0 {
            return Err(Error::Config("final_samples must be >= 1".into()));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub w_min: f64,
    pub w_max: f64,
    pub w_mean: f64,
    pub policy: DeterministicPolicy,
    /// `x(π_t)·w_t`.
    pub linear_value: f64,
    /// `F̂(y_t)` when `trace_samples > 0`.
    pub estimated_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgResult {
    pub mixture: MixturePolicy,
    pub y_final: MarginalVector,
    pub per_iteration: Vec<IterationRecord>,
    /// `F̂(y_T)` over `final_samples` fresh draws.
    pub estimated_f: f64,
}

pub fn run<O: Objective + ?Sized>(mdp: &LeveledMdp, obj: &O, cfg: &CgConfig) -> Result<CgResult> {
    let t_max = cfg.check()?;
    mdp.ensure_valid()?;
    if obj.ground_size() != mdp.ground_size() {
        return Err(Error::GroundSetMismatch {
            mdp: mdp.ground_size(),
            objective: obj.ground_size(),
        });
    }
    let offset = match cfg.offset_mode {
        OffsetMode::Raw => 0.0,
        OffsetMode::NonnegativeShift => -obj.evaluate(&PairSet::empty(mdp.ground_size()))?,
    };
    let coords: Vec<usize> = (0..mdp.ground_size()).collect();
    let mut y = MarginalVector::zeros(mdp.ground_size());
    let mut members = Vec::with_capacity(t_max);
    let mut records = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let opts = GradientOptions {
            samples: cfg.samples,
            seed: rng::derive(&[cfg.seed, GRADIENT_TAG, t as u64]),
            sharing: cfg.sharing,
            prefer_exact: cfg.gradient_mode == GradientMode::ExactWhenAvailable,
        };
        let grad = multilinear::estimate_gradient(obj, &clamp(&y), &coords, &opts)?;
        let (policy, linear_value) = dp::solve_linear(mdp, &grad.w);
        y.add_scaled(cfg.delta, &mdp.policy_marginals(&policy));
        let estimated_f = if cfg.trace_samples > 0 {
            let seed = rng::derive(&[cfg.seed, TRACE_TAG, t as u64]);
            Some(multilinear::estimate_value(obj, &clamp(&y), cfg.trace_samples, seed)? + offset)
        } else {
            None
        };
        let w = &grad.w;
        records.push(IterationRecord {
            w_min: w.iter().copied().fold(f64::INFINITY, f64::min),
            w_max: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            w_mean: w.iter().sum::<f64>() / w.len().max(1) as f64,
            policy: policy.clone(),
            linear_value,
            estimated_f,
        });
        members.push(policy);
    }
    let y_final = clamp(&y);
    let seed = rng::derive(&[cfg.seed, FINAL_TAG]);
    let estimated_f = multilinear::estimate_value(obj, &y_final, cfg.final_samples, seed)? + offset;
    Ok(CgResult {
        mixture: MixturePolicy::new(members)?,
        y_final,
        per_iteration: records,
        estimated_f,
    })
}

/// Accumulated `δ` steps can overshoot 1 by a few ulps.
fn clamp(y: &MarginalVector) -> MarginalVector {
    MarginalVector(y.as_slice().iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Run `restarts` independent copies and keep the one with the largest
/// `estimated_f` (earliest on ties). Restart 0 uses `cfg.seed` unchanged,
/// so one restart is the same as [`run`].
pub fn run_with_restarts<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    cfg: &CgConfig,
    restarts: usize,
) -> Result<CgResult> {
    let mut best: Option<CgResult> = None;
    for r in 0..restarts.max(1) {
        let mut c = cfg.clone();
        if r > 0 {
            c.seed = rng::derive(&[cfg.seed, RESTART_TAG, r as u64]);
        }
        let result = run(mdp, obj, &c)?;
        if best
            .as_ref()
            .is_none_or(|b| result.estimated_f > b.estimated_f)
        {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Per-iteration CSV with header `t,linear_value,estimated_f`; the last
/// column is empty when the run had `trace_samples = 0`.
pub fn write_trace<W: Write>(result: &CgResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t,linear_value,estimated_f")?;
    for (i, rec) in result.per_iteration.iter().enumerate() {
        let f = rec.estimated_f.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{},{},{}", i + 1, rec.linear_value, f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
