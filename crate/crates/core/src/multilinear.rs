//! The multilinear extension `F(x) = E[f(S^x)]`, where `S^x` contains each
//! element `e` independently with probability `x_e`.
//!
//! Monte-Carlo estimators draw sample `r` of a call keyed by `seed` from the
//! stream `(seed, r)` (or `(seed, e, r)` for independent per-coordinate
//! batches), so results do not depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;

use crate::mdp::MarginalVector;
use crate::objective::{Objective, PairSet};
use crate::rng;
use crate::{Error, Result};

/// Slack allowed outside `[0, 1]` before a marginal is rejected.
const RANGE_SLACK: f64 = 1e-12;

/// Largest number of fractional coordinates [`exact_value`] enumerates.
pub const EXACT_LIMIT: usize = 22;

/// Stream-key tag separating independent-batch streams from shared ones.
const INDEPENDENT_TAG: u64 = 0x1bd;

fn check_range(x: &MarginalVector) -> Result<()> {
    for (index, &value) in x.as_slice().iter().enumerate() {
        if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value) {
            return Err(Error::MarginalOutOfRange { index, value });
        }
    }
    Ok(())
}

fn draw_set<R: Rng + ?Sized>(x: &MarginalVector, rng: &mut R) -> PairSet {
    let mut s = PairSet::empty(x.len());
    for (e, &p) in x.as_slice().iter().enumerate() {
        // one uniform per coordinate keeps streams aligned across x
        let u: f64 = rng.random();
        if u < p {
            s.insert(e);
        }
    }
    s
}

/// Draw `S^x`.
pub fn sample_set(x: &MarginalVector, seed: u64) -> Result<PairSet> {
    check_range(x)?;
    Ok(draw_set(x, &mut rng::stream(&[seed])))
}

/// Mean and sample standard deviation of `f(S^x)` over `samples` draws.
pub fn estimate_value_with_spread<O: Objective + ?Sized>(
    obj: &O,
    x: &MarginalVector,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_range(x)?;
    if samples == 0 {
        return Err(Error::Config("sample count must be >= 1".into()));
    }
    let values = (0..samples)
        .into_par_iter()
        .map(|r| obj.evaluate(&draw_set(x, &mut rng::stream(&[seed, r as u64]))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_std(&values))
}

/// Empirical mean of `f(S^x)` over `samples` independent draws.
pub fn estimate_value<O: Objective + ?Sized>(
    obj: &O,
    x: &MarginalVector,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    Ok(estimate_value_with_spread(obj, x, samples, seed)?.0)
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// How gradient coordinates share their base samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleSharing {
    /// One batch of `R` sets serves every coordinate.
    #[default]
    Shared,
    /// Each coordinate draws its own `R` sets.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientOptions {
    pub samples: usize,
    pub seed: u64,
    pub sharing: SampleSharing,
    /// Use the objective's closed-form gradient when it has one.
    pub prefer_exact: bool,
}

impl GradientOptions {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        GradientOptions {
            samples,
            seed,
            sharing: SampleSharing::Shared,
            prefer_exact: false,
        }
    }
}

/// Estimated partial derivatives `w(e) ≈ E[f(S ∪ {e}) − f(S \ {e})]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub coords: Vec<usize>,
    /// Aligned with `coords`.
    pub w: Vec<f64>,
    /// Base sets drawn per coordinate; zero when the closed form was used.
    pub samples_used: usize,
    /// Per-coordinate sample standard deviation of the gain (zero for the
    /// closed form).
    pub std: Vec<f64>,
}

/// Estimate `∂F/∂x_e` for every `e` in `coords`. Because `F` is linear in
/// each coordinate, the partial derivative equals the expected marginal
/// gain of `e` against `S^x`.
pub fn estimate_gradient<O: Objective + ?Sized>(
    obj: &O,
    x: &MarginalVector,
    coords: &[usize],
    opts: &GradientOptions,
) -> Result<GradientEstimate> {
    check_range(x)?;
    if opts.prefer_exact && obj.has_exact_gradient() {
        let w = coords
            .iter()
            .map(|&e| obj.exact_gradient(x, e))
            .collect::<Result<Vec<_>>>()?;
        return Ok(GradientEstimate {
            coords: coords.to_vec(),
            std: vec![0.0; w.len()],
            w,
            samples_used: 0,
        });
    }
    if opts.samples == 0 {
        return Err(Error::Config("sample count must be >= 1".into()));
    }
    let r = opts.samples;
    let (w, std) = match opts.sharing {
        SampleSharing::Shared => {
            let rows = (0..r)
                .into_par_iter()
                .map(|k| {
                    let set = draw_set(x, &mut rng::stream(&[opts.seed, k as u64]));
                    obj.gains(&set, coords)
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            let mut w = Vec::with_capacity(coords.len());
            let mut std = Vec::with_capacity(coords.len());
            let mut column = vec![0.0; r];
            for j in 0..coords.len() {
                for (k, row) in rows.iter().enumerate() {
                    column[k] = row[j];
                }
                let (m, s) = mean_std(&column);
                w.push(m);
                std.push(s);
            }
            (w, std)
        }
        SampleSharing::Independent => {
            let stats = coords
                .par_iter()
                .map(|&e| {
                    let gains = (0..r)
                        .map(|k| {
                            let mut g =
                                rng::stream(&[opts.seed, INDEPENDENT_TAG, e as u64, k as u64]);
                            let set = draw_set(x, &mut g);
                            obj.marginal_gain(&set, e)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(mean_std(&gains))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            stats.into_iter().unzip()
        }
    };
    Ok(GradientEstimate {
        coords: coords.to_vec(),
        w,
        samples_used: r,
        std,
    })
}

/// Exact `F(x)` by enumerating every subset of the fractional coordinates.
/// Coordinates at 0 or 1 are fixed, so only `x_e ∈ (0, 1)` costs anything;
/// more than [`EXACT_LIMIT`] of them is refused.
pub fn exact_value<O: Objective + ?Sized>(obj: &O, x: &MarginalVector) -> Result<f64> {
    exact_value_limited(obj, x, EXACT_LIMIT)
}

/// [`exact_value`] with a caller-chosen limit on fractional coordinates.
pub fn exact_value_limited<O: Objective + ?Sized>(
    obj: &O,
    x: &MarginalVector,
    limit: usize,
) -> Result<f64> {
    check_range(x)?;
    let mut base = PairSet::empty(x.len());
    let mut frac = Vec::new();
    for (e, &p) in x.as_slice().iter().enumerate() {
        if p >= 1.0 {
            base.insert(e);
        } else if p > 0.0 {
            frac.push((e, p));
        }
    }
    if frac.len() > limit {
        return Err(Error::ExactInfeasible {
            fractional: frac.len(),
            limit,
        });
    }
    // split the outer coordinates across threads; partial sums are combined
    // in a fixed order
    let split = frac.len().min(6);
    let (outer, inner) = frac.split_at(split);
    let parts = (0..1usize << split)
        .into_par_iter()
        .map(|mask| {
            let mut set = base.clone();
            let mut prob = 1.0;
            for (bit, &(e, p)) in outer.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    set.insert(e);
                    prob *= p;
                } else {
                    prob *= 1.0 - p;
                }
            }
            let mut acc = 0.0;
            enumerate(obj, inner, &mut set, prob, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.iter().sum())
}

fn enumerate<O: Objective + ?Sized>(
    obj: &O,
    rest: &[(usize, f64)],
    set: &mut PairSet,
    prob: f64,
    acc: &mut f64,
) -> Result<()> {
    match rest.split_first() {
        None => {
            *acc += prob * obj.evaluate(set)?;
            Ok(())
        }
        Some((&(e, p), tail)) => {
            enumerate(obj, tail, set, prob * (1.0 - p), acc)?;
            set.insert(e);
            let r = enumerate(obj, tail, set, prob * p, acc);
            set.remove(e);
            r
        }
    }
}

/// Exact `∂F/∂x_e = F(x | x_e = 1) − F(x | x_e = 0)`.
pub fn exact_partial<O: Objective + ?Sized>(obj: &O, x: &MarginalVector, e: usize) -> Result<f64> {
    let mut hi = x.clone();
    hi.0[e] = 1.0;
    let mut lo = x.clone();
    lo.0[e] = 0.0;
    Ok(exact_value(obj, &hi)? - exact_value(obj, &lo)?)
}

#[cfg(test)]
mod tests;
