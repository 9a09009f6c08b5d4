//! Monotone submodular set functions over the ground set of state-action
//! pairs.
//!
//! Three families are provided:
//!
//! - [`LogDetObjective`]: `ln det(Σ_{e∈S} r(e) + λI)` for PSD reward matrices.
//! - [`AdditiveObjective`]: `Σ_{e∈S} w(e)`, the standard-MDP special case.
//! - [`CoverageObjective`]: weighted size of the union of per-element covers.
//!
//! [`Shifted`] subtracts `f(∅)` so that the value of the empty set is zero,
//! which is what the approximation bounds assume. A constant shift leaves
//! every marginal gain unchanged.

use std::io::BufRead;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::mdp::{DeterministicPolicy, LeveledMdp, MarginalVector, MixturePolicy};
use crate::{Error, Result};

/// A subset of the ground set `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairSet {
    mask: Vec<bool>,
    len: usize,
}

impl PairSet {
    pub fn empty(m: usize) -> Self {
        PairSet {
            mask: vec![false; m],
            len: 0,
        }
    }

    pub fn full(m: usize) -> Self {
        PairSet {
            mask: vec![true; m],
            len: m,
        }
    }

    pub fn from_indices(m: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(m);
        for e in items {
            s.insert(e);
        }
        s
    }

    /// Size of the ground set this subset lives in.
    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, e: usize) -> bool {
        self.mask[e]
    }

    /// Returns true if `e` was newly added.
    pub fn insert(&mut self, e: usize) -> bool {
        let added = !self.mask[e];
        self.mask[e] = true;
        self.len += usize::from(added);
        added
    }

    /// Returns true if `e` was present.
    pub fn remove(&mut self, e: usize) -> bool {
        let had = self.mask[e];
        self.mask[e] = false;
        self.len -= usize::from(had);
        had
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(e, &b)| b.then_some(e))
    }

    pub fn with(&self, e: usize) -> Self {
        let mut s = self.clone();
        s.insert(e);
        s
    }

    pub fn without(&self, e: usize) -> Self {
        let mut s = self.clone();
        s.remove(e);
        s
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }
}

/// Which closed-form family an objective belongs to. The baselines only
/// accept matrix and additive rewards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    LogDet,
    Additive,
    Coverage,
    Other,
}

/// A monotone submodular set function over `0..ground_size()`.
///
/// Implementations must be pure: the same set always yields the same value,
/// and concurrent calls are allowed.
pub trait Objective: Send + Sync {
    fn ground_size(&self) -> usize;

    fn family(&self) -> Family {
        Family::Other
    }

    fn evaluate(&self, set: &PairSet) -> Result<f64>;

    fn evaluate_indices(&self, items: &[usize]) -> Result<f64> {
        self.evaluate(&PairSet::from_indices(
            self.ground_size(),
            items.iter().copied(),
        ))
    }

    /// `f(S ∪ {e}) − f(S \ {e})`.
    fn marginal_gain(&self, set: &PairSet, e: usize) -> Result<f64> {
        Ok(self.evaluate(&set.with(e))? - self.evaluate(&set.without(e))?)
    }

    /// Marginal gains of every coordinate in `coords` against the same set.
    fn gains(&self, set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        coords.iter().map(|&e| self.marginal_gain(set, e)).collect()
    }

    /// Whether [`exact_gradient`](Self::exact_gradient) is implemented.
    fn has_exact_gradient(&self) -> bool {
        false
    }

    /// `∂F/∂x_e` of the multilinear extension, in closed form.
    fn exact_gradient(&self, _x: &MarginalVector, _e: usize) -> Result<f64> {
        Err(Error::NoExactGradient)
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn family(&self) -> Family {
        (**self).family()
    }
    fn evaluate(&self, set: &PairSet) -> Result<f64> {
        (**self).evaluate(set)
    }
    fn marginal_gain(&self, set: &PairSet, e: usize) -> Result<f64> {
        (**self).marginal_gain(set, e)
    }
    fn gains(&self, set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        (**self).gains(set, coords)
    }
    fn has_exact_gradient(&self) -> bool {
        (**self).has_exact_gradient()
    }
    fn exact_gradient(&self, x: &MarginalVector, e: usize) -> Result<f64> {
        (**self).exact_gradient(x, e)
    }
}

impl<O: Objective + ?Sized> Objective for Box<O> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn family(&self) -> Family {
        (**self).family()
    }
    fn evaluate(&self, set: &PairSet) -> Result<f64> {
        (**self).evaluate(set)
    }
    fn marginal_gain(&self, set: &PairSet, e: usize) -> Result<f64> {
        (**self).marginal_gain(set, e)
    }
    fn gains(&self, set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        (**self).gains(set, coords)
    }
    fn has_exact_gradient(&self) -> bool {
        (**self).has_exact_gradient()
    }
    fn exact_gradient(&self, x: &MarginalVector, e: usize) -> Result<f64> {
        (**self).exact_gradient(x, e)
    }
}

/// Objective value of the episode a deterministic policy produces on a
/// deterministic MDP.
pub fn policy_value<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    policy: &DeterministicPolicy,
) -> Result<f64> {
    let traj = mdp.follow(policy)?;
    obj.evaluate_indices(&traj.pairs(mdp))
}

/// Exact expected value of a mixture on a deterministic MDP: the mean of its
/// members' values.
pub fn mixture_value<O: Objective + ?Sized>(
    mdp: &LeveledMdp,
    obj: &O,
    mixture: &MixturePolicy,
) -> Result<f64> {
    let mut total = 0.0;
    for member in mixture.members() {
        total += policy_value(mdp, obj, member)?;
    }
    Ok(total / mixture.len() as f64)
}

/// Per-element reward matrix of a [`LogDetObjective`].
#[derive(Debug, Clone, PartialEq)]
pub enum RewardMatrix {
    Diagonal(Vec<f64>),
    /// Row-major `d × d`.
    Dense(Vec<f64>),
}

impl RewardMatrix {
    pub fn zeros(d: usize) -> Self {
        RewardMatrix::Diagonal(vec![0.0; d])
    }

    pub fn trace(&self, d: usize) -> f64 {
        match self {
            RewardMatrix::Diagonal(v) => v.iter().sum(),
            RewardMatrix::Dense(m) => (0..d).map(|i| m[i * d + i]).sum(),
        }
    }

    fn add_to(&self, acc: &mut DMatrix<f64>, sign: f64) {
        let d = acc.nrows();
        match self {
            RewardMatrix::Diagonal(v) => {
                for i in 0..d {
                    acc[(i, i)] += sign * v[i];
                }
            }
            RewardMatrix::Dense(m) => {
                for i in 0..d {
                    for j in 0..d {
                        acc[(i, j)] += sign * m[i * d + j];
                    }
                }
            }
        }
    }
}

/// `f(S) = ln det(Σ_{e∈S} r(e) + λI)`.
#[derive(Debug, Clone)]
pub struct LogDetObjective {
    dim: usize,
    lambda: f64,
    rewards: Vec<RewardMatrix>,
    all_diagonal: bool,
}

/// Smallest eigenvalue accepted before clipping a reward to PSD.
const PSD_TOL: f64 = 1e-9;

impl LogDetObjective {
    /// Validates symmetry and positive semidefiniteness of every reward;
    /// eigenvalues in `[−1e-9, 0)` are clipped to zero.
    pub fn new(dim: usize, lambda: f64, rewards: Vec<RewardMatrix>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidObjective(format!(
                "lambda must be > 0, got {lambda}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidObjective(
                "matrix dimension must be positive".into(),
            ));
        }
        let rewards = rewards
            .into_iter()
            .enumerate()
            .map(|(e, r)| {
                clip_psd(dim, r)
                    .map_err(|msg| Error::InvalidObjective(format!("element {e}: {msg}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let all_diagonal = rewards
            .iter()
            .all(|r| matches!(r, RewardMatrix::Diagonal(_)));
        Ok(LogDetObjective {
            dim,
            lambda,
            rewards,
            all_diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn reward(&self, e: usize) -> &RewardMatrix {
        &self.rewards[e]
    }

    pub fn rewards(&self) -> &[RewardMatrix] {
        &self.rewards
    }

    /// `f(∅) = d·ln λ`.
    pub fn empty_value(&self) -> f64 {
        self.dim as f64 * self.lambda.ln()
    }

    fn diag_sum<'a>(&self, items: impl Iterator<Item = usize> + 'a) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim];
        for e in items {
            if let RewardMatrix::Diagonal(v) = &self.rewards[e] {
                for (a, b) in acc.iter_mut().zip(v) {
                    *a += b;
                }
            }
        }
        acc
    }

    fn diag_logdet(&self, diag: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for &v in diag {
            let v = v + self.lambda;
            if !(v > 0.0) {
                return Err(Error::SingularMatrix);
            }
            total += v.ln();
        }
        Ok(total)
    }

    fn dense_sum(&self, items: impl Iterator<Item = usize>) -> DMatrix<f64> {
        let mut acc = DMatrix::<f64>::identity(self.dim, self.dim) * self.lambda;
        for e in items {
            self.rewards[e].add_to(&mut acc, 1.0);
        }
        acc
    }

    /// The factorization path, regardless of structure. Items are
    /// accumulated in the given order.
    pub fn evaluate_dense(&self, items: &[usize]) -> Result<f64> {
        dense_logdet(self.dense_sum(items.iter().copied()))
    }
}

fn dense_logdet(m: DMatrix<f64>) -> Result<f64> {
    let chol = m.cholesky().ok_or(Error::SingularMatrix)?;
    let l = chol.l_dirty();
    let mut total = 0.0;
    for i in 0..l.nrows() {
        total += l[(i, i)].ln();
    }
    Ok(2.0 * total)
}

fn clip_psd(d: usize, r: RewardMatrix) -> std::result::Result<RewardMatrix, String> {
    match r {
        RewardMatrix::Diagonal(v) => {
            if v.len() != d {
                return Err(format!("expected {d} diagonal entries, got {}", v.len()));
            }
            if let Some(bad) = v.iter().find(|x| !x.is_finite() || **x < -PSD_TOL) {
                return Err(format!("diagonal entry {bad} is not PSD"));
            }
            Ok(RewardMatrix::Diagonal(
                v.into_iter().map(|x| x.max(0.0)).collect(),
            ))
        }
        RewardMatrix::Dense(m) => {
            if m.len() != d * d {
                return Err(format!("expected {} dense entries, got {}", d * d, m.len()));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err("non-finite entry".into());
            }
            for i in 0..d {
                for j in 0..i {
                    if (m[i * d + j] - m[j * d + i]).abs() > 1e-9 {
                        return Err(format!("not symmetric at ({i},{j})"));
                    }
                }
            }
            let sym = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[i * d + j] + m[j * d + i]));
            let eig = SymmetricEigen::new(sym.clone());
            let min = eig
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min < -PSD_TOL {
                return Err(format!("smallest eigenvalue {min} is negative"));
            }
            let out = if min < 0.0 {
                let clipped = eig.eigenvalues.map(|x| x.max(0.0));
                let v = &eig.eigenvectors;
                let rec = v * DMatrix::from_diagonal(&clipped) * v.transpose();
                DMatrix::from_fn(d, d, |i, j| 0.5 * (rec[(i, j)] + rec[(j, i)]))
            } else {
                sym
            };
            let mut flat = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    flat[i * d + j] = out[(i, j)];
                }
            }
            Ok(RewardMatrix::Dense(flat))
        }
    }
}

impl Objective for LogDetObjective {
    fn ground_size(&self) -> usize {
        self.rewards.len()
    }

    fn family(&self) -> Family {
        Family::LogDet
    }

    fn evaluate(&self, set: &PairSet) -> Result<f64> {
        if self.all_diagonal {
            self.diag_logdet(&self.diag_sum(set.iter()))
        } else {
            dense_logdet(self.dense_sum(set.iter()))
        }
    }

    fn gains(&self, set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        if self.all_diagonal {
            let base = self.diag_sum(set.iter());
            let shifted: Vec<f64> = base.iter().map(|b| b + self.lambda).collect();
            coords
                .iter()
                .map(|&e| {
                    let RewardMatrix::Diagonal(r) = &self.rewards[e] else {
                        unreachable!()
                    };
                    let mut gain = 0.0;
                    for (i, &ri) in r.iter().enumerate() {
                        if ri == 0.0 {
                            continue;
                        }
                        // (with e, without e) diagonal entries
                        let (hi, lo) = if set.contains(e) {
                            (shifted[i], shifted[i] - ri)
                        } else {
                            (shifted[i] + ri, shifted[i])
                        };
                        if !(lo > 0.0) {
                            return Err(Error::SingularMatrix);
                        }
                        gain += (hi / lo).ln();
                    }
                    Ok(gain)
                })
                .collect()
        } else {
            let base = self.dense_sum(set.iter());
            let base_val = dense_logdet(base.clone())?;
            coords
                .iter()
                .map(|&e| {
                    let mut m = base.clone();
                    if set.contains(e) {
                        self.rewards[e].add_to(&mut m, -1.0);
                        Ok(base_val - dense_logdet(m)?)
                    } else {
                        self.rewards[e].add_to(&mut m, 1.0);
                        Ok(dense_logdet(m)? - base_val)
                    }
                })
                .collect()
        }
    }

    fn marginal_gain(&self, set: &PairSet, e: usize) -> Result<f64> {
        Ok(self.gains(set, &[e])?[0])
    }
}

/// `f(S) = Σ_{e∈S} w(e)` with nonnegative weights.
#[derive(Debug, Clone)]
pub struct AdditiveObjective {
    weights: Vec<f64>,
}

impl AdditiveObjective {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some((e, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidObjective(format!(
                "weight {e} is {w}, must be >= 0"
            )));
        }
        Ok(AdditiveObjective { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Objective for AdditiveObjective {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn family(&self) -> Family {
        Family::Additive
    }

    fn evaluate(&self, set: &PairSet) -> Result<f64> {
        Ok(set.iter().map(|e| self.weights[e]).sum())
    }

    fn marginal_gain(&self, _set: &PairSet, e: usize) -> Result<f64> {
        Ok(self.weights[e])
    }

    fn gains(&self, _set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        Ok(coords.iter().map(|&e| self.weights[e]).collect())
    }

    fn has_exact_gradient(&self) -> bool {
        true
    }

    fn exact_gradient(&self, _x: &MarginalVector, e: usize) -> Result<f64> {
        Ok(self.weights[e])
    }
}

/// Weighted coverage: `f(S) = Σ_{u ∈ ∪_{e∈S} cover(e)} weight(u)`.
#[derive(Debug, Clone)]
pub struct CoverageObjective {
    covers: Vec<Vec<usize>>,
    weights: Vec<f64>,
    masks: Vec<Vec<u64>>,
    coverers: Vec<Vec<usize>>,
}

impl CoverageObjective {
    /// `covers[e]` lists universe items covered by element `e`;
    /// `weights[u]` is the weight of universe item `u`.
    pub fn new(covers: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        let u = weights.len();
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidObjective(format!(
                "universe weight {w} must be >= 0"
            )));
        }
        let words = u.div_ceil(64);
        let mut masks = Vec::with_capacity(covers.len());
        let mut coverers = vec![Vec::new(); u];
        let mut clean = Vec::with_capacity(covers.len());
        for (e, c) in covers.into_iter().enumerate() {
            let mut m = vec![0u64; words];
            let mut items = Vec::new();
            for x in c {
                if x >= u {
                    return Err(Error::InvalidObjective(format!(
                        "element {e} covers item {x} outside a universe of {u}"
                    )));
                }
                if m[x / 64] & (1 << (x % 64)) == 0 {
                    m[x / 64] |= 1 << (x % 64);
                    coverers[x].push(e);
                    items.push(x);
                }
            }
            items.sort_unstable();
            masks.push(m);
            clean.push(items);
        }
        Ok(CoverageObjective {
            covers: clean,
            weights,
            masks,
            coverers,
        })
    }

    /// Unit-weight coverage.
    pub fn unweighted(covers: Vec<Vec<usize>>, universe: usize) -> Result<Self> {
        Self::new(covers, vec![1.0; universe])
    }

    pub fn cover(&self, e: usize) -> &[usize] {
        &self.covers[e]
    }

    pub fn universe_weights(&self) -> &[f64] {
        &self.weights
    }

    fn union(&self, set: &PairSet) -> Vec<u64> {
        let mut acc = vec![0u64; self.weights.len().div_ceil(64)];
        for e in set.iter() {
            for (a, b) in acc.iter_mut().zip(&self.masks[e]) {
                *a |= b;
            }
        }
        acc
    }

    fn weight_of(&self, mask: &[u64]) -> f64 {
        let mut total = 0.0;
        for (w, &bits) in mask.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let i = b.trailing_zeros() as usize;
                total += self.weights[w * 64 + i];
                b &= b - 1;
            }
        }
        total
    }
}

impl Objective for CoverageObjective {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn family(&self) -> Family {
        Family::Coverage
    }

    fn evaluate(&self, set: &PairSet) -> Result<f64> {
        Ok(self.weight_of(&self.union(set)))
    }

    fn gains(&self, set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        let mut count = vec![0u32; self.weights.len()];
        for e in set.iter() {
            for &u in &self.covers[e] {
                count[u] += 1;
            }
        }
        Ok(coords
            .iter()
            .map(|&e| {
                // an item is lost on removing e only if e is its sole coverer in S,
                // and gained on adding e only if nobody in S covers it
                let threshold = u32::from(set.contains(e));
                self.covers[e]
                    .iter()
                    .filter(|&&u| count[u] == threshold)
                    .map(|&u| self.weights[u])
                    .sum()
            })
            .collect())
    }

    fn marginal_gain(&self, set: &PairSet, e: usize) -> Result<f64> {
        Ok(self.gains(set, &[e])?[0])
    }

    fn has_exact_gradient(&self) -> bool {
        true
    }

    /// `Σ_{u ∈ cover(e)} weight(u) · Π_{e' ≠ e covering u} (1 − x_{e'})`.
    fn exact_gradient(&self, x: &MarginalVector, e: usize) -> Result<f64> {
        Ok(self.covers[e]
            .iter()
            .map(|&u| {
                let miss: f64 = self.coverers[u]
                    .iter()
                    .filter(|&&o| o != e)
                    .map(|&o| 1.0 - x.get(o))
                    .product();
                self.weights[u] * miss
            })
            .sum())
    }
}

/// `f(S) − f(∅)`: nonnegative with `f(∅) = 0`, same marginal gains.
#[derive(Debug, Clone)]
pub struct Shifted<O> {
    inner: O,
    offset: f64,
}

impl<O: Objective> Shifted<O> {
    pub fn new(inner: O) -> Result<Self> {
        let offset = -inner.evaluate(&PairSet::empty(inner.ground_size()))?;
        Ok(Shifted { inner, offset })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for Shifted<O> {
    fn ground_size(&self) -> usize {
        self.inner.ground_size()
    }
    fn family(&self) -> Family {
        self.inner.family()
    }
    fn evaluate(&self, set: &PairSet) -> Result<f64> {
        Ok(self.inner.evaluate(set)? + self.offset)
    }
    fn marginal_gain(&self, set: &PairSet, e: usize) -> Result<f64> {
        self.inner.marginal_gain(set, e)
    }
    fn gains(&self, set: &PairSet, coords: &[usize]) -> Result<Vec<f64>> {
        self.inner.gains(set, coords)
    }
    fn has_exact_gradient(&self) -> bool {
        self.inner.has_exact_gradient()
    }
    fn exact_gradient(&self, x: &MarginalVector, e: usize) -> Result<f64> {
        self.inner.exact_gradient(x, e)
    }
}

/// Parse a reward-matrix file.
///
/// ```text
/// dim 3
/// lambda 0.00001
/// elem 0 diag 1 0 2
/// elem 4 dense 1 0 0 0 1 0 0 0 1
/// ```
///
/// `dim` is optional when at least one `elem` line is present; `lambda`
/// falls back to `default_lambda`. Elements not listed get the zero matrix.
pub fn parse_rewards(
    text: &str,
    ground_size: usize,
    default_lambda: f64,
) -> Result<LogDetObjective> {
    let mut dim: Option<usize> = None;
    let mut lambda = default_lambda;
    let mut entries: Vec<(usize, usize, RewardMatrix)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("dim") => {
                dim = Some(
                    tok.next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(line_no, "expected `dim <d>`"))?,
                )
            }
            Some("lambda") => {
                lambda = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line_no, "expected `lambda <value>`"))?
            }
            Some("elem") => {
                let idx: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::parse(line_no, "expected element index"))?;
                if idx >= ground_size {
                    return Err(Error::parse(
                        line_no,
                        format!("element {idx} outside ground set of {ground_size}"),
                    ));
                }
                let kind = tok.next();
                let vals = tok
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::parse(line_no, e.to_string()))?;
                let m = match kind {
                    Some("diag") => RewardMatrix::Diagonal(vals),
                    Some("dense") => RewardMatrix::Dense(vals),
                    _ => return Err(Error::parse(line_no, "expected `diag` or `dense`")),
                };
                entries.push((line_no, idx, m));
            }
            Some(other) => {
                return Err(Error::parse(
                    line_no,
                    format!("unknown directive `{other}`"),
                ))
            }
            None => unreachable!(),
        }
    }
    let d = match dim {
        Some(d) => d,
        None => match entries.first() {
            Some((_, _, RewardMatrix::Diagonal(v))) => v.len(),
            Some((line_no, _, RewardMatrix::Dense(v))) => {
                let d = (v.len() as f64).sqrt().round() as usize;
                if d * d != v.len() {
                    return Err(Error::parse(*line_no, "dense entry count is not a square"));
                }
                d
            }
            None => return Err(Error::parse(1, "empty reward file needs a `dim` line")),
        },
    };
    let mut rewards = vec![RewardMatrix::zeros(d); ground_size];
    for (line_no, idx, m) in entries {
        let ok = match &m {
            RewardMatrix::Diagonal(v) => v.len() == d,
            RewardMatrix::Dense(v) => v.len() == d * d,
        };
        if !ok {
            return Err(Error::parse(
                line_no,
                format!("wrong entry count for dimension {d}"),
            ));
        }
        rewards[idx] = m;
    }
    LogDetObjective::new(d, lambda, rewards)
}

pub fn read_rewards(
    path: impl AsRef<Path>,
    ground_size: usize,
    default_lambda: f64,
) -> Result<LogDetObjective> {
    parse_rewards(&std::fs::read_to_string(path)?, ground_size, default_lambda)
}

/// Serialize a log-det objective in the reward-matrix format.
pub fn write_rewards(obj: &LogDetObjective) -> String {
    use std::fmt::Write as _;
    let mut out = format!("dim {}\nlambda {:e}\n", obj.dim(), obj.lambda());
    for (e, r) in obj.rewards().iter().enumerate() {
        let (kind, vals) = match r {
            RewardMatrix::Diagonal(v) => ("diag", v),
            RewardMatrix::Dense(v) => ("dense", v),
        };
        let _ = write!(out, "elem {e} {kind}");
        for v in vals {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Parse a coverage file for cardinality instances.
///
/// ```text
/// universe 6
/// weight 2 1.5
/// item 0 covers 0 1
/// item 1 covers 1 2 3
/// ```
///
/// Returns per-item cover lists and universe weights (default 1).
pub fn parse_coverage<R: BufRead>(reader: R) -> Result<(Vec<Vec<usize>>, Vec<f64>)> {
    let mut universe = None;
    let mut weights: Vec<(usize, f64)> = Vec::new();
    let mut items: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad integer `{s}`")))
        };
        match tok.as_slice() {
            ["universe", u] => universe = Some(num(u)?),
            ["weight", u, w] => {
                let w: f64 = w
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad weight `{w}`")))?;
                weights.push((num(u)?, w));
            }
            ["item", idx, "covers", rest @ ..] => {
                let cover = rest.iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
                items.push((num(idx)?, cover));
            }
            _ => return Err(Error::parse(line_no, format!("unrecognized line `{line}`"))),
        }
    }
    let universe = universe.ok_or_else(|| Error::parse(1, "missing `universe` line"))?;
    let n = items.iter().map(|(i, _)| i + 1).max().unwrap_or(0);
    let mut covers = vec![Vec::new(); n];
    for (i, c) in items {
        covers[i] = c;
    }
    let mut w = vec![1.0; universe];
    for (u, x) in weights {
        if u >= universe {
            return Err(Error::InvalidObjective(format!(
                "weight for item {u} outside universe"
            )));
        }
        w[u] = x;
    }
    Ok((covers, w))
}
