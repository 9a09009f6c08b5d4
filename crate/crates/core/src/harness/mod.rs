//! Seeded experiment runner.
//!
//! Repetition `r` draws its instance from `derive(seed, r)`, and every
//! algorithm in that repetition runs on the same instance with the same
//! algorithm seed. Repetitions run in parallel; rows come back in
//! (environment, algorithm, repetition) order whatever the thread count.

pub mod config;
pub mod emit;
pub mod render;

use std::time::Instant;

use rayon::prelude::*;

use crate::continuous_greedy::{self, CgConfig, GradientMode};
use crate::env::{self, NavMap, SyntheticSpec};
use crate::mdp::{DeterministicPolicy, LeveledMdp};
use crate::objective::{self, parse_coverage, Objective};
use crate::{baselines, rng, rounding, Error, Result};

pub use config::{AlgSpec, EnvSpec, ExperimentConfig, GradientChoice, OutputPaths, Rounding};
pub use emit::{ResultRow, SummaryRow};

const ALG_TAG: u64 = 0xa1;

/// A built instance.
pub struct Instance {
    pub mdp: LeveledMdp,
    pub objective: Box<dyn Objective>,
    /// The map, for navigation instances.
    pub map: Option<NavMap>,
}

/// Environment data loaded once per run.
enum Prepared {
    Synthetic(SyntheticSpec),
    Nav {
        map: NavMap,
        lambda: f64,
        targets: Option<usize>,
    },
    Cardinality {
        n: usize,
        k: usize,
        items: Option<(Vec<Vec<usize>>, Vec<f64>)>,
        universe: usize,
        density: f64,
    },
}

fn prepare(spec: &EnvSpec) -> Result<Prepared> {
    Ok(match spec {
        EnvSpec::Synthetic {
            n, t, d, lambda, ..
        } => Prepared::Synthetic(SyntheticSpec {
            n: *n,
            d: *d,
            t: *t,
            lambda: *lambda,
            seed: 0,
        }),
        EnvSpec::Nav {
            map,
            lambda,
            targets,
            ..
        } => Prepared::Nav {
            map: env::read_map(map)?,
            lambda: *lambda,
            targets: *targets,
        },
        EnvSpec::Cardinality {
            n,
            k,
            objective,
            universe,
            density,
            ..
        } => {
            let items = match objective {
                Some(path) => {
                    let file = std::fs::File::open(path)?;
                    let (covers, weights) = parse_coverage(std::io::BufReader::new(file))?;
                    if covers.len() != *n {
                        return Err(Error::Config(format!(
                            "coverage file lists {} items but n = {n}",
                            covers.len()
                        )));
                    }
                    Some((covers, weights))
                }
                None => None,
            };
            Prepared::Cardinality {
                n: *n,
                k: *k,
                items,
                universe: *universe,
                density: *density,
            }
        }
    })
}

fn instantiate(p: &Prepared, seed: u64) -> Result<Instance> {
    match p {
        Prepared::Synthetic(spec) => {
            let (mdp, obj) = env::build_synthetic(&SyntheticSpec { seed, ..*spec })?;
            Ok(Instance {
                mdp,
                objective: Box::new(obj),
                map: None,
            })
        }
        Prepared::Nav {
            map,
            lambda,
            targets,
        } => {
            let map = match targets {
                Some(d) => map.with_random_targets(*d, seed)?,
                None => map.clone(),
            };
            let (mdp, obj) = env::build_nav(&map, *lambda)?;
            Ok(Instance {
                mdp,
                objective: Box::new(obj),
                map: Some(map),
            })
        }
        Prepared::Cardinality {
            n,
            k,
            items,
            universe,
            density,
        } => {
            let mdp = env::build_cardinality(*n, *k)?;
            let (covers, weights) = match items {
                Some(x) => x.clone(),
                None => env::random_coverage_items(*n, *universe, *density, seed),
            };
            let obj = env::cardinality_objective(&mdp, &covers, weights)?;
            Ok(Instance {
                mdp,
                objective: Box::new(obj),
                map: None,
            })
        }
    }
}

/// Build repetition `rep` of an environment as `bench` would.
pub fn build_instance(spec: &EnvSpec, master_seed: u64, rep: usize) -> Result<Instance> {
    instantiate(&prepare(spec)?, repetition_seed(master_seed, rep))
}

pub fn repetition_seed(master_seed: u64, rep: usize) -> u64 {
    rng::derive(&[master_seed, rep as u64])
}

/// Seed handed to every algorithm of a repetition.
pub fn algorithm_seed(rep_seed: u64) -> u64 {
    rng::derive(&[rep_seed, ALG_TAG])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgOutcome {
    /// True objective of the final policy; for unrounded CG, the exact mean
    /// over the mixture's members.
    pub value: f64,
    /// The deterministic policy, when the algorithm produces one.
    pub policy: Option<DeterministicPolicy>,
}

pub fn run_algorithm(
    mdp: &LeveledMdp,
    obj: &dyn Objective,
    alg: &AlgSpec,
    seed: u64,
) -> Result<AlgOutcome> {
    let (policy, value) = match alg {
        AlgSpec::Dp { l, .. } => baselines::dp_baseline(mdp, obj, *l)?,
        AlgSpec::Greedy { l, .. } => baselines::greedy_baseline(mdp, obj, *l)?,
        AlgSpec::Cg {
            delta,
            samples,
            rounding: mode,
            restarts,
            gradient,
            round_samples,
            final_samples,
            ..
        } => {
            let cfg = CgConfig {
                delta: *delta,
                samples: *samples,
                seed,
                gradient_mode: match gradient {
                    GradientChoice::MonteCarlo => GradientMode::MonteCarlo,
                    GradientChoice::Exact => GradientMode::ExactWhenAvailable,
                },
                final_samples: *final_samples,
                ..CgConfig::default()
            };
            let result = continuous_greedy::run_with_restarts(mdp, obj, &cfg, *restarts)?;
            let policy = match mode {
                Rounding::None => {
                    if !mdp.is_deterministic() {
                        return Err(Error::InvalidMdp(
                            "unrounded CG values need deterministic transitions".into(),
                        ));
                    }
                    let value = objective::mixture_value(mdp, obj, &result.mixture)?;
                    return Ok(AlgOutcome {
                        value,
                        policy: None,
                    });
                }
                Rounding::High => {
                    rounding::round_high(mdp, obj, &result.mixture, *round_samples, seed)?
                }
                Rounding::Sub => {
                    rounding::round_sub(mdp, obj, &result.y_final, *round_samples, seed)?
                }
            };
            let value = objective::policy_value(mdp, obj, &policy)?;
            (policy, value)
        }
    };
    Ok(AlgOutcome {
        value,
        policy: Some(policy),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

impl Experiment {
    pub fn csv(&self) -> String {
        emit::results_csv(&self.rows)
    }

    pub fn summary_csv(&self) -> String {
        emit::summary_csv(&self.summary)
    }

    pub fn json(&self) -> String {
        emit::results_json(&self.rows, &self.summary)
    }

    /// Write whichever outputs the config names.
    pub fn write(&self, paths: &OutputPaths) -> Result<()> {
        if let Some(p) = &paths.csv {
            emit::write_file(p, &self.csv())?;
        }
        if let Some(p) = &paths.summary_csv {
            emit::write_file(p, &self.summary_csv())?;
        }
        if let Some(p) = &paths.json {
            emit::write_file(p, &self.json())?;
        }
        Ok(())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.check()?;
    let prepared = cfg
        .environments
        .iter()
        .map(prepare)
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..cfg.environments.len())
        .flat_map(|e| (0..cfg.repetitions).map(move |r| (e, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    // one Vec per (env, rep), algorithms in config order
    let cells: Vec<Vec<ResultRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(e, rep)| run_cell(cfg, &prepared[e], e, rep))
            .collect()
    });
    let mut rows = Vec::with_capacity(tasks.len() * cfg.algorithms.len());
    for e in 0..cfg.environments.len() {
        for a in 0..cfg.algorithms.len() {
            for rep in 0..cfg.repetitions {
                rows.push(cells[e * cfg.repetitions + rep][a].clone());
            }
        }
    }
    let order: Vec<(String, String)> = cfg
        .environments
        .iter()
        .flat_map(|env| cfg.algorithms.iter().map(move |alg| (env.id(), alg.id())))
        .collect();
    // duplicate ids share a summary line
    let mut unique = Vec::new();
    for key in order {
        if !unique.contains(&key) {
            unique.push(key);
        }
    }
    let summary = emit::summarize(&rows, &unique);
    Ok(Experiment { rows, summary })
}

fn run_cell(cfg: &ExperimentConfig, prepared: &Prepared, e: usize, rep: usize) -> Vec<ResultRow> {
    let env_id = cfg.environments[e].id();
    let rep_seed = repetition_seed(cfg.seed, rep);
    let instance = instantiate(prepared, rep_seed);
    cfg.algorithms
        .iter()
        .map(|alg| {
            let start = Instant::now();
            let outcome = instance
                .as_ref()
                .map_err(|err| err.to_string())
                .and_then(|inst| {
                    run_algorithm(
                        &inst.mdp,
                        inst.objective.as_ref(),
                        alg,
                        algorithm_seed(rep_seed),
                    )
                    .map_err(|err| err.to_string())
                });
            let wall_ms = if cfg.record_timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            let (value, error) = match outcome {
                Ok(o) if o.value.is_finite() => (Some(o.value), None),
                Ok(o) => (None, Some(format!("non-finite value {}", o.value))),
                Err(msg) => (None, Some(msg)),
            };
            ResultRow {
                env: env_id.clone(),
                algorithm: alg.id(),
                repetition: rep,
                seed: rep_seed,
                value,
                wall_ms,
                error,
            }
        })
        .collect()
}
