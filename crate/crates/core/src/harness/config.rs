//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! repetitions = 20
//! jobs = 4
//!
//! [output]
//! csv = "results.csv"
//! summary_csv = "summary.csv"
//!
//! [[environment]]
//! kind = "synthetic"
//! n = 10
//! t = 2
//!
//! [[algorithm]]
//! kind = "cg"
//! delta = 0.01
//! samples = 10
//! rounding = "high"
//!
//! [[algorithm]]
//! kind = "dp"
//! l = 3
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Worker threads; 0 means one per core.
    #[serde(default)]
    pub jobs: usize,
    /// Fill `wall_ms`; off by default so outputs stay byte-identical.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(rename = "environment")]
    pub environments: Vec<EnvSpec>,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub summary_csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

fn one() -> usize {
    1
}
fn default_d() -> usize {
    10
}
fn default_lambda() -> f64 {
    1e-5
}
fn default_delta() -> f64 {
    0.01
}
fn default_samples() -> usize {
    10
}
fn default_round_samples() -> usize {
    100
}
fn default_final_samples() -> usize {
    1000
}
fn default_universe() -> usize {
    20
}
fn default_density() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnvSpec {
    Synthetic {
        id: Option<String>,
        n: usize,
        t: usize,
        #[serde(default = "default_d")]
        d: usize,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    Nav {
        id: Option<String>,
        /// Relative paths resolve against the config file's directory.
        map: PathBuf,
        #[serde(default = "default_lambda")]
        lambda: f64,
        /// Draw this many targets among navigable cells per repetition
        /// instead of using the map's own.
        targets: Option<usize>,
    },
    Cardinality {
        id: Option<String>,
        n: usize,
        k: usize,
        /// Coverage file; a random instance per repetition when absent.
        objective: Option<PathBuf>,
        #[serde(default = "default_universe")]
        universe: usize,
        #[serde(default = "default_density")]
        density: f64,
    },
}

impl EnvSpec {
    pub fn id(&self) -> String {
        match self {
            EnvSpec::Synthetic { id: Some(id), .. }
            | EnvSpec::Nav { id: Some(id), .. }
            | EnvSpec::Cardinality { id: Some(id), .. } => id.clone(),
            EnvSpec::Synthetic { n, t, .. } => format!("syn_n{n}_t{t}"),
            EnvSpec::Nav { map, .. } => format!(
                "nav_{}",
                map.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            ),
            EnvSpec::Cardinality { n, k, .. } => format!("card_n{n}_k{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    None,
    #[default]
    High,
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientChoice {
    #[default]
    MonteCarlo,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AlgSpec {
    Cg {
        id: Option<String>,
        #[serde(default = "default_delta")]
        delta: f64,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        rounding: Rounding,
        #[serde(default = "one")]
        restarts: usize,
        #[serde(default)]
        gradient: GradientChoice,
        #[serde(default = "default_round_samples")]
        round_samples: usize,
        #[serde(default = "default_final_samples")]
        final_samples: usize,
    },
    Dp {
        id: Option<String>,
        #[serde(default = "one")]
        l: usize,
    },
    Greedy {
        id: Option<String>,
        #[serde(default = "one")]
        l: usize,
    },
}

impl AlgSpec {
    pub fn id(&self) -> String {
        match self {
            AlgSpec::Cg { id: Some(id), .. }
            | AlgSpec::Dp { id: Some(id), .. }
            | AlgSpec::Greedy { id: Some(id), .. } => id.clone(),
            AlgSpec::Cg {
                delta,
                samples,
                rounding,
                ..
            } => {
                let r = match rounding {
                    Rounding::None => "",
                    Rounding::High => "+high",
                    Rounding::Sub => "+sub",
                };
                format!("cg_{delta}_{samples}{r}")
            }
            AlgSpec::Dp { l, .. } => format!("dp_aug{l}"),
            AlgSpec::Greedy { l, .. } => format!("greedy_aug{l}"),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Read a config file; relative map, objective and output paths are
    /// taken relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for env in &mut self.environments {
            match env {
                EnvSpec::Nav { map, .. } => fix(map),
                EnvSpec::Cardinality {
                    objective: Some(o), ..
                } => fix(o),
                _ => {}
            }
        }
        for p in [
            &mut self.output.csv,
            &mut self.output.summary_csv,
            &mut self.output.json,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        if self.environments.is_empty() {
            return Err(Error::Config(
                "at least one [[environment]] is required".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config(
                "at least one [[algorithm]] is required".into(),
            ));
        }
        for alg in &self.algorithms {
            match alg {
                AlgSpec::Cg {
                    delta,
                    samples,
                    restarts,
                    ..
                } => {
                    crate::CgConfig {
                        delta: *delta,
                        samples: *samples,
                        ..crate::CgConfig::default()
                    }
                    .iterations()?;
                    if *samples == 0 || *restarts == 0 {
                        return Err(Error::Config("samples and restarts must be >= 1".into()));
                    }
                }
                AlgSpec::Dp { l, .. } | AlgSpec::Greedy { l, .. } => {
                    if *l == 0 {
                        return Err(Error::Config("l must be >= 1".into()));
                    }
                }
            }
        }
        Ok(())
    }
}
