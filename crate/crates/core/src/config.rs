//! Experiment configuration, JSON config files and the named presets.
//!
//! A config file is a flat JSON object. Every key is optional; omitted keys
//! fall back to the `preset` named in the file, or to
//! [`ExperimentConfig::default`] when there is none.
//!
//! ```json
//! { "preset": "exp3-uncertainty", "horizon_T": 800, "seeds": [1, 2, 3] }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::{AccessDistribution, GroundTruthSchedule};
use crate::error::{Error, Result};
use crate::store::{PropositionId, StoreConfig};
use crate::strategy::{StrategyKind, DEFAULT_N_RESET, DEFAULT_TAU, DEFAULT_TIE_EPSILON};
use crate::Tick;

pub const PRESET_NAMES: [&str; 7] = [
    "exp1-static",
    "exp1-high",
    "exp1-low",
    "exp2-random",
    "exp2-uncertainty",
    "exp3-random",
    "exp3-uncertainty",
];

pub const ZIPF_EXPONENT: f64 = 1.1;
pub const SHIFT_TICK: Tick = 501;

/// Seeds shipped with every preset.
pub fn default_seeds() -> Vec<u64> {
    (1..=20).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub k: usize,
    pub horizon: Tick,
    pub gamma: f64,
    pub strategy: StrategyKind,
    pub access: AccessDistribution,
    pub schedule: GroundTruthSchedule,
    pub batch_m: usize,
    pub n_min: f64,
    pub capacity: Option<usize>,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentConfig {
    /// 100 propositions, consensus shift at tick 501, 2000 ticks, batches of
    /// 10, uniform access, random selection, `gamma = 0.999`.
    fn default() -> Self {
        ExperimentConfig {
            k: 100,
            horizon: 2000,
            gamma: 0.999,
            strategy: StrategyKind::Random,
            access: AccessDistribution::Uniform { k: 100 },
            schedule: GroundTruthSchedule::consensus_shift(),
            batch_m: 10,
            n_min: 0.5,
            capacity: None,
            prior_alpha: 1.0,
            prior_beta: 1.0,
            seeds: default_seeds(),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let base = ExperimentConfig::default();
        let zipf = AccessDistribution::Zipf {
            k: base.k,
            s: ZIPF_EXPONENT,
        };
        let cfg = match name {
            "exp1-static" => ExperimentConfig { gamma: 1.0, ..base },
            "exp1-high" => ExperimentConfig {
                gamma: 0.999,
                ..base
            },
            "exp1-low" => ExperimentConfig {
                gamma: 0.95,
                ..base
            },
            "exp2-random" => base,
            "exp2-uncertainty" => ExperimentConfig {
                strategy: StrategyKind::uncertainty(),
                ..base
            },
            "exp3-random" => ExperimentConfig {
                access: zipf,
                ..base
            },
            "exp3-uncertainty" => ExperimentConfig {
                access: zipf,
                strategy: StrategyKind::uncertainty(),
                ..base
            },
            other => return Err(Error::UnknownPreset(other.to_string())),
        };
        Ok(cfg)
    }

    pub fn store_config(&self) -> StoreConfig {
        StoreConfig {
            gamma: self.gamma,
            n_min: self.n_min,
            capacity: self.capacity,
            prior_alpha: self.prior_alpha,
            prior_beta: self.prior_beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k", "must be positive"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon_T", "must be positive"));
        }
        if self.batch_m == 0 {
            return Err(Error::config("batch_m", "must be positive"));
        }
        if self.access.k() != self.k {
            return Err(Error::config(
                "access",
                format!("covers {} propositions but k = {}", self.access.k(), self.k),
            ));
        }
        self.access.validate()?;
        self.store_config().validate()?;
        self.strategy.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        let mut seen = BTreeSet::new();
        for &s in &self.seeds {
            if !seen.insert(s) {
                return Err(Error::config("seeds", format!("seed {s} appears twice")));
            }
        }
        if let Some(&id) = self.schedule.overrides().keys().find(|&&id| id >= self.k) {
            return Err(Error::config(
                "schedule_overrides",
                format!("id {id} is outside 0..{}", self.k),
            ));
        }
        Ok(())
    }

    /// Parses a JSON config document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ConfigFile = serde_json::from_str(text)?;
        let cfg = file.resolve()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Preset name or path to a JSON file.
    pub fn load_named(name_or_path: &str) -> Result<Self> {
        if PRESET_NAMES.contains(&name_or_path) {
            Self::preset(name_or_path)
        } else {
            Self::load(Path::new(name_or_path))
        }
    }

    /// The fully spelled-out file form of this config.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&ConfigFile::from(self))
            .expect("config serializes to JSON");
        text.push('\n');
        text
    }
}

/// Flat on-disk form of [`ExperimentConfig`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(
        default,
        rename = "horizon_T",
        alias = "horizon",
        skip_serializing_if = "Option::is_none"
    )]
    horizon: Option<Tick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tie_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_reset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    access: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zipf_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<Vec<(Tick, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule_overrides: Option<BTreeMap<PropositionId, Vec<(Tick, f64)>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    batch_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_min: Option<f64>,
    /// Absent or `null` means unbounded.
    #[serde(default)]
    capacity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prior_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prior_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seeds: Option<Vec<u64>>,
}

impl From<&ExperimentConfig> for ConfigFile {
    fn from(cfg: &ExperimentConfig) -> Self {
        let (access, zipf_s) = match cfg.access {
            AccessDistribution::Uniform { .. } => ("uniform", None),
            AccessDistribution::Zipf { s, .. } => ("zipf", Some(s)),
        };
        let (tie_epsilon, tau, n_reset) = match &cfg.strategy {
            StrategyKind::Random => (None, None, None),
            StrategyKind::Uncertainty { tie_epsilon } => (Some(*tie_epsilon), None, None),
            StrategyKind::WithSurprisalReset {
                inner,
                tau,
                n_reset,
            } => {
                let eps = match **inner {
                    StrategyKind::Uncertainty { tie_epsilon } => Some(tie_epsilon),
                    _ => None,
                };
                (eps, Some(*tau), Some(*n_reset))
            }
        };
        let overrides = cfg.schedule.overrides();
        ConfigFile {
            preset: None,
            k: Some(cfg.k),
            horizon: Some(cfg.horizon),
            gamma: Some(cfg.gamma),
            strategy: Some(cfg.strategy.name().to_string()),
            tie_epsilon,
            tau,
            n_reset,
            access: Some(access.to_string()),
            zipf_s,
            schedule: Some(cfg.schedule.segments().to_vec()),
            schedule_overrides: (!overrides.is_empty()).then(|| overrides.clone()),
            batch_m: Some(cfg.batch_m),
            n_min: Some(cfg.n_min),
            capacity: cfg.capacity,
            prior_alpha: Some(cfg.prior_alpha),
            prior_beta: Some(cfg.prior_beta),
            seeds: Some(cfg.seeds.clone()),
        }
    }
}

impl ConfigFile {
    fn resolve(self) -> Result<ExperimentConfig> {
        let base = match &self.preset {
            Some(name) => ExperimentConfig::preset(name)?,
            None => ExperimentConfig::default(),
        };
        let k = self.k.unwrap_or(base.k);

        let (base_eps, base_tau, base_reset) = match &base.strategy {
            StrategyKind::Uncertainty { tie_epsilon } => {
                (*tie_epsilon, DEFAULT_TAU, DEFAULT_N_RESET)
            }
            StrategyKind::WithSurprisalReset { tau, n_reset, .. } => {
                (DEFAULT_TIE_EPSILON, *tau, *n_reset)
            }
            StrategyKind::Random => (DEFAULT_TIE_EPSILON, DEFAULT_TAU, DEFAULT_N_RESET),
        };
        let tie_epsilon = self.tie_epsilon.unwrap_or(base_eps);
        let tau = self.tau.unwrap_or(base_tau);
        let n_reset = self.n_reset.unwrap_or(base_reset);
        let strategy = match self.strategy.as_deref() {
            None => match base.strategy {
                StrategyKind::Random => StrategyKind::Random,
                StrategyKind::Uncertainty { .. } => StrategyKind::Uncertainty { tie_epsilon },
                StrategyKind::WithSurprisalReset { inner, .. } => {
                    StrategyKind::WithSurprisalReset { inner, tau, n_reset }
                }
            },
            Some("random") => StrategyKind::Random,
            Some("uncertainty") => StrategyKind::Uncertainty { tie_epsilon },
            Some("uncertainty+reset") => StrategyKind::WithSurprisalReset {
                inner: Box::new(StrategyKind::Uncertainty { tie_epsilon }),
                tau,
                n_reset,
            },
            Some("random+reset") => StrategyKind::WithSurprisalReset {
                inner: Box::new(StrategyKind::Random),
                tau,
                n_reset,
            },
            Some(other) => {
                return Err(Error::config(
                    "strategy",
                    format!(
                        "unknown strategy `{other}` (expected random, uncertainty, uncertainty+reset or random+reset)"
                    ),
                ))
            }
        };

        let base_s = match base.access {
            AccessDistribution::Zipf { s, .. } => s,
            AccessDistribution::Uniform { .. } => ZIPF_EXPONENT,
        };
        let access = match self.access.as_deref() {
            None => match base.access {
                AccessDistribution::Uniform { .. } if self.zipf_s.is_none() => {
                    AccessDistribution::Uniform { k }
                }
                _ => AccessDistribution::Zipf {
                    k,
                    s: self.zipf_s.unwrap_or(base_s),
                },
            },
            Some("uniform") => AccessDistribution::Uniform { k },
            Some("zipf") => AccessDistribution::Zipf {
                k,
                s: self.zipf_s.unwrap_or(base_s),
            },
            Some(other) => {
                return Err(Error::config(
                    "access",
                    format!("unknown access distribution `{other}` (expected uniform or zipf)"),
                ))
            }
        };

        let mut schedule = match self.schedule {
            Some(segments) => GroundTruthSchedule::new(segments)?,
            None => GroundTruthSchedule::new(base.schedule.segments().to_vec())?,
        };
        let overrides = self
            .schedule_overrides
            .unwrap_or_else(|| base.schedule.overrides().clone());
        for (id, segments) in overrides {
            schedule = schedule.with_override(id, segments)?;
        }

        Ok(ExperimentConfig {
            k,
            horizon: self.horizon.unwrap_or(base.horizon),
            gamma: self.gamma.unwrap_or(base.gamma),
            strategy,
            access,
            schedule,
            batch_m: self.batch_m.unwrap_or(base.batch_m),
            n_min: self.n_min.unwrap_or(base.n_min),
            capacity: self.capacity.or(base.capacity),
            prior_alpha: self.prior_alpha.unwrap_or(base.prior_alpha),
            prior_beta: self.prior_beta.unwrap_or(base.prior_beta),
            seeds: self.seeds.unwrap_or(base.seeds),
        })
    }
}
