//! Beta-Bernoulli beliefs with a forgetting factor, a decaying epistemic
//! cache, uncertainty-driven query strategies and a deterministic simulator
//! of a non-stationary commons.
//!
//! ```
//! use episteme::{BetaBelief, Evidence};
//!
//! let b = BetaBelief::new_prior(1.0, 1.0, 0.95).unwrap();
//! let b = b.update(Evidence::SUPPORT);
//! assert!(b.mean() > 0.5);
//! ```

pub mod belief;
pub mod config;
pub mod engine;
pub mod environment;
pub mod error;
pub mod report;
pub mod store;
pub mod strategy;

/// Discrete simulation time.
pub type Tick = u64;

pub use belief::{n_eq, BetaBelief, Evidence};
pub use config::ExperimentConfig;
pub use engine::{
    recovery_time, run, run_with, Execution, MeanRecord, MetricsRecord, MetricsSeries,
};
pub use environment::{AccessDistribution, AccessSampler, Environment, GroundTruthSchedule};
pub use error::{Error, Result};
pub use report::RunManifest;
pub use store::{EpistemicStore, PropositionId, StoreConfig, StoreEntry};
pub use strategy::{ResetEvent, StrategyKind};
