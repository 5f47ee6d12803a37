//! Deterministic tick loop and cross-seed aggregation.
//!
//! Each seed is an independent replication with its own store, rng and
//! metrics buffer. Replications may run on the rayon pool (`parallel`
//! feature); results are always merged in seed order so the output does not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::environment::Environment;
use crate::error::Result;
use crate::store::EpistemicStore;
use crate::Tick;

/// Consecutive ticks a series must stay under the threshold to count as
/// recovered.
pub const RECOVERY_HOLD: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub t: Tick,
    pub mse_unweighted: f64,
    pub mse_weighted: f64,
    pub mean_variance: f64,
    pub active_count: u64,
    pub evictions_cum: u64,
    pub resets_cum: u64,
}

/// Pointwise cross-seed average of [`MetricsRecord`]; counters become reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanRecord {
    pub t: Tick,
    pub mse_unweighted: f64,
    pub mse_weighted: f64,
    pub mean_variance: f64,
    pub active_count: f64,
    pub evictions_cum: f64,
    pub resets_cum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub seeds: Vec<u64>,
    pub per_seed: Vec<Vec<MetricsRecord>>,
    pub mean: Vec<MeanRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Seeds on the rayon pool. Same as `Sequential` without the `parallel`
    /// feature.
    #[default]
    Parallel,
}

pub fn run(cfg: &ExperimentConfig) -> Result<MetricsSeries> {
    run_with(cfg, Execution::default())
}

pub fn run_with(cfg: &ExperimentConfig, execution: Execution) -> Result<MetricsSeries> {
    cfg.validate()?;
    let per_seed = match execution {
        Execution::Sequential => cfg
            .seeds
            .iter()
            .map(|&seed| run_seed(cfg, seed))
            .collect::<Result<Vec<_>>>()?,
        #[cfg(feature = "parallel")]
        Execution::Parallel => cfg
            .seeds
            .par_iter()
            .map(|&seed| run_seed(cfg, seed))
            .collect::<Result<Vec<_>>>()?,
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => return run_with(cfg, Execution::Sequential),
    };
    let mean = cross_seed_mean(&per_seed);
    Ok(MetricsSeries {
        seeds: cfg.seeds.clone(),
        per_seed,
        mean,
    })
}

/// One replication, ticks `1..=horizon`.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<MetricsRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = EpistemicStore::new(cfg.store_config(), cfg.k)?;
    let env = Environment::new(cfg.schedule.clone(), &cfg.access)?;
    let snapshot = cfg.strategy.wants_snapshot();
    let mut resets = 0u64;
    let mut records = Vec::with_capacity(cfg.horizon as usize);

    for t in 1..=cfg.horizon {
        let candidates = env.sampler().draw_candidates(cfg.batch_m, &mut rng);
        let id = cfg.strategy.select(&candidates, &mut store, t, &mut rng)?;
        let before = if snapshot {
            Some(store.get_or_init(id, t)?)
        } else {
            None
        };
        let evidence = env.observe(id, t, &mut rng)?;
        store.record(id, evidence, t)?;
        if let Some(before) = before {
            if cfg
                .strategy
                .after_observe(id, &before, evidence, &mut store, t)?
                .is_some()
            {
                resets += 1;
            }
        }
        store.sweep_evict(t);
        records.push(compute_metrics(&store, &env, t, resets)?);
    }
    Ok(records)
}

/// Squared error of the point estimates against the ground truth at `t`.
/// Ids outside the active set are scored at the prior.
pub fn compute_metrics(
    store: &EpistemicStore,
    env: &Environment,
    t: Tick,
    resets_cum: u64,
) -> Result<MetricsRecord> {
    let prior = store.prior();
    let pmf = env.sampler().pmf();
    let mut active = store.iter_active(t).peekable();
    let (mut unweighted, mut weighted, mut variance) = (0.0, 0.0, 0.0);
    let mut active_count = 0u64;

    for (id, &p) in pmf.iter().enumerate() {
        let belief = match active.peek() {
            Some(&(aid, b)) if aid == id => {
                active.next();
                active_count += 1;
                b
            }
            _ => prior,
        };
        let err = belief.mean() - env.theta_star(id, t)?;
        let sq = err * err;
        unweighted += sq;
        weighted += p * sq;
        variance += belief.variance();
    }
    let k = pmf.len() as f64;
    Ok(MetricsRecord {
        t,
        mse_unweighted: unweighted / k,
        mse_weighted: weighted,
        mean_variance: variance / k,
        active_count,
        evictions_cum: store.evictions_total(),
        resets_cum,
    })
}

pub fn cross_seed_mean(per_seed: &[Vec<MetricsRecord>]) -> Vec<MeanRecord> {
    let Some(first) = per_seed.first() else {
        return Vec::new();
    };
    let n = per_seed.len() as f64;
    (0..first.len())
        .map(|i| {
            let mut m = MeanRecord {
                t: first[i].t,
                mse_unweighted: 0.0,
                mse_weighted: 0.0,
                mean_variance: 0.0,
                active_count: 0.0,
                evictions_cum: 0.0,
                resets_cum: 0.0,
            };
            for series in per_seed {
                let r = &series[i];
                debug_assert_eq!(r.t, m.t);
                m.mse_unweighted += r.mse_unweighted;
                m.mse_weighted += r.mse_weighted;
                m.mean_variance += r.mean_variance;
                m.active_count += r.active_count as f64;
                m.evictions_cum += r.evictions_cum as f64;
                m.resets_cum += r.resets_cum as f64;
            }
            m.mse_unweighted /= n;
            m.mse_weighted /= n;
            m.mean_variance /= n;
            m.active_count /= n;
            m.evictions_cum /= n;
            m.resets_cum /= n;
            m
        })
        .collect()
}

/// Ticks after `shift_tick` until the cross-seed mean unweighted MSE drops
/// below `threshold` and stays there for [`RECOVERY_HOLD`] ticks.
pub fn recovery_time(series: &MetricsSeries, shift_tick: Tick, threshold: f64) -> Option<Tick> {
    let mse: Vec<(Tick, f64)> = series
        .mean
        .iter()
        .map(|r| (r.t, r.mse_unweighted))
        .collect();
    recovery_time_of(&mse, shift_tick, threshold)
}

pub fn recovery_time_of(mse: &[(Tick, f64)], shift_tick: Tick, threshold: f64) -> Option<Tick> {
    let start = mse.iter().position(|&(t, _)| t >= shift_tick)?;
    let tail = &mse[start..];
    let mut run = 0usize;
    for (i, &(_, v)) in tail.iter().enumerate() {
        if v < threshold {
            run += 1;
            if run == RECOVERY_HOLD {
                let (t, _) = tail[i + 1 - RECOVERY_HOLD];
                return Some(t - shift_tick);
            }
        } else {
            run = 0;
        }
    }
    None
}
