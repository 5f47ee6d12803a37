//! The simulated commons: ground truth over time, access skew across
//! propositions, candidate batches and Bernoulli feedback.

use std::collections::BTreeMap;

use rand::Rng;

use crate::belief::Evidence;
use crate::error::{Error, Result};
use crate::store::PropositionId;
use crate::Tick;

/// Piecewise-constant ground truth. Each segment is `(start_tick, theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthSchedule {
    segments: Vec<(Tick, f64)>,
    overrides: BTreeMap<PropositionId, Vec<(Tick, f64)>>,
}

fn check_segments(segments: &[(Tick, f64)], field: &str) -> Result<()> {
    let Some(&(first, _)) = segments.first() else {
        return Err(Error::config(field, "needs at least one segment"));
    };
    if first != 1 {
        return Err(Error::config(
            field,
            format!("first segment must start at tick 1, not {first}"),
        ));
    }
    for pair in segments.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::config(
                field,
                format!(
                    "segment starts must be strictly increasing ({} then {})",
                    pair[0].0, pair[1].0
                ),
            ));
        }
    }
    for &(start, theta) in segments {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::config(
                field,
                format!("theta {theta} at tick {start} is outside [0, 1]"),
            ));
        }
    }
    Ok(())
}

fn lookup(segments: &[(Tick, f64)], t: Tick) -> f64 {
    let idx = segments.partition_point(|&(start, _)| start <= t);
    segments[idx - 1].1
}

impl GroundTruthSchedule {
    pub fn new(segments: Vec<(Tick, f64)>) -> Result<Self> {
        check_segments(&segments, "schedule")?;
        Ok(GroundTruthSchedule {
            segments,
            overrides: BTreeMap::new(),
        })
    }

    pub fn constant(theta: f64) -> Result<Self> {
        Self::new(vec![(1, theta)])
    }

    /// Consensus at 0.8 for ticks 1..=500, flipping to 0.2 from tick 501 on.
    pub fn consensus_shift() -> Self {
        GroundTruthSchedule {
            segments: vec![(1, 0.8), (501, 0.2)],
            overrides: BTreeMap::new(),
        }
    }

    /// Gives `id` its own schedule in place of the shared one.
    pub fn with_override(mut self, id: PropositionId, segments: Vec<(Tick, f64)>) -> Result<Self> {
        check_segments(&segments, &format!("schedule_overrides[{id}]"))?;
        self.overrides.insert(id, segments);
        Ok(self)
    }

    pub fn segments(&self) -> &[(Tick, f64)] {
        &self.segments
    }

    pub fn overrides(&self) -> &BTreeMap<PropositionId, Vec<(Tick, f64)>> {
        &self.overrides
    }

    pub fn theta_star(&self, id: PropositionId, t: Tick) -> Result<f64> {
        if t < 1 {
            return Err(Error::TickBeforeSchedule { t });
        }
        let segments = self.overrides.get(&id).unwrap_or(&self.segments);
        Ok(lookup(segments, t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AccessDistribution {
    Uniform {
        k: usize,
    },
    /// Id `i` has popularity rank `i + 1`.
    Zipf {
        k: usize,
        s: f64,
    },
}

impl AccessDistribution {
    pub fn k(&self) -> usize {
        match *self {
            AccessDistribution::Uniform { k } | AccessDistribution::Zipf { k, .. } => k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k() == 0 {
            return Err(Error::config("k", "must be positive"));
        }
        if let AccessDistribution::Zipf { s, .. } = *self {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config(
                    "zipf_s",
                    format!("{s} is not a positive exponent"),
                ));
            }
        }
        Ok(())
    }

    /// Probability mass per id, summing to one.
    pub fn pmf(&self) -> Vec<f64> {
        match *self {
            AccessDistribution::Uniform { k } => vec![1.0 / k as f64; k],
            AccessDistribution::Zipf { k, s } => {
                let weights: Vec<f64> = (1..=k).map(|r| (r as f64).powf(-s)).collect();
                let total: f64 = weights.iter().sum();
                weights.into_iter().map(|w| w / total).collect()
            }
        }
    }
}

/// Inverse-CDF sampler over an access distribution.
#[derive(Debug, Clone)]
pub struct AccessSampler {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl AccessSampler {
    pub fn new(dist: &AccessDistribution) -> Result<Self> {
        dist.validate()?;
        let pmf = dist.pmf();
        let cdf = pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(AccessSampler { pmf, cdf })
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> PropositionId {
        let u: f64 = rng.gen();
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }

    /// `m` i.i.d. draws; duplicates are allowed.
    pub fn draw_candidates<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<PropositionId> {
        (0..m).map(|_| self.draw(rng)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    schedule: GroundTruthSchedule,
    sampler: AccessSampler,
}

impl Environment {
    pub fn new(schedule: GroundTruthSchedule, access: &AccessDistribution) -> Result<Self> {
        Ok(Environment {
            schedule,
            sampler: AccessSampler::new(access)?,
        })
    }

    pub fn schedule(&self) -> &GroundTruthSchedule {
        &self.schedule
    }

    pub fn sampler(&self) -> &AccessSampler {
        &self.sampler
    }

    pub fn k(&self) -> usize {
        self.sampler.pmf.len()
    }

    pub fn theta_star(&self, id: PropositionId, t: Tick) -> Result<f64> {
        self.schedule.theta_star(id, t)
    }

    /// One Bernoulli draw with success probability `theta_star(id, t)`.
    pub fn observe<R: Rng + ?Sized>(
        &self,
        id: PropositionId,
        t: Tick,
        rng: &mut R,
    ) -> Result<Evidence> {
        let theta = self.theta_star(id, t)?;
        Ok(Evidence::from_bool(rng.gen::<f64>() < theta))
    }
}
