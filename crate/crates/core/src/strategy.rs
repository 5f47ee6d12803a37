//! Query selection: which offered proposition the agent engages with.

use rand::Rng;

use crate::belief::{BetaBelief, Evidence};
use crate::error::{Error, Result};
use crate::store::{EpistemicStore, PropositionId};
use crate::Tick;

pub const DEFAULT_TIE_EPSILON: f64 = 1e-12;
pub const DEFAULT_TAU: f64 = 2.5;
pub const DEFAULT_N_RESET: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    /// Uniform pick among the offered candidates.
    Random,
    /// Largest decayed posterior variance; candidates within `tie_epsilon`
    /// of the maximum are drawn uniformly.
    Uncertainty { tie_epsilon: f64 },
    /// Delegates selection to `inner` and, after each observation whose
    /// predictive surprisal exceeds `tau`, shrinks the belief to `n_reset`
    /// pseudo-counts at the same mean.
    WithSurprisalReset {
        inner: Box<StrategyKind>,
        tau: f64,
        n_reset: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResetEvent {
    pub id: PropositionId,
    pub surprisal: f64,
}

impl StrategyKind {
    pub fn uncertainty() -> Self {
        StrategyKind::Uncertainty {
            tie_epsilon: DEFAULT_TIE_EPSILON,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyKind::Random => Ok(()),
            StrategyKind::Uncertainty { tie_epsilon } => {
                if tie_epsilon.is_finite() && *tie_epsilon >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument {
                        name: "tie_epsilon",
                        value: *tie_epsilon,
                        reason: "must be finite and nonnegative",
                    })
                }
            }
            StrategyKind::WithSurprisalReset {
                inner,
                tau,
                n_reset,
            } => {
                if matches!(**inner, StrategyKind::WithSurprisalReset { .. }) {
                    return Err(Error::config(
                        "strategy",
                        "surprisal reset cannot wrap another surprisal reset",
                    ));
                }
                for (name, v) in [("tau", *tau), ("n_reset", *n_reset)] {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::InvalidArgument {
                            name,
                            value: v,
                            reason: "must be finite and strictly positive",
                        });
                    }
                }
                inner.validate()
            }
        }
    }

    /// Config name: `random`, `uncertainty` or `uncertainty+reset`
    /// (`random+reset` for a reset wrapper around the random policy).
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Uncertainty { .. } => "uncertainty",
            StrategyKind::WithSurprisalReset { inner, .. } => match **inner {
                StrategyKind::Random => "random+reset",
                _ => "uncertainty+reset",
            },
        }
    }

    /// Whether selection reads beliefs from the store.
    pub(crate) fn wants_snapshot(&self) -> bool {
        matches!(self, StrategyKind::WithSurprisalReset { .. })
    }

    pub fn select<R: Rng + ?Sized>(
        &self,
        candidates: &[PropositionId],
        store: &mut EpistemicStore,
        now: Tick,
        rng: &mut R,
    ) -> Result<PropositionId> {
        if candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        match self {
            StrategyKind::Random => {
                for &id in candidates {
                    if id >= store.universe_size() {
                        return Err(Error::IdOutOfRange {
                            id,
                            k: store.universe_size(),
                        });
                    }
                }
                Ok(candidates[rng.gen_range(0..candidates.len())])
            }
            StrategyKind::Uncertainty { tie_epsilon } => {
                let mut scored = Vec::with_capacity(candidates.len());
                for &id in candidates {
                    scored.push((id, store.get_or_init(id, now)?.variance()));
                }
                let peak = scored
                    .iter()
                    .map(|&(_, v)| v)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut ties: Vec<PropositionId> = scored
                    .into_iter()
                    .filter(|&(_, v)| v >= peak - tie_epsilon)
                    .map(|(id, _)| id)
                    .collect();
                ties.sort_unstable();
                ties.dedup();
                Ok(match ties.len() {
                    1 => ties[0],
                    n => ties[rng.gen_range(0..n)],
                })
            }
            StrategyKind::WithSurprisalReset { inner, .. } => {
                inner.select(candidates, store, now, rng)
            }
        }
    }

    /// Called once per completed observation. `before` is the belief the
    /// agent held for `id` just before the observation was recorded.
    pub fn after_observe(
        &self,
        id: PropositionId,
        before: &BetaBelief,
        e: Evidence,
        store: &mut EpistemicStore,
        now: Tick,
    ) -> Result<Option<ResetEvent>> {
        let StrategyKind::WithSurprisalReset { tau, n_reset, .. } = self else {
            return Ok(None);
        };
        let surprisal = before.surprisal(e);
        if surprisal <= *tau {
            return Ok(None);
        }
        let Some(after) = store.peek(id, now) else {
            return Ok(None);
        };
        store.replace(id, after.reset_plasticity(*n_reset)?, now)?;
        Ok(Some(ResetEvent { id, surprisal }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::StoreConfig;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn store() -> EpistemicStore {
        EpistemicStore::new(
            StoreConfig {
                gamma: 1.0,
                n_min: 0.0,
                ..StoreConfig::default()
            },
            16,
        )
        .unwrap()
    }

    fn seed(s: &mut EpistemicStore, id: PropositionId, a: f64, b: f64) {
        s.replace(id, BetaBelief::from_counts(a, b, 1.0).unwrap(), 0)
            .unwrap();
    }

    fn reset(tau: f64) -> StrategyKind {
        StrategyKind::WithSurprisalReset {
            inner: Box::new(StrategyKind::uncertainty()),
            tau,
            n_reset: 2.0,
        }
    }

    #[test]
    fn uncertainty_takes_strict_argmax() {
        let mut s = store();
        seed(&mut s, 0, 2.0, 2.0); // 0.05
        seed(&mut s, 2, 8.0, 2.0); // 16 / 1100
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pick = StrategyKind::uncertainty()
            .select(&[0, 1, 2], &mut s, 0, &mut rng)
            .unwrap();
        assert_eq!(pick, 1);
    }

    #[test]
    fn empty_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [
            StrategyKind::Random,
            StrategyKind::uncertainty(),
            reset(1.0),
        ] {
            assert!(matches!(
                kind.select(&[], &mut store(), 0, &mut rng),
                Err(Error::EmptyCandidates)
            ));
        }
    }

    #[test]
    fn random_leaves_store_alone() {
        let mut s = store();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        StrategyKind::Random
            .select(&[1, 2, 3], &mut s, 0, &mut rng)
            .unwrap();
        assert!(s.is_empty());
        assert!(StrategyKind::Random
            .select(&[99], &mut s, 0, &mut rng)
            .is_err());
    }

    #[test]
    fn reset_fires_on_surprise() {
        let mut s = store();
        seed(&mut s, 4, 8.0, 2.0);
        let before = s.get_or_init(4, 1).unwrap();
        let kind = reset(1.0);
        let after = s.record(4, Evidence::CONTRADICT, 1).unwrap();
        let ev = kind
            .after_observe(4, &before, Evidence::CONTRADICT, &mut s, 1)
            .unwrap()
            .unwrap();
        assert_eq!(ev.id, 4);
        assert_relative_eq!(ev.surprisal, 5f64.ln(), max_relative = 1e-12);
        let stored = s.peek(4, 1).unwrap();
        assert_relative_eq!(stored.mean(), after.mean(), max_relative = 1e-12);
        assert_relative_eq!(stored.n_eff(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn reset_stays_quiet_on_expected_evidence() {
        let mut s = store();
        seed(&mut s, 4, 8.0, 2.0);
        let before = s.get_or_init(4, 1).unwrap();
        s.record(4, Evidence::SUPPORT, 1).unwrap();
        assert!(reset(1.0)
            .after_observe(4, &before, Evidence::SUPPORT, &mut s, 1)
            .unwrap()
            .is_none());
        assert!(StrategyKind::Random
            .after_observe(4, &before, Evidence::CONTRADICT, &mut s, 1)
            .unwrap()
            .is_none());
    }

    #[test]
    fn validation() {
        assert!(StrategyKind::Uncertainty { tie_epsilon: -1.0 }
            .validate()
            .is_err());
        let nested = StrategyKind::WithSurprisalReset {
            inner: Box::new(reset(1.0)),
            tau: 1.0,
            n_reset: 2.0,
        };
        assert!(nested.validate().is_err());
        assert!(StrategyKind::WithSurprisalReset {
            inner: Box::new(StrategyKind::Random),
            tau: 0.0,
            n_reset: 2.0
        }
        .validate()
        .is_err());
        assert!(reset(2.5).validate().is_ok());
        assert_eq!(reset(2.5).name(), "uncertainty+reset");
    }
}
