//! Bounded, lazily decaying cache of beliefs keyed by proposition id.
//!
//! Every tracked belief decays by `gamma` on every global tick. Rather than
//! touching all entries each tick, an entry remembers the tick it was last
//! materialized at and is scaled by `gamma^dt` when next read. Because all
//! entries share `gamma`, the quantity `ln(N_eff) - last_touched * ln(gamma)`
//! does not change while an entry sits idle, and it orders entries exactly as
//! their decayed effective sample sizes would at any common tick. Eviction
//! candidates are therefore read off the front of an ordered index.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::belief::{n_eq, BetaBelief, Evidence};
use crate::error::{Error, Result};
use crate::Tick;

pub type PropositionId = usize;

/// Relative slack when comparing decay-normalized keys for ties and for the
/// early exit of an eviction sweep.
const KEY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StoreConfig {
    pub gamma: f64,
    /// Entries whose decayed effective sample size drops below this are evicted.
    pub n_min: f64,
    /// `None` for an unbounded store.
    pub capacity: Option<usize>,
    pub prior_alpha: f64,
    pub prior_beta: f64,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig {
            gamma: 0.999,
            n_min: 0.5,
            capacity: None,
            prior_alpha: 1.0,
            prior_beta: 1.0,
        }
    }
}

impl StoreConfig {
    pub fn validate(&self) -> Result<()> {
        BetaBelief::new_prior(self.prior_alpha, self.prior_beta, self.gamma)?;
        if !self.n_min.is_finite() || self.n_min < 0.0 {
            return Err(Error::InvalidArgument {
                name: "n_min",
                value: self.n_min,
                reason: "must be finite and nonnegative",
            });
        }
        if self.gamma < 1.0 && self.n_min >= n_eq(self.gamma)? {
            return Err(Error::InvalidArgument {
                name: "n_min",
                value: self.n_min,
                reason: "must stay below the equilibrium sample size 1/(1-gamma)",
            });
        }
        if self.capacity == Some(0) {
            return Err(Error::InvalidArgument {
                name: "capacity",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    pub fn prior(&self) -> Result<BetaBelief> {
        BetaBelief::new_prior(self.prior_alpha, self.prior_beta, self.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoreEntry {
    pub belief: BetaBelief,
    pub last_touched: Tick,
    /// The belief is a prior inserted at `last_touched` that has neither been
    /// observed nor aged yet. Its first observation still consumes a tick of
    /// decay, so reading a candidate before recording it leaves the result
    /// unchanged.
    fresh: bool,
}

impl StoreEntry {
    fn decayed_to(&self, now: Tick) -> BetaBelief {
        self.belief.decay(now.saturating_sub(self.last_touched))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdKey(f64);

impl Eq for OrdKey {}

impl PartialOrd for OrdKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

type IndexKey = (OrdKey, Tick, PropositionId);

#[derive(Debug, Clone)]
pub struct EpistemicStore {
    config: StoreConfig,
    universe: usize,
    prior: BetaBelief,
    ln_gamma: f64,
    clock: Tick,
    entries: BTreeMap<PropositionId, StoreEntry>,
    by_density: BTreeSet<IndexKey>,
    insertions: u64,
    evictions: u64,
}

impl EpistemicStore {
    pub fn new(config: StoreConfig, universe: usize) -> Result<Self> {
        config.validate()?;
        if universe == 0 {
            return Err(Error::InvalidArgument {
                name: "k",
                value: 0.0,
                reason: "universe must hold at least one proposition",
            });
        }
        Ok(EpistemicStore {
            prior: config.prior()?,
            ln_gamma: config.gamma.ln(),
            config,
            universe,
            clock: 0,
            entries: BTreeMap::new(),
            by_density: BTreeSet::new(),
            insertions: 0,
            evictions: 0,
        })
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    pub fn prior(&self) -> BetaBelief {
        self.prior
    }

    pub fn universe_size(&self) -> usize {
        self.universe
    }

    pub fn clock(&self) -> Tick {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: PropositionId) -> bool {
        self.entries.contains_key(&id)
    }

    /// Number of times an id entered the store, counting re-entries after
    /// eviction.
    pub fn insertions_total(&self) -> u64 {
        self.insertions
    }

    /// Entries removed by sweeps or capacity enforcement so far.
    pub fn evictions_total(&self) -> u64 {
        self.evictions
    }

    pub fn entry(&self, id: PropositionId) -> Option<&StoreEntry> {
        self.entries.get(&id)
    }

    /// Decayed view of a stored belief without touching it.
    pub fn peek(&self, id: PropositionId, now: Tick) -> Option<BetaBelief> {
        self.entries.get(&id).map(|e| e.decayed_to(now))
    }

    fn key_for(&self, belief: &BetaBelief, touched: Tick) -> OrdKey {
        OrdKey(belief.n_eff().ln() - touched as f64 * self.ln_gamma)
    }

    fn check_access(&mut self, id: PropositionId, now: Tick) -> Result<()> {
        if id >= self.universe {
            return Err(Error::IdOutOfRange {
                id,
                k: self.universe,
            });
        }
        if now < self.clock {
            return Err(Error::ClockRegression {
                now,
                clock: self.clock,
            });
        }
        self.clock = now;
        Ok(())
    }

    fn put(&mut self, id: PropositionId, entry: StoreEntry) {
        match self.entries.get(&id) {
            Some(old) => {
                let old_key = self.key_for(&old.belief, old.last_touched);
                self.by_density.remove(&(old_key, old.last_touched, id));
            }
            None => self.insertions += 1,
        }
        let key = self.key_for(&entry.belief, entry.last_touched);
        self.by_density.insert((key, entry.last_touched, id));
        self.entries.insert(id, entry);
    }

    fn remove(&mut self, id: PropositionId) -> Option<StoreEntry> {
        let old = self.entries.remove(&id)?;
        let key = self.key_for(&old.belief, old.last_touched);
        self.by_density.remove(&(key, old.last_touched, id));
        Some(old)
    }

    /// Returns the belief for `id` decayed to `now`, inserting the prior on a
    /// miss. The entry is materialized at `now`.
    pub fn get_or_init(&mut self, id: PropositionId, now: Tick) -> Result<BetaBelief> {
        self.check_access(id, now)?;
        match self.entries.get(&id).copied() {
            Some(entry) => {
                if entry.last_touched == now {
                    return Ok(entry.belief);
                }
                let belief = entry.decayed_to(now);
                self.put(
                    id,
                    StoreEntry {
                        belief,
                        last_touched: now,
                        fresh: false,
                    },
                );
                Ok(belief)
            }
            None => {
                self.put(
                    id,
                    StoreEntry {
                        belief: self.prior,
                        last_touched: now,
                        fresh: true,
                    },
                );
                self.enforce_capacity_sparing(Some(id));
                Ok(self.prior)
            }
        }
    }

    /// Applies one observation at tick `now` and returns the updated belief.
    pub fn record(&mut self, id: PropositionId, e: Evidence, now: Tick) -> Result<BetaBelief> {
        self.check_access(id, now)?;
        let (belief, inserted) = match self.entries.get(&id) {
            Some(entry) => {
                let mut dt = now - entry.last_touched;
                if entry.fresh {
                    dt = dt.max(1);
                }
                (entry.belief.decay(dt).absorb(e), false)
            }
            None => (self.prior.update(e), true),
        };
        self.put(
            id,
            StoreEntry {
                belief,
                last_touched: now,
                fresh: false,
            },
        );
        if inserted {
            self.enforce_capacity_sparing(Some(id));
        }
        Ok(belief)
    }

    /// Overwrites the belief for `id` as of `now`.
    pub fn replace(&mut self, id: PropositionId, belief: BetaBelief, now: Tick) -> Result<()> {
        self.check_access(id, now)?;
        let inserted = !self.entries.contains_key(&id);
        self.put(
            id,
            StoreEntry {
                belief,
                last_touched: now,
                fresh: false,
            },
        );
        if inserted {
            self.enforce_capacity_sparing(Some(id));
        }
        Ok(())
    }

    /// Removes every entry whose effective sample size decayed to `now` is
    /// below `n_min`. Survivors are left as they are.
    pub fn sweep_evict(&mut self, now: Tick) -> Vec<PropositionId> {
        self.clock = self.clock.max(now);
        let n_min = self.config.n_min;
        if n_min <= 0.0 {
            return Vec::new();
        }
        let threshold = n_min.ln() - now as f64 * self.ln_gamma;
        let slack = KEY_TOLERANCE * threshold.abs().max(1.0);
        let mut evicted = Vec::new();
        for &(key, touched, id) in &self.by_density {
            let decayed = self.entries[&id].belief.decay(now.saturating_sub(touched));
            if decayed.n_eff() < n_min {
                evicted.push(id);
            } else if key.0 > threshold + slack {
                break;
            }
        }
        for id in &evicted {
            self.remove(*id);
        }
        self.evictions += evicted.len() as u64;
        evicted
    }

    /// Evicts lowest-density entries until the store fits its capacity.
    /// Ties on decayed effective sample size go to the older `last_touched`,
    /// then to the smaller id.
    pub fn enforce_capacity(&mut self) -> Vec<PropositionId> {
        self.enforce_capacity_sparing(None)
    }

    fn enforce_capacity_sparing(&mut self, spare: Option<PropositionId>) -> Vec<PropositionId> {
        let Some(capacity) = self.config.capacity else {
            return Vec::new();
        };
        let mut evicted = Vec::new();
        while self.entries.len() > capacity {
            let Some(victim) = self.eviction_candidate(spare) else {
                break;
            };
            self.remove(victim);
            self.evictions += 1;
            evicted.push(victim);
        }
        evicted
    }

    fn eviction_candidate(&self, spare: Option<PropositionId>) -> Option<PropositionId> {
        let mut eligible = self
            .by_density
            .iter()
            .filter(|(_, _, id)| Some(*id) != spare);
        let &(lowest, touched, id) = eligible.next()?;
        let slack = KEY_TOLERANCE * lowest.0.abs().max(1.0);
        let mut best = (touched, id);
        for &(key, touched, id) in eligible {
            if key.0 > lowest.0 + slack {
                break;
            }
            best = best.min((touched, id));
        }
        Some(best.1)
    }

    /// Entries at or above `n_min` decayed to `now`, in ascending id order.
    pub fn active_set(&self, now: Tick) -> Vec<(PropositionId, BetaBelief)> {
        self.iter_active(now).collect()
    }

    pub(crate) fn iter_active(
        &self,
        now: Tick,
    ) -> impl Iterator<Item = (PropositionId, BetaBelief)> + '_ {
        let n_min = self.config.n_min;
        self.entries.iter().filter_map(move |(&id, e)| {
            let b = e.decayed_to(now);
            (b.n_eff() >= n_min).then_some((id, b))
        })
    }

    /// Writes `id,alpha,beta,last_touched` rows, one per entry, in id order.
    pub fn write_snapshot<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["id", "alpha", "beta", "last_touched"])?;
        for (id, e) in &self.entries {
            w.write_record([
                id.to_string(),
                e.belief.alpha().to_string(),
                e.belief.beta().to_string(),
                e.last_touched.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuilds a store from a snapshot. The store clock resumes at the
    /// latest `last_touched` in the file.
    pub fn read_snapshot<R: Read>(config: StoreConfig, universe: usize, reader: R) -> Result<Self> {
        let mut store = EpistemicStore::new(config, universe)?;
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["id", "alpha", "beta", "last_touched"] {
            return Err(Error::Snapshot {
                row: 0,
                message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
            });
        }
        for (i, row) in r.records().enumerate() {
            let row = row?;
            let bad = |message: String| Error::Snapshot {
                row: i + 1,
                message,
            };
            let field = |j: usize| row.get(j).ok_or_else(|| bad(format!("missing column {j}")));
            let id: PropositionId = field(0)?.parse().map_err(|e| bad(format!("id: {e}")))?;
            let alpha: f64 = field(1)?.parse().map_err(|e| bad(format!("alpha: {e}")))?;
            let beta: f64 = field(2)?.parse().map_err(|e| bad(format!("beta: {e}")))?;
            let touched: Tick = field(3)?
                .parse()
                .map_err(|e| bad(format!("last_touched: {e}")))?;
            if id >= universe {
                return Err(Error::IdOutOfRange { id, k: universe });
            }
            if store.entries.contains_key(&id) {
                return Err(bad(format!("duplicate id {id}")));
            }
            let belief = BetaBelief::from_counts(alpha, beta, store.config.gamma)?;
            store.put(
                id,
                StoreEntry {
                    belief,
                    last_touched: touched,
                    fresh: false,
                },
            );
            store.clock = store.clock.max(touched);
        }
        Ok(store)
    }
}
