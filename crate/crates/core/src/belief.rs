//! Beta-Bernoulli beliefs with an exponential forgetting factor.
//!
//! A belief is a pair of pseudo-counts `(alpha, beta)` that decay by `gamma`
//! every tick. Each observation adds `y` to `alpha` and `1 - y` to `beta`, so
//! the effective sample size `alpha + beta` follows `N' = gamma * N + 1` under
//! constant observation and settles at `1 / (1 - gamma)`.

use crate::error::{Error, Result};

/// Smallest count a decayed belief may hold. `gamma^dt` for very large `dt`
/// would otherwise denormalize.
pub const COUNT_FLOOR: f64 = 1e-300;

/// Degree of support carried by one observation, `0 <= y <= 1`.
///
/// Binary feedback uses 0 or 1; fractional values are soft evidence.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Evidence(f64);

impl Evidence {
    pub const SUPPORT: Evidence = Evidence(1.0);
    pub const CONTRADICT: Evidence = Evidence(0.0);

    pub fn new(y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidArgument {
                name: "evidence",
                value: y,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Evidence(y))
    }

    pub fn from_bool(supports: bool) -> Self {
        if supports {
            Self::SUPPORT
        } else {
            Self::CONTRADICT
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Decayed pseudo-counts for one proposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBelief {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: "gamma",
            value: gamma,
            reason: "must lie in (0, 1]",
        })
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name,
            value,
            reason: "must be finite and strictly positive",
        })
    }
}

impl BetaBelief {
    /// A fresh belief from strictly positive prior counts.
    pub fn new_prior(alpha0: f64, beta0: f64, gamma: f64) -> Result<Self> {
        check_positive("alpha0", alpha0)?;
        check_positive("beta0", beta0)?;
        check_gamma(gamma)?;
        Ok(BetaBelief {
            alpha: alpha0,
            beta: beta0,
            gamma,
        })
    }

    /// Rebuilds a belief from raw counts, e.g. when importing a snapshot.
    /// Counts may be zero individually but not both.
    pub fn from_counts(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidArgument {
                    name,
                    value: v,
                    reason: "must be finite and nonnegative",
                });
            }
        }
        check_positive("alpha + beta", alpha + beta)?;
        check_gamma(gamma)?;
        Ok(BetaBelief { alpha, beta, gamma })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// One tick of decay followed by the observation:
    /// `alpha' = gamma * alpha + y`, `beta' = gamma * beta + (1 - y)`.
    #[must_use]
    pub fn update(&self, e: Evidence) -> Self {
        self.decay(1).absorb(e)
    }

    /// Adds an observation without consuming a tick.
    #[must_use]
    pub(crate) fn absorb(&self, e: Evidence) -> Self {
        let y = e.value();
        BetaBelief {
            alpha: self.alpha + y,
            beta: self.beta + (1.0 - y),
            gamma: self.gamma,
        }
    }

    /// `dt` ticks without observation: both counts scale by `gamma^dt`.
    #[must_use]
    pub fn decay(&self, dt: u64) -> Self {
        if dt == 0 || self.gamma == 1.0 {
            return *self;
        }
        let factor = if dt == 1 {
            self.gamma
        } else {
            self.gamma.powf(dt as f64)
        };
        debug_assert!(factor.is_finite() && factor >= 0.0);
        BetaBelief {
            alpha: floor_count(self.alpha, factor),
            beta: floor_count(self.beta, factor),
            gamma: self.gamma,
        }
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        let n = self.alpha + self.beta;
        assert!(n > 0.0, "moments undefined for alpha + beta = 0");
        self.alpha / n
    }

    /// `alpha * beta / ((alpha + beta)^2 (alpha + beta + 1))`
    #[inline]
    pub fn variance(&self) -> f64 {
        let n = self.alpha + self.beta;
        assert!(n > 0.0, "moments undefined for alpha + beta = 0");
        self.alpha * self.beta / (n * n * (n + 1.0))
    }

    /// Effective sample size, `alpha + beta`.
    #[inline]
    pub fn n_eff(&self) -> f64 {
        self.alpha + self.beta
    }

    /// Predictive log-loss of `e` under the current mean, in nats.
    pub fn surprisal(&self, e: Evidence) -> f64 {
        let mu = self.mean();
        let y = e.value();
        let mut loss = 0.0;
        if y > 0.0 {
            loss -= y * mu.ln();
        }
        if y < 1.0 {
            loss -= (1.0 - y) * (1.0 - mu).ln();
        }
        loss
    }

    /// Rescales the counts to total `n_reset` while keeping the mean.
    pub fn reset_plasticity(&self, n_reset: f64) -> Result<Self> {
        check_positive("n_reset", n_reset)?;
        let mu = self.mean();
        Ok(BetaBelief {
            alpha: mu * n_reset,
            beta: (1.0 - mu) * n_reset,
            gamma: self.gamma,
        })
    }
}

#[inline]
fn floor_count(count: f64, factor: f64) -> f64 {
    let scaled = count * factor;
    if count > 0.0 && scaled < COUNT_FLOOR {
        COUNT_FLOOR
    } else {
        scaled
    }
}

/// Equilibrium effective sample size `1 / (1 - gamma)` under one observation
/// per tick.
pub fn n_eq(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma == 1.0 {
        return Err(Error::EquilibriumUndefined);
    }
    Ok(1.0 / (1.0 - gamma))
}
