//! Edge weight laws: the planted law `P` and the size-scaled unplanted law `Q_n`.

use rand::{Rng, RngCore};
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A continuous law on the nonnegative reals.
///
/// The solvers only need the CDF, the branching oracle and the instance
/// generator need a sampler, and the theory module needs the density, the mean
/// and a tail cutoff for truncating `dF`-integrals.
pub trait EdgeLaw: Send + Sync {
    /// `F(s) = P(W <= s)`. For `s <= 0` this is `0`.
    fn cdf(&self, s: f64) -> f64;
    fn density(&self, s: f64) -> f64;
    fn sample(&self, rng: &mut dyn RngCore) -> f64;
    /// `+inf` when the mean does not exist.
    fn mean(&self) -> f64;
    /// Smallest `s` with `1 - F(s) <= tail`.
    fn tail_cutoff(&self, tail: f64) -> f64;
}

/// The shipped families. Only the exponential is used by the model; new
/// families need a CDF, a density, a sampler and a finite mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WeightFamily {
    Exponential { mean: f64 },
}

impl WeightFamily {
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::domain(format!(
                "exponential mean must be positive and finite, got {mean}"
            )));
        }
        Ok(WeightFamily::Exponential { mean })
    }

    /// Checked CDF: negative (or NaN) thresholds are rejected.
    pub fn cdf_checked(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("cdf evaluated at negative s = {s}")));
        }
        Ok(self.cdf(s))
    }
}

impl EdgeLaw for WeightFamily {
    fn cdf(&self, s: f64) -> f64 {
        match *self {
            WeightFamily::Exponential { mean } => {
                if s <= 0.0 {
                    0.0
                } else {
                    -(-s / mean).exp_m1()
                }
            }
        }
    }

    fn density(&self, s: f64) -> f64 {
        match *self {
            WeightFamily::Exponential { mean } => {
                if s < 0.0 {
                    0.0
                } else {
                    (-s / mean).exp() / mean
                }
            }
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            WeightFamily::Exponential { mean } => {
                let e: f64 = rng.sample(Exp1);
                e * mean
            }
        }
    }

    fn mean(&self) -> f64 {
        match *self {
            WeightFamily::Exponential { mean } => mean,
        }
    }

    fn tail_cutoff(&self, tail: f64) -> f64 {
        match *self {
            WeightFamily::Exponential { mean } => mean * (1.0 / tail).ln(),
        }
    }
}

/// The pair of laws defining an instance of size `n`: planted edges draw from
/// `planted`, every other pair from an exponential with mean `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeightModel {
    pub planted: WeightFamily,
    pub n: usize,
}

impl EdgeWeightModel {
    pub fn exponential(mu: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("unplanted scale n must be positive"));
        }
        Ok(Self {
            planted: WeightFamily::exponential(mu)?,
            n,
        })
    }

    pub fn unplanted(&self) -> WeightFamily {
        WeightFamily::Exponential {
            mean: self.n as f64,
        }
    }

    pub fn cdf_planted(&self, s: f64) -> Result<f64> {
        self.planted.cdf_checked(s)
    }

    pub fn sample_planted(&self, rng: &mut dyn RngCore) -> f64 {
        self.planted.sample(rng)
    }

    pub fn sample_unplanted(&self, rng: &mut dyn RngCore) -> f64 {
        self.unplanted().sample(rng)
    }
}
