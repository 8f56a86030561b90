//! Monte Carlo simulation of the thresholded limit trees.
//!
//! Each trial grows one side of a planted edge generation by generation,
//! keeping only edges lighter than the threshold `s`. Nodes of the same type
//! are exchangeable, so a generation is stored as a count per type and the
//! next one is drawn from sums of Poisson and binomial variables.
//!
//! Offspring, per node:
//!
//! * tree, type `U` (has a spine child): `Poisson(s)` unplanted `U` children,
//!   `Poisson(c)` planted `B` children and, with probability `F(s)`, one
//!   more `U` child along the spine. Type `B` is the same without the spine.
//!   `c` is `F(s)` for the thinned system and `1` for the unthinned one.
//! * path, type `P` (on the planted line): `Poisson(s)` unplanted `Q`
//!   children and one planted `P` child kept with probability `F(s)`. Type
//!   `Q` keeps each of its two planted neighbours with probability `F(s)`.
//!
//! A trial that reaches `depth_cap` generations or exceeds `population_cap`
//! nodes in one generation is counted as surviving.

use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed_point::LimitModel;
use crate::rng::{substream, Purpose, Stream};
use crate::weights::EdgeLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Tree: root of type `U`. Path: root on the planted line.
    Minus,
    /// Tree: root of type `B`. Path: same as `Minus`.
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub depth: u32,
    pub population: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            depth: 60,
            population: 1_000_000,
        }
    }
}

impl Caps {
    fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.population == 0 {
            return Err(Error::domain("branching caps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchingConfig {
    pub model: LimitModel,
    pub side: Side,
    pub s: f64,
    pub caps: Caps,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtinctionEstimate {
    pub point_estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    /// Trials stopped by a cap and counted as surviving.
    pub truncated_count: u64,
}

impl ExtinctionEstimate {
    fn from_counts(hits: u64, trials: u64, truncated_count: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            point_estimate: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            truncated_count,
        }
    }
}

fn poisson(rng: &mut Stream, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map_or(0, |d| d.sample(rng) as u64)
}

fn binomial(rng: &mut Stream, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map_or(0, |d| d.sample(rng))
}

/// Probability that a planted edge is lighter than `s`. Edges of weight
/// exactly `s` are removed, so nothing survives a zero threshold even when
/// the law has an atom at zero.
fn retained_fraction(law: &dyn EdgeLaw, s: f64) -> f64 {
    if s > 0.0 {
        law.cdf(s)
    } else {
        0.0
    }
}

/// Grows one side at threshold `s` with `F(s) = f`. Returns `true` if the
/// process dies out before either cap.
fn dies_out(model: LimitModel, side: Side, s: f64, f: f64, caps: Caps, rng: &mut Stream) -> bool {
    // (first, second) = (U, B) for trees, (P, Q) for paths.
    let (mut first, mut second): (u64, u64) = match (model, side) {
        (LimitModel::Tree(_), Side::Minus) => (1, 0),
        (LimitModel::Tree(_), Side::Plus) => (0, 1),
        (LimitModel::Path, _) => (1, 0),
    };
    for _ in 0..caps.depth {
        let total = first + second;
        if total == 0 {
            return true;
        }
        if total > caps.population {
            return false;
        }
        let unplanted = poisson(rng, s * total as f64);
        (first, second) = match model {
            LimitModel::Tree(sys) => {
                let spine = binomial(rng, first, f);
                let planted = poisson(rng, sys.planted_rate(f) * total as f64);
                (unplanted + spine, planted)
            }
            LimitModel::Path => {
                let line = binomial(rng, first + 2 * second, f);
                (line, unplanted)
            }
        };
    }
    first + second == 0
}

/// Fraction of trials in which the chosen side dies out at threshold `s`.
pub fn simulate_extinction(config: &BranchingConfig, law: &dyn EdgeLaw) -> Result<ExtinctionEstimate> {
    if !(config.s >= 0.0 && config.s.is_finite()) {
        return Err(Error::domain(format!("threshold must be finite and nonnegative, got {}", config.s)));
    }
    if config.trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    config.caps.validate()?;
    let f = retained_fraction(law, config.s);
    let extinct: u64 = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(config.seed, Purpose::Branching, t);
            u64::from(dies_out(config.model, config.side, config.s, f, config.caps, &mut rng))
        })
        .sum();
    Ok(ExtinctionEstimate::from_counts(extinct, config.trials, config.trials - extinct))
}

/// Monte Carlo estimate of the limiting overlap: draw `S` from the planted
/// law, grow both sides at threshold `S` and record whether at least one
/// dies out.
pub fn mc_overlap(model: LimitModel, law: &dyn EdgeLaw, trials: u64, caps: Caps, seed: u64) -> Result<ExtinctionEstimate> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    caps.validate()?;
    let (kept, truncated) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, Purpose::Threshold, t);
            let s = law.sample(&mut rng);
            let f = retained_fraction(law, s);
            let minus = dies_out(model, Side::Minus, s, f, caps, &mut rng);
            let plus = dies_out(model, Side::Plus, s, f, caps, &mut rng);
            let kept = minus || plus;
            (u64::from(kept), u64::from(!kept))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ExtinctionEstimate::from_counts(kept, trials, truncated))
}
