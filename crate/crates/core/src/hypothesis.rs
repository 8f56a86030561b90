//! Detection of a planted structure from the MST weight alone.
//!
//! The test rejects the unplanted model (verdict 1) when the mean MST edge
//! weight falls strictly below `ζ(3) - ε`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{run_trials, Moments, TrialPlan};
use crate::fixed_point::{LimitModel, TreeSystem};
use crate::instance::PlantedKind;
use crate::rng::{derive_seed, Purpose};
use crate::theory::{weight_limit, TheoryOptions, ZETA3};
use crate::weights::WeightFamily;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub threshold: f64,
    /// 0 keeps the unplanted model, 1 declares a planted structure.
    pub verdict: u8,
}

pub fn decide(w: f64, epsilon: f64) -> Result<TestOutcome> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let threshold = ZETA3 - epsilon;
    Ok(TestOutcome {
        statistic: w,
        threshold,
        verdict: u8::from(w < threshold),
    })
}

/// 95% Wilson score interval for `hits` successes in `trials`.
pub fn wilson_interval(hits: usize, trials: usize) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisConfig {
    pub n: usize,
    pub trials: u64,
    /// Planted structure under the alternative; must not be `Null`.
    pub kind: PlantedKind,
    pub planted: WeightFamily,
    pub epsilon: f64,
    pub seed: u64,
    pub tree_system: TreeSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRates {
    pub n: usize,
    pub trials: u64,
    pub epsilon: f64,
    pub threshold: f64,
    /// Fraction of unplanted instances declared planted.
    pub type1: f64,
    /// Fraction of planted instances declared unplanted.
    pub type2: f64,
    pub ci1: [f64; 2],
    pub ci2: [f64; 2],
    pub mean_w_h0: f64,
    pub mean_w_h1: f64,
    /// Limiting mean weight under the alternative.
    pub weight_limit_h1: f64,
    /// Set when the limiting weight under the alternative exceeds
    /// `ζ(3) - 2ε`, in which case the error need not vanish.
    pub warning: Option<String>,
}

impl ErrorRates {
    pub fn total(&self) -> f64 {
        self.type1 + self.type2
    }

    /// Sum of the two interval widths.
    pub fn ci_width(&self) -> f64 {
        (self.ci1[1] - self.ci1[0]) + (self.ci2[1] - self.ci2[0])
    }
}

pub fn error_rates(config: &HypothesisConfig) -> Result<ErrorRates> {
    let model = match config.kind {
        PlantedKind::Tree => LimitModel::Tree(config.tree_system),
        PlantedKind::Path => LimitModel::Path,
        PlantedKind::Null => {
            return Err(Error::domain("the alternative hypothesis needs a planted tree or path"));
        }
    };
    let threshold = decide(0.0, config.epsilon)?.threshold;
    let limit = weight_limit(model, &config.planted, &TheoryOptions::default())?;
    let warning = (limit > ZETA3 - 2.0 * config.epsilon).then(|| {
        format!(
            "limiting planted weight {limit:.6} exceeds zeta(3) - 2*epsilon = {:.6}",
            ZETA3 - 2.0 * config.epsilon
        )
    });

    let plan = |kind, purpose| TrialPlan::new(config.n, kind, config.planted, config.trials, derive_seed(config.seed, purpose, 0));
    let h0 = run_trials(&plan(PlantedKind::Null, Purpose::NullHypothesis))?;
    let h1 = run_trials(&plan(config.kind, Purpose::PlantedHypothesis))?;

    let rejected = |records: &[crate::experiment::TrialRecord]| {
        records.iter().filter(|r| r.weight < threshold).count()
    };
    let false_alarms = rejected(&h0);
    let misses = h1.len() - rejected(&h1);
    let k = config.trials as usize;
    Ok(ErrorRates {
        n: config.n,
        trials: config.trials,
        epsilon: config.epsilon,
        threshold,
        type1: false_alarms as f64 / k as f64,
        type2: misses as f64 / k as f64,
        ci1: wilson_interval(false_alarms, k),
        ci2: wilson_interval(misses, k),
        mean_w_h0: Moments::of(h0.iter().map(|r| r.weight)).mean,
        mean_w_h1: Moments::of(h1.iter().map(|r| r.weight)).mean,
        weight_limit_h1: limit,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn threshold_examples() {
        let out = decide(1.25, 0.05).unwrap();
        assert_eq!(out.verdict, 0);
        assert!((out.threshold - 1.1520569031595943).abs() < 1e-15);
        assert_eq!(decide(0.5, 0.05).unwrap().verdict, 1);
        assert_eq!(decide(ZETA3 - 0.05, 0.05).unwrap().verdict, 0);
    }

    #[test]
    fn epsilon_must_be_positive() {
        assert!(decide(1.0, 0.0).is_err());
        assert!(decide(1.0, -0.1).is_err());
        assert!(decide(1.0, f64::NAN).is_err());
    }

    #[test]
    fn wilson_by_hand() {
        let [lo, hi] = wilson_interval(0, 50);
        assert!(lo.abs() < 1e-15);
        assert!((hi - 0.071_348_5).abs() < 1e-6);
        let [lo, hi] = wilson_interval(25, 50);
        assert!((lo - 0.366_445_1).abs() < 1e-6 && (hi - 0.633_554_9).abs() < 1e-6);
    }

    #[test]
    fn small_scale_error_rates() {
        let cfg = HypothesisConfig {
            n: 200,
            trials: 10,
            kind: PlantedKind::Tree,
            planted: WeightFamily::exponential(0.3).unwrap(),
            epsilon: 0.1,
            seed: 4,
            tree_system: TreeSystem::Thinned,
        };
        let r = error_rates(&cfg).unwrap();
        assert!(r.warning.is_none());
        assert!(r.mean_w_h1 < r.mean_w_h0);
        assert!(r.total() <= 0.2);
        assert!(r.ci1[0] <= r.type1 && r.type1 <= r.ci1[1]);
    }

    #[test]
    fn weak_signal_is_flagged() {
        let cfg = HypothesisConfig {
            n: 50,
            trials: 2,
            kind: PlantedKind::Path,
            planted: WeightFamily::exponential(40.0).unwrap(),
            epsilon: 0.1,
            seed: 0,
            tree_system: TreeSystem::Thinned,
        };
        assert!(error_rates(&cfg).unwrap().warning.is_some());
        let null = HypothesisConfig {
            kind: PlantedKind::Null,
            ..cfg
        };
        assert!(error_rates(&null).is_err());
    }

    proptest! {
        #[test]
        fn verdict_is_monotone(a in 0.0f64..3.0, b in 0.0f64..3.0, eps in 1e-6f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(decide(lo, eps).unwrap().verdict >= decide(hi, eps).unwrap().verdict);
        }
    }
}
