//! Repeated generate-and-recover trials.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::instance::{gen_instance_with_guard, PlantedKind, DEFAULT_MAX_N};
use crate::mst::recover;
use crate::rng::{derive_seed, Purpose};
use crate::weights::WeightFamily;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Seed of this trial's instance; `gen` with this seed rebuilds it.
    pub seed: u64,
    /// 0 for null instances.
    pub overlap: f64,
    pub weight: f64,
    /// Wall time of generation plus recovery. Not serialized, so that output
    /// files stay reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub se: f64,
}

impl Moments {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let k = values.len() as f64;
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / k;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            se: (var / k).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub n: usize,
    pub model: PlantedKind,
    pub trials: usize,
    pub mean_overlap: f64,
    pub se_overlap: f64,
    pub std_overlap: f64,
    pub mean_weight: f64,
    pub se_weight: f64,
    pub std_weight: f64,
}

impl TrialSummary {
    pub fn from_records(n: usize, model: PlantedKind, records: &[TrialRecord]) -> Self {
        let o = Moments::of(records.iter().map(|r| r.overlap));
        let w = Moments::of(records.iter().map(|r| r.weight));
        Self {
            n,
            model,
            trials: records.len(),
            mean_overlap: o.mean,
            se_overlap: o.se,
            std_overlap: o.std,
            mean_weight: w.mean,
            se_weight: w.se,
            std_weight: w.std,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub n: usize,
    pub kind: PlantedKind,
    pub planted: WeightFamily,
    pub trials: u64,
    pub seed: u64,
    pub max_n: usize,
}

impl TrialPlan {
    pub fn new(n: usize, kind: PlantedKind, planted: WeightFamily, trials: u64, seed: u64) -> Self {
        Self {
            n,
            kind,
            planted,
            trials,
            seed,
            max_n: DEFAULT_MAX_N,
        }
    }
}

/// Runs the trials in parallel and returns them in trial order.
pub fn run_trials(plan: &TrialPlan) -> Result<Vec<TrialRecord>> {
    (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let start = Instant::now();
            let seed = derive_seed(plan.seed, Purpose::Trial, trial);
            let instance = gen_instance_with_guard(plan.n, plan.kind, plan.planted, seed, plan.max_n)?;
            let r = recover(&instance);
            Ok(TrialRecord {
                trial,
                seed,
                overlap: r.overlap,
                weight: r.weight,
                elapsed: start.elapsed(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn moments_by_hand() {
        let m = Moments::of([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((m.se - m.std / 2.0).abs() < 1e-15);
        assert_eq!(Moments::of([7.0]).se, 0.0);
    }

    #[test]
    fn trial_seeds_rebuild_instances() {
        let law = WeightFamily::exponential(0.5).unwrap();
        let plan = TrialPlan::new(40, PlantedKind::Tree, law, 5, 11);
        let records = run_trials(&plan).unwrap();
        assert_eq!(records.len(), 5);
        for r in &records {
            let inst = crate::instance::gen_instance(40, PlantedKind::Tree, law, r.seed).unwrap();
            let again = recover(&inst);
            assert_eq!(again.overlap, r.overlap);
            assert_eq!(again.weight, r.weight);
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let law = WeightFamily::exponential(1.0).unwrap();
        let plan = TrialPlan::new(60, PlantedKind::Path, law, 12, 5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_trials(&plan).unwrap())
        };
        let a: Vec<(f64, f64)> = run(1).iter().map(|r| (r.overlap, r.weight)).collect();
        let b: Vec<(f64, f64)> = run(3).iter().map(|r| (r.overlap, r.weight)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn capacity_guard() {
        let law = WeightFamily::exponential(1.0).unwrap();
        let mut plan = TrialPlan::new(100, PlantedKind::Null, law, 1, 0);
        plan.max_n = 50;
        assert!(matches!(run_trials(&plan), Err(Error::Capacity { .. })));
    }
}
