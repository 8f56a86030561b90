//! Large-`n` limits of the overlap and of the mean MST weight.
//!
//! With `p_-`, `p_+` and the unplanted-side extinction probability `a(s)`
//! (`p_U` for trees, `q` for paths) from [`crate::fixed_point`]:
//!
//! ```text
//! overlap = ∫ (1 - (1 - p_-)(1 - p_+)) dF
//! weight  = ∫ s (1 - (1 - p_-)(1 - p_+)) dF  +  ½ ∫ s (1 - (1 - a)^2) ds
//! ```
//!
//! The `dF` integrals use the planted density and are cut where the planted
//! tail mass drops below `planted_tail`. The Lebesgue integral starts at
//! `s = 40` and doubles its range until the integrand is below
//! `lebesgue_cut`. Fixed points are solved at every quadrature node with the
//! scalar route, so no interpolation error enters.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixed_point::{scalar_solve, LimitModel, PointSolution};
use crate::quadrature::{integrate, QuadOptions};
use crate::weights::EdgeLaw;

/// Apéry's constant `ζ(3)`, the limiting mean MST weight without a planted tree.
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

pub fn zeta3() -> f64 {
    ZETA3
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryOptions {
    pub quad: QuadOptions,
    pub planted_tail: f64,
    pub lebesgue_start: f64,
    pub lebesgue_cut: f64,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        Self {
            quad: QuadOptions::default(),
            planted_tail: 1e-12,
            lebesgue_start: 40.0,
            lebesgue_cut: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Threshold below which both sides die out surely.
    pub critical_s: f64,
    /// Upper limit of the `dF` integrals.
    pub s_max_planted: f64,
    /// Upper limit of the Lebesgue integral.
    pub s_max_lebesgue: f64,
    /// Sum of the quadrature error estimates.
    pub quadrature_error: f64,
    /// Estimated mass dropped by truncating the integrals.
    pub truncation_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryPrediction {
    pub model: LimitModel,
    pub mu: f64,
    pub overlap_limit: f64,
    pub weight_limit: f64,
    /// Contribution of planted edges to `weight_limit`.
    pub planted_weight: f64,
    /// Contribution of unplanted edges to `weight_limit`.
    pub unplanted_weight: f64,
    pub diagnostics: Diagnostics,
}

/// Smallest `s` with `phi_s'(1) >= 1`: the point where a nontrivial
/// extinction probability appears.
pub fn critical_threshold(model: LimitModel, law: &dyn EdgeLaw) -> f64 {
    let excess = |s: f64| model.slope_at_one(s, law.cdf(s)) - 1.0;
    if excess(0.0) >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while excess(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Initial breakpoints: the critical threshold, then doubling offsets.
fn breakpoints(critical: f64, s_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    if critical > 0.0 && critical < s_max {
        pts.push(critical);
    }
    let mut step = 0.25;
    while critical + step < s_max {
        pts.push(critical + step);
        step *= 2.0;
    }
    pts.push(s_max);
    pts
}

/// Evaluates the scalar solution inside a quadrature integrand, parking the
/// first error so it can be returned after the integral.
struct Solver<'a> {
    model: LimitModel,
    law: &'a dyn EdgeLaw,
    error: RefCell<Option<Error>>,
}

impl<'a> Solver<'a> {
    fn new(model: LimitModel, law: &'a dyn EdgeLaw) -> Self {
        Self {
            model,
            law,
            error: RefCell::new(None),
        }
    }

    fn at(&self, s: f64) -> Option<PointSolution> {
        match scalar_solve(self.model, s, self.law.cdf(s)) {
            Ok(p) => Some(p),
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                None
            }
        }
    }

    fn finish<T>(&self, value: Result<T>) -> Result<T> {
        match self.error.borrow_mut().take() {
            Some(e) => Err(e),
            None => value,
        }
    }
}

struct Integral {
    value: f64,
    error: f64,
    truncation: f64,
    s_max: f64,
}

fn planted_integral(
    solver: &Solver<'_>,
    critical: f64,
    weighted: bool,
    opts: &TheoryOptions,
) -> Result<Integral> {
    let law = solver.law;
    let s_max = law.tail_cutoff(opts.planted_tail);
    let integrand = |s: f64| {
        let kept = solver.at(s).map_or(f64::NAN, PointSolution::planted_kept);
        let moment = if weighted { s } else { 1.0 };
        moment * kept * law.density(s)
    };
    let r = solver.finish(integrate(integrand, &breakpoints(critical, s_max), &opts.quad))?;
    let truncation = if weighted {
        (s_max + law.mean()) * opts.planted_tail
    } else {
        opts.planted_tail
    };
    Ok(Integral {
        value: r.value,
        error: r.abs_error,
        truncation,
        s_max,
    })
}

/// `½ ∫ s (1 - (1 - a(s))^2) ds` over the unplanted edges at the root.
fn lebesgue_integral(solver: &Solver<'_>, critical: f64, opts: &TheoryOptions) -> Result<Integral> {
    let integrand = |s: f64| 0.5 * s * solver.at(s).map_or(f64::NAN, PointSolution::unplanted_kept);
    let mut s_max = opts.lebesgue_start;
    while integrand(s_max) >= opts.lebesgue_cut {
        s_max *= 2.0;
        if s_max > 1e6 {
            return Err(Error::Quadrature {
                a: 0.0,
                b: s_max,
                error: integrand(s_max),
            });
        }
    }
    let tail = integrand(s_max) * s_max;
    let r = solver.finish(integrate(integrand, &breakpoints(critical, s_max), &opts.quad))?;
    Ok(Integral {
        value: r.value,
        error: r.abs_error,
        truncation: tail,
        s_max,
    })
}

/// Limit of the expected overlap.
pub fn overlap_limit(model: LimitModel, law: &dyn EdgeLaw, opts: &TheoryOptions) -> Result<f64> {
    let solver = Solver::new(model, law);
    let critical = critical_threshold(model, law);
    Ok(planted_integral(&solver, critical, false, opts)?.value)
}

/// Limit of the expected mean MST weight. Rejects laws without a finite mean.
pub fn weight_limit(model: LimitModel, law: &dyn EdgeLaw, opts: &TheoryOptions) -> Result<f64> {
    Ok(predict(model, law, opts)?.weight_limit)
}

pub fn predict(model: LimitModel, law: &dyn EdgeLaw, opts: &TheoryOptions) -> Result<TheoryPrediction> {
    let mu = law.mean();
    if !mu.is_finite() {
        return Err(Error::domain("the planted law must have a finite mean"));
    }
    let solver = Solver::new(model, law);
    let critical = critical_threshold(model, law);
    let overlap = planted_integral(&solver, critical, false, opts)?;
    let planted = planted_integral(&solver, critical, true, opts)?;
    let unplanted = lebesgue_integral(&solver, critical, opts)?;
    Ok(TheoryPrediction {
        model,
        mu,
        overlap_limit: overlap.value.clamp(0.0, 1.0),
        weight_limit: planted.value + unplanted.value,
        planted_weight: planted.value,
        unplanted_weight: unplanted.value,
        diagnostics: Diagnostics {
            critical_s: critical,
            s_max_planted: overlap.s_max,
            s_max_lebesgue: unplanted.s_max,
            quadrature_error: overlap.error + planted.error + unplanted.error,
            truncation_error: overlap.truncation.max(planted.truncation + unplanted.truncation),
        },
    })
}

/// A law that never produces a weight below any finite threshold (`F ≡ 0`).
/// With it the planted term vanishes and the Lebesgue term is the limiting
/// mean MST weight of the unplanted complete graph.
#[derive(Debug, Clone, Copy)]
struct NeverRetained;

impl EdgeLaw for NeverRetained {
    fn cdf(&self, _: f64) -> f64 {
        0.0
    }
    fn density(&self, _: f64) -> f64 {
        0.0
    }
    fn sample(&self, _: &mut dyn rand::RngCore) -> f64 {
        f64::INFINITY
    }
    fn mean(&self) -> f64 {
        f64::INFINITY
    }
    fn tail_cutoff(&self, _: f64) -> f64 {
        0.0
    }
}

/// `½ ∫ s (1 - (1 - x(s))^2) ds` with `x(s)` the extinction probability of a
/// Poisson(`s`) Galton–Watson tree. Equals `ζ(3)`.
pub fn unplanted_weight_limit(opts: &TheoryOptions) -> Result<f64> {
    let model = LimitModel::Path;
    let solver = Solver::new(model, &NeverRetained);
    Ok(lebesgue_integral(&solver, 1.0, opts)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_point::TreeSystem;
    use crate::weights::WeightFamily;

    fn exp(mu: f64) -> WeightFamily {
        WeightFamily::exponential(mu).unwrap()
    }

    #[test]
    fn zeta3_constant() {
        assert_eq!(zeta3(), 1.2020569031595943);
        assert!(zeta3() > 1.202 && zeta3() < 1.2021);
        // partial sums plus the integral tail bound 1/(2N^2)
        let n = 1_000_000u64;
        let mut s = crate::quadrature::CompensatedSum::default();
        for i in (1..=n).rev() {
            s.add(1.0 / (i as f64).powi(3));
        }
        let tail = 1.0 / (2.0 * (n as f64).powi(2));
        assert!((s.value() + tail - zeta3()).abs() < 1e-12);
        assert!((s.value() - zeta3()).abs() < 1e-12);
    }

    #[test]
    fn unplanted_identity() {
        let v = unplanted_weight_limit(&TheoryOptions::default()).unwrap();
        assert!((v - zeta3()).abs() < 1e-7, "{v}");
    }

    #[test]
    fn critical_thresholds() {
        let law = exp(1.0);
        let sc = critical_threshold(LimitModel::Path, &law);
        let f = law.cdf(sc);
        assert!((sc - (1.0 - f) / (1.0 + f)).abs() < 1e-12);
        assert_eq!(critical_threshold(LimitModel::Tree(TreeSystem::Unthinned), &law), 0.0);
        let st = critical_threshold(LimitModel::Tree(TreeSystem::Thinned), &law);
        let f = law.cdf(st);
        assert!((st / (1.0 - f) + f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_mu_recovers_almost_everything() {
        // The loss shrinks roughly like mu log(1/mu): about 2e-3 at mu = 1e-3
        // (confirmed by branching simulation), below 1e-3 at mu = 1e-4.
        let opts = TheoryOptions::default();
        for model in [LimitModel::tree(), LimitModel::Path] {
            let at_1e3 = overlap_limit(model, &exp(1e-3), &opts).unwrap();
            assert!(at_1e3 > 0.997 && at_1e3 < 0.999, "{at_1e3}");
            assert!(overlap_limit(model, &exp(1e-4), &opts).unwrap() > 0.999);
        }
    }

    #[test]
    fn monotone_in_mu() {
        let opts = TheoryOptions::default();
        for model in [LimitModel::tree(), LimitModel::Path] {
            let preds: Vec<TheoryPrediction> = [0.05, 0.3, 1.0, 4.0, 15.0, 60.0]
                .iter()
                .map(|&mu| predict(model, &exp(mu), &opts).unwrap())
                .collect();
            for w in preds.windows(2) {
                assert!(w[1].overlap_limit <= w[0].overlap_limit);
                assert!(w[1].weight_limit >= w[0].weight_limit);
            }
            assert!(preds.iter().all(|p| p.weight_limit <= zeta3() + 1e-3));
        }
    }

    #[test]
    fn quadrature_stability() {
        let tight = TheoryOptions {
            quad: QuadOptions {
                abs_tol: 2e-12,
                rel_tol: 2e-12,
                max_segments: 20_000,
            },
            planted_tail: 1e-14,
            lebesgue_start: 80.0,
            lebesgue_cut: 1e-14,
        };
        for model in [LimitModel::tree(), LimitModel::Path] {
            for mu in [0.3, 4.418627, 42.972458] {
                let a = predict(model, &exp(mu), &TheoryOptions::default()).unwrap();
                let b = predict(model, &exp(mu), &tight).unwrap();
                assert!((a.overlap_limit - b.overlap_limit).abs() < 1e-6);
                assert!((a.weight_limit - b.weight_limit).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn spot_values() {
        let opts = TheoryOptions::default();
        let p = predict(LimitModel::tree(), &exp(4.418627), &opts).unwrap();
        assert!((p.overlap_limit - 0.282288).abs() < 5e-3);
        let p = predict(LimitModel::Path, &exp(21.285928), &opts).unwrap();
        assert!((p.overlap_limit - 0.083818).abs() < 5e-3);
        let p = predict(LimitModel::tree(), &exp(8.434651), &opts).unwrap();
        assert!((p.weight_limit - 0.982680).abs() < 5e-3);
        let p = predict(LimitModel::Path, &exp(0.089667), &opts).unwrap();
        assert!((p.weight_limit - 0.072267).abs() < 5e-3);
    }

    #[test]
    fn infinite_mean_rejected() {
        assert!(predict(LimitModel::Path, &NeverRetained, &TheoryOptions::default()).is_err());
    }
}
