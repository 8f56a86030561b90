//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl Eq for Segment {}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kronrod.abs();
    let mut fv = [0.0f64; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let (value, asc, abs_k) = (kronrod * half, asc * half.abs(), abs_k * half.abs());
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_k);
    }
    Segment { a, b, value, error }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_segments: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub segments: usize,
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the
/// segments between consecutive `points` (place known kinks there) and
/// bisecting the segment with the largest error estimate until the total
/// estimate meets the tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, points: &[f64], opts: &QuadOptions) -> Result<QuadResult> {
    if points.len() < 2 || !points.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::domain("quadrature breakpoints must be nondecreasing"));
    }
    let mut heap: BinaryHeap<Segment> = points
        .windows(2)
        .filter(|w| w[0] < w[1])
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    let total = |heap: &BinaryHeap<Segment>| {
        let (mut v, mut e) = (CompensatedSum::default(), CompensatedSum::default());
        for s in heap.iter() {
            v.add(s.value);
            e.add(s.error);
        }
        (v.value(), e.value())
    };
    loop {
        let (value, error) = total(&heap);
        if !value.is_finite() {
            return Err(Error::Quadrature {
                a: points[0],
                b: points[points.len() - 1],
                error: f64::INFINITY,
            });
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) || heap.is_empty() {
            return Ok(QuadResult {
                value,
                abs_error: error,
                segments: heap.len(),
            });
        }
        if heap.len() >= opts.max_segments {
            return Err(Error::Quadrature {
                a: points[0],
                b: points[points.len() - 1],
                error,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further; keep it and accept its error
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, &[0.0, 2.0], &QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_moments() {
        let r = integrate(|x: f64| x * (-x).exp(), &[0.0, 5.0, 60.0], &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn kink_at_breakpoint() {
        let f = |x: f64| (x - 1.0).abs();
        let r = integrate(f, &[0.0, 1.0, 3.0], &QuadOptions::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-13);
        // without the breakpoint the adaptive loop still gets there
        let r = integrate(f, &[0.0, 3.0], &QuadOptions::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-10);
    }

    #[test]
    fn compensated_sum() {
        let mut s = CompensatedSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
