//! Extinction probabilities of the thresholded limit trees.
//!
//! At threshold `s` (all edges of weight `>= s` removed) the two sides of a
//! planted edge grow multi-type Galton–Watson trees. Their extinction
//! probabilities solve small fixed-point systems. With `F = F(s)`:
//!
//! * tree model, `minus = p_U`, `plus = p_B`:
//!   `p_B = exp(-s(1 - p_U)) exp(-c(1 - p_B))`,
//!   `p_U = p_B (1 - F + F p_U)`, where `c = F` for [`TreeSystem::Thinned`]
//!   and `c = 1` for [`TreeSystem::Unthinned`];
//! * path model, `minus = plus = p`, `aux = q`:
//!   `p = exp(-s(1 - q)) (1 - F + F p)`, `q = exp(-s(1 - q)) (1 - F + F p)^2`.
//!
//! Two independent routes are provided. [`iterate`] applies the map
//! pointwise from the all-zero state, which climbs monotonically to the
//! smallest fixed point. [`scalar_solve`] eliminates one unknown and finds
//! the unique interior root of a convex scalar map `phi_s` by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which planted-children term the tree system uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeSystem {
    /// Each of the Poisson(1) planted children survives the threshold with
    /// probability `F(s)`, contributing `exp(-F(s)(1 - p_B))`. This is the
    /// system the branching-process simulation realizes.
    #[default]
    Thinned,
    /// The Poisson(1) planted children ignore the threshold and contribute
    /// `exp(-(1 - p_B))`; only the spine child is thinned.
    Unthinned,
}

impl TreeSystem {
    pub fn as_str(self) -> &'static str {
        match self {
            TreeSystem::Thinned => "thinned",
            TreeSystem::Unthinned => "unthinned",
        }
    }

    /// Mean number of retained Poisson(1) planted children.
    #[inline]
    pub(crate) fn planted_rate(self, f: f64) -> f64 {
        match self {
            TreeSystem::Thinned => f,
            TreeSystem::Unthinned => 1.0,
        }
    }
}

/// The limit structure seen from a planted edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitModel {
    Tree(TreeSystem),
    Path,
}

impl LimitModel {
    pub fn tree() -> Self {
        LimitModel::Tree(TreeSystem::default())
    }

    pub fn name(self) -> &'static str {
        match self {
            LimitModel::Tree(_) => "tree",
            LimitModel::Path => "path",
        }
    }

    /// `phi_s'(1)`: the mean offspring of the linearized process at threshold
    /// `s`. An interior fixed point exists iff this exceeds 1.
    pub fn slope_at_one(self, s: f64, f: f64) -> f64 {
        match self {
            LimitModel::Tree(sys) => {
                let spine = if f < 1.0 { s / (1.0 - f) } else { f64::INFINITY };
                spine + sys.planted_rate(f)
            }
            LimitModel::Path => s * (1.0 + f) + f,
        }
    }

    /// One application of the fixed-point map to `(minus, second)` where
    /// `second` is `p_B` (tree) or `q` (path). Returns the new pair.
    #[inline]
    pub fn apply(self, s: f64, f: f64, minus: f64, second: f64) -> (f64, f64) {
        match self {
            LimitModel::Tree(sys) => {
                let (p_u, p_b) = (minus, second);
                let e = (-s * (1.0 - p_u) - sys.planted_rate(f) * (1.0 - p_b)).exp();
                (e * (1.0 - f + f * p_u), e)
            }
            LimitModel::Path => {
                let (p, q) = (minus, second);
                let e = (-s * (1.0 - q)).exp();
                let g = 1.0 - f + f * p;
                (e * g, e * g * g)
            }
        }
    }
}

/// Extinction probabilities at one threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointSolution {
    /// `p_-`: `p_U` (tree) or `p` (path).
    pub minus: f64,
    /// `p_+`: `p_B` (tree) or `p` (path).
    pub plus: f64,
    /// Extinction probability of a side hanging off an unplanted edge:
    /// `p_U` (tree) or `q` (path).
    pub unplanted: f64,
}

impl PointSolution {
    const ONE: PointSolution = PointSolution {
        minus: 1.0,
        plus: 1.0,
        unplanted: 1.0,
    };

    fn from_pair(model: LimitModel, minus: f64, second: f64) -> Self {
        match model {
            LimitModel::Tree(_) => PointSolution {
                minus,
                plus: second,
                unplanted: minus,
            },
            LimitModel::Path => PointSolution {
                minus,
                plus: minus,
                unplanted: second,
            },
        }
    }

    fn second(self, model: LimitModel) -> f64 {
        match model {
            LimitModel::Tree(_) => self.plus,
            LimitModel::Path => self.unplanted,
        }
    }

    /// Probability that the planted edge joining the two sides is kept by
    /// the minimum spanning forest: at least one side dies out.
    pub fn planted_kept(self) -> f64 {
        1.0 - (1.0 - self.minus) * (1.0 - self.plus)
    }

    /// Same for an unplanted edge, whose two sides are identically distributed.
    pub fn unplanted_kept(self) -> f64 {
        let survive = 1.0 - self.unplanted;
        1.0 - survive * survive
    }
}

/// Slack on `phi_s'(1) <= 1` below which no interior root is sought.
pub const CRITICAL_SLACK: f64 = 1e-9;
/// Lower end of the bracket in `y = 1 - x`.
pub const BRACKET_GAP: f64 = 1e-9;
pub const BISECTION_TOL: f64 = 1e-13;

fn check_point(s: f64, f: f64) -> Result<()> {
    if !(s >= 0.0) || s.is_infinite() {
        return Err(Error::domain(format!("threshold s must be finite and >= 0, got {s}")));
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::domain(format!("F(s) must lie in [0, 1], got {f}")));
    }
    Ok(())
}

/// `ln phi_s(1 - y)` computed without cancellation near `y = 0`.
fn log_phi(model: LimitModel, s: f64, f: f64, y: f64) -> f64 {
    match model {
        LimitModel::Tree(sys) => -y * (s / (1.0 - f + f * y) + sys.planted_rate(f)),
        LimitModel::Path => -s * (y * (1.0 + f) - f * y * y) + (-f * y).ln_1p(),
    }
}

/// `phi_s(x)` in the plain variable, for residual checks.
pub fn phi(model: LimitModel, s: f64, f: f64, x: f64) -> f64 {
    log_phi(model, s, f, 1.0 - x).exp()
}

/// Unique root of `phi_s(x) = x` in `(0, 1)`, or `1` when there is none.
fn scalar_root(model: LimitModel, s: f64, f: f64) -> Result<f64> {
    if s == 0.0 || model.slope_at_one(s, f) <= 1.0 + CRITICAL_SLACK {
        return Ok(1.0);
    }
    // phi_s(0) = 0 only for the path model with F(s) = 1.
    if phi(model, s, f, 0.0) == 0.0 {
        return Ok(0.0);
    }
    // h(y) = ln phi(1 - y) - ln(1 - y): negative for x between the root
    // and 1, positive below the root.
    let h = |y: f64| {
        if y >= 1.0 {
            f64::INFINITY
        } else {
            log_phi(model, s, f, y) - (-y).ln_1p()
        }
    };
    if h(0.5) < 0.0 {
        return small_root(model, s, f);
    }
    let (mut lo, mut hi) = (BRACKET_GAP, 0.5);
    let h_lo = h(lo);
    if h_lo.is_nan() {
        return Err(Error::Bracket {
            s,
            detail: format!("phi_s is not finite near 1 (F = {f})"),
        });
    }
    if h_lo >= 0.0 {
        // the root sits within BRACKET_GAP of 1
        return Ok(1.0);
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        if hm.is_nan() {
            return Err(Error::Bracket {
                s,
                detail: format!("phi_s evaluated to NaN at x = {}", 1.0 - mid),
            });
        }
        if hm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 - 0.5 * (lo + hi))
}

/// `ln phi_s(x)` in the plain variable, accurate for small `x`.
fn log_phi_small(model: LimitModel, s: f64, f: f64, x: f64) -> f64 {
    match model {
        LimitModel::Tree(sys) => -(1.0 - x) * (s / (1.0 - f * x) + sys.planted_rate(f)),
        LimitModel::Path => {
            let g = 1.0 - f + f * x;
            -s * (1.0 - x * g) + g.ln()
        }
    }
}

/// Root below 1/2, bisected in `t = ln x` so that tiny extinction
/// probabilities keep their relative precision. The root is at least
/// `phi_s(0)`, which brackets it from below.
fn small_root(model: LimitModel, s: f64, f: f64) -> Result<f64> {
    let g = |t: f64| log_phi_small(model, s, f, t.exp()) - t;
    let (mut lo, mut hi) = (log_phi_small(model, s, f, 0.0), 0.5f64.ln());
    if !lo.is_finite() {
        return Err(Error::Bracket {
            s,
            detail: format!("phi_s(0) is not positive (F = {f})"),
        });
    }
    // Near t = -700 the float spacing exceeds the tolerance; stop once the
    // bracket cannot shrink.
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.is_nan() {
            return Err(Error::Bracket {
                s,
                detail: format!("phi_s evaluated to NaN at x = {}", mid.exp()),
            });
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Scalar route at one threshold: solve for the root `x*` of `phi_s` and
/// recover the other unknown algebraically.
pub fn scalar_solve(model: LimitModel, s: f64, f: f64) -> Result<PointSolution> {
    check_point(s, f)?;
    let x = scalar_root(model, s, f)?;
    if x == 1.0 {
        return Ok(PointSolution::ONE);
    }
    Ok(match model {
        LimitModel::Tree(_) => {
            let p_u = x * (1.0 - f) / (1.0 - x * f);
            PointSolution::from_pair(model, p_u, x)
        }
        LimitModel::Path => PointSolution::from_pair(model, x, x * (1.0 - f + f * x)),
    })
}

/// `(p_B, p_U)` for the tree model.
pub fn scalar_tree(s: f64, f: f64, system: TreeSystem) -> Result<(f64, f64)> {
    let sol = scalar_solve(LimitModel::Tree(system), s, f)?;
    Ok((sol.plus, sol.minus))
}

/// `(p, q)` for the path model. Returns `(1, 1)` when
/// `s <= (1 - F) / (1 + F)`.
pub fn scalar_path(s: f64, f: f64) -> Result<(f64, f64)> {
    let sol = scalar_solve(LimitModel::Path, s, f)?;
    Ok((sol.minus, sol.unplanted))
}

/// A function sampled on a strictly increasing grid starting at 0, linearly
/// interpolated and held constant outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(Error::domain(format!(
                "grid has {} points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain(format!("value {v} outside [0, 1]")));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, s: f64) -> f64 {
        let g = &self.grid;
        if s <= g[0] {
            return self.values[0];
        }
        let last = g.len() - 1;
        if s >= g[last] {
            return self.values[last];
        }
        let i = g.partition_point(|&x| x <= s) - 1;
        let t = (s - g[i]) / (g[i + 1] - g[i]);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.first() != Some(&0.0) {
        return Err(Error::domain("grid must start at 0"));
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) || !grid.iter().all(|x| x.is_finite()) {
        return Err(Error::domain("grid must be finite and strictly increasing"));
    }
    Ok(())
}

/// Default layout: half the points uniform on `[0, 2)`, the rest geometric
/// on `[2, s_max]`. If `s_max <= 2` the whole grid is uniform.
pub fn default_grid(points: usize, s_max: f64) -> Vec<f64> {
    assert!(points >= 2 && s_max > 0.0);
    if s_max <= 2.0 {
        return uniform_grid(points, s_max);
    }
    let n_uniform = points / 2;
    let n_geo = points - n_uniform;
    let mut grid: Vec<f64> = (0..n_uniform).map(|i| 2.0 * i as f64 / n_uniform as f64).collect();
    if n_geo == 1 {
        grid.push(s_max);
    } else {
        let ratio = s_max / 2.0;
        grid.extend((0..n_geo).map(|k| 2.0 * ratio.powf(k as f64 / (n_geo - 1) as f64)));
    }
    grid
}

pub fn uniform_grid(points: usize, s_max: f64) -> Vec<f64> {
    assert!(points >= 2 && s_max > 0.0);
    (0..points).map(|i| s_max * i as f64 / (points - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Points with `|phi_s'(1) - 1|` inside this band converge too slowly to
    /// iterate and take the scalar solution instead.
    pub critical_band: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 1_000_000,
            critical_band: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointSolution {
    pub model: LimitModel,
    /// `p_-` on the grid.
    pub minus: GridFunction,
    /// `p_+` on the grid.
    pub plus: GridFunction,
    /// `q` for the path model; `None` for the tree model.
    pub aux: Option<GridFunction>,
    /// Largest iteration count used at any grid point (0 for the scalar route).
    pub iterations_used: usize,
    /// `sup |T(x) - x|` over the grid at the returned state.
    pub residual_sup_norm: f64,
    /// Number of steps at which some coordinate decreased.
    pub monotone_violations: usize,
    /// Points resolved analytically instead of by iteration.
    pub analytic_points: usize,
}

impl FixedPointSolution {
    pub fn grid(&self) -> &[f64] {
        self.minus.grid()
    }

    pub fn point(&self, i: usize) -> PointSolution {
        let minus = self.minus.values()[i];
        let plus = self.plus.values()[i];
        let unplanted = match &self.aux {
            Some(q) => q.values()[i],
            None => minus,
        };
        PointSolution {
            minus,
            plus,
            unplanted,
        }
    }

    /// Largest violation of the algebraic identity between the two unknowns:
    /// `p_U = p_B (1 - F + F p_U)` (tree) or `q = p (1 - F + F p)` (path).
    pub fn ratio_identity_residual(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        self.grid()
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let f = cdf(s);
                let pt = self.point(i);
                match self.model {
                    LimitModel::Tree(_) => (pt.minus - pt.plus * (1.0 - f + f * pt.minus)).abs(),
                    LimitModel::Path => (pt.unplanted - pt.minus * (1.0 - f + f * pt.minus)).abs(),
                }
            })
            .fold(0.0, f64::max)
    }

    fn assemble(model: LimitModel, grid: Vec<f64>, points: &[PointSolution]) -> Result<Self> {
        let col = |g: fn(&PointSolution) -> f64| points.iter().map(g).collect::<Vec<_>>();
        let minus = GridFunction::new(grid.clone(), col(|p| p.minus))?;
        let plus = GridFunction::new(grid.clone(), col(|p| p.plus))?;
        let aux = match model {
            LimitModel::Path => Some(GridFunction::new(grid, col(|p| p.unplanted))?),
            LimitModel::Tree(_) => None,
        };
        Ok(Self {
            model,
            minus,
            plus,
            aux,
            iterations_used: 0,
            residual_sup_norm: 0.0,
            monotone_violations: 0,
            analytic_points: 0,
        })
    }
}

struct PointIteration {
    state: (f64, f64),
    iterations: usize,
    residual: f64,
    violations: usize,
    analytic: bool,
}

fn iterate_point(model: LimitModel, s: f64, f: f64, opts: &IterationOptions) -> Result<PointIteration> {
    let slope = model.slope_at_one(s, f);
    if s == 0.0 || (slope - 1.0).abs() <= opts.critical_band {
        let sol = scalar_solve(model, s, f)?;
        let state = (sol.minus, sol.second(model));
        let next = model.apply(s, f, state.0, state.1);
        return Ok(PointIteration {
            state,
            iterations: 0,
            residual: (next.0 - state.0).abs().max((next.1 - state.1).abs()),
            violations: 0,
            analytic: true,
        });
    }
    let mut state = (0.0f64, 0.0f64);
    let mut violations = 0;
    for it in 1..=opts.max_iter {
        let next = model.apply(s, f, state.0, state.1);
        if next.0 < state.0 - f64::EPSILON || next.1 < state.1 - f64::EPSILON {
            violations += 1;
        }
        let change = (next.0 - state.0).abs().max((next.1 - state.1).abs());
        state = next;
        if change < opts.tol {
            let after = model.apply(s, f, state.0, state.1);
            return Ok(PointIteration {
                state,
                iterations: it,
                residual: (after.0 - state.0).abs().max((after.1 - state.1).abs()),
                violations,
                analytic: false,
            });
        }
    }
    let after = model.apply(s, f, state.0, state.1);
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: (after.0 - state.0).abs().max((after.1 - state.1).abs()),
    })
}

/// Iterative route: applies the map at every grid point starting from zero
/// until successive iterates differ by less than `opts.tol`.
pub fn iterate(
    model: LimitModel,
    cdf: impl Fn(f64) -> f64,
    grid: &[f64],
    opts: &IterationOptions,
) -> Result<FixedPointSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    validate_grid(grid)?;
    let mut points = Vec::with_capacity(grid.len());
    let (mut iterations, mut residual, mut violations, mut analytic) = (0, 0.0f64, 0, 0);
    for &s in grid {
        let r = iterate_point(model, s, cdf(s), opts)?;
        points.push(PointSolution::from_pair(model, r.state.0, r.state.1));
        iterations = iterations.max(r.iterations);
        residual = residual.max(r.residual);
        violations += r.violations;
        analytic += usize::from(r.analytic);
    }
    let mut sol = FixedPointSolution::assemble(model, grid.to_vec(), &points)?;
    sol.iterations_used = iterations;
    sol.residual_sup_norm = residual;
    sol.monotone_violations = violations;
    sol.analytic_points = analytic;
    Ok(sol)
}

pub fn iterate_tree(
    cdf: impl Fn(f64) -> f64,
    grid: &[f64],
    system: TreeSystem,
    opts: &IterationOptions,
) -> Result<FixedPointSolution> {
    iterate(LimitModel::Tree(system), cdf, grid, opts)
}

pub fn iterate_path(cdf: impl Fn(f64) -> f64, grid: &[f64], opts: &IterationOptions) -> Result<FixedPointSolution> {
    iterate(LimitModel::Path, cdf, grid, opts)
}

/// Scalar route on a whole grid.
pub fn scalar_on_grid(model: LimitModel, cdf: impl Fn(f64) -> f64, grid: &[f64]) -> Result<FixedPointSolution> {
    validate_grid(grid)?;
    let points = grid
        .iter()
        .map(|&s| scalar_solve(model, s, cdf(s)))
        .collect::<Result<Vec<_>>>()?;
    let mut sol = FixedPointSolution::assemble(model, grid.to_vec(), &points)?;
    sol.residual_sup_norm = grid
        .iter()
        .zip(&points)
        .map(|(&s, p)| {
            let f = cdf(s);
            let second = p.second(model);
            let next = model.apply(s, f, p.minus, second);
            (next.0 - p.minus).abs().max((next.1 - second).abs())
        })
        .fold(0.0, f64::max);
    sol.analytic_points = grid.len();
    Ok(sol)
}

/// Largest deviation between an iterative solution and the scalar route on
/// the same grid, over every tracked function.
pub fn cross_check(solution: &FixedPointSolution, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, &s) in solution.grid().iter().enumerate() {
        let a = solution.point(i);
        let b = scalar_solve(solution.model, s, cdf(s))?;
        worst = worst
            .max((a.minus - b.minus).abs())
            .max((a.plus - b.plus).abs())
            .max((a.unplanted - b.unplanted).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THINNED: LimitModel = LimitModel::Tree(TreeSystem::Thinned);
    const UNTHINNED: LimitModel = LimitModel::Tree(TreeSystem::Unthinned);

    /// Plain bisection of `x = exp(-m (1 - x))` on `(0, 1)`: the extinction
    /// probability of a Poisson(m) Galton–Watson tree.
    fn poisson_extinction(m: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (-m * (1.0 - mid)).exp() > mid {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn exp_cdf(mu: f64) -> impl Fn(f64) -> f64 {
        move |s: f64| -(-s / mu).exp_m1()
    }

    #[test]
    fn poisson_oracle_values() {
        assert!((poisson_extinction(3.0) - 0.059_520_209_292_640).abs() < 1e-12);
        assert!((poisson_extinction(2.0) - 0.203_187_869_979_979).abs() < 1e-12);
    }

    #[test]
    fn zero_threshold_is_extinct() {
        for model in [THINNED, UNTHINNED, LimitModel::Path] {
            assert_eq!(scalar_solve(model, 0.0, 0.0).unwrap(), PointSolution::ONE);
        }
        assert_eq!(scalar_tree(0.0, 0.0, TreeSystem::Unthinned).unwrap(), (1.0, 1.0));
        let sol = iterate_path(exp_cdf(1.0), &[0.0, 0.5], &IterationOptions::default()).unwrap();
        assert_eq!(sol.point(0).minus, 1.0);
        assert_eq!(sol.point(0).unplanted, 1.0);
    }

    #[test]
    fn unthinned_tree_without_planted_weights() {
        // F = 0: p_U = p_B and the B-equation is Poisson(s + 1) extinction.
        let oracle = poisson_extinction(3.0);
        let (p_b, p_u) = scalar_tree(2.0, 0.0, TreeSystem::Unthinned).unwrap();
        assert!((p_b - oracle).abs() < 1e-12);
        assert_eq!(p_u, p_b);
        let it = iterate_tree(|_| 0.0, &[0.0, 2.0], TreeSystem::Unthinned, &IterationOptions::default()).unwrap();
        assert!((it.plus.values()[1] - oracle).abs() < 1e-10);

        let (p_b, p_u) = scalar_tree(1.0, 0.0, TreeSystem::Unthinned).unwrap();
        assert!((p_b - poisson_extinction(2.0)).abs() < 1e-12);
        assert_eq!(p_u, p_b);
    }

    #[test]
    fn thinned_tree_without_planted_weights() {
        // F = 0: only the Poisson(s) unplanted children remain.
        let (p_b, p_u) = scalar_tree(2.0, 0.0, TreeSystem::Thinned).unwrap();
        assert!((p_b - poisson_extinction(2.0)).abs() < 1e-12);
        assert_eq!(p_u, p_b);
        // subcritical below s = 1
        assert_eq!(scalar_tree(0.9, 0.0, TreeSystem::Thinned).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn path_without_planted_weights() {
        let oracle = poisson_extinction(2.0);
        let (p, q) = scalar_path(2.0, 0.0).unwrap();
        assert!((p - oracle).abs() < 1e-12 && (q - oracle).abs() < 1e-12);
        let it = iterate_path(|_| 0.0, &[0.0, 2.0], &IterationOptions::default()).unwrap();
        assert!((it.minus.values()[1] - oracle).abs() < 1e-10);
    }

    #[test]
    fn path_threshold() {
        assert_eq!(scalar_path(0.2, 0.0).unwrap(), (1.0, 1.0));
        // below (1 - F)/(1 + F) for Exp(1) planted weights
        let cdf = exp_cdf(1.0);
        for s in [0.05, 0.2, 0.4] {
            let f = cdf(s);
            assert!(s <= (1.0 - f) / (1.0 + f));
            assert_eq!(scalar_path(s, f).unwrap(), (1.0, 1.0));
            let it = iterate_path(&cdf, &[0.0, s], &IterationOptions::default()).unwrap();
            assert!((it.minus.values()[1] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn path_exponential_unit_mean() {
        // Independent oracle: plain bisection on phi_s(x) - x in x.
        let f = 1.0 - (-1.0f64).exp();
        let g = |x: f64| (-(1.0 - x * (1.0 - f + f * x))).exp() * (1.0 - f + f * x) - x;
        let (mut lo, mut hi) = (0.0, 1.0 - 1e-6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((oracle - 0.201_196_828_594).abs() < 1e-10);
        let (p, q) = scalar_path(1.0, f).unwrap();
        assert!((p - oracle).abs() < 1e-10);
        assert!(q <= p);
    }

    #[test]
    fn root_residuals() {
        for model in [THINNED, UNTHINNED, LimitModel::Path] {
            for &(s, f) in &[(0.5, 0.3), (1.0, 0.632), (3.0, 0.1), (10.0, 0.99), (0.9, 0.05)] {
                let sol = scalar_solve(model, s, f).unwrap();
                // the scalar unknown is p_B (tree) or p (path); both are `plus`
                let x = sol.plus;
                if x < 1.0 {
                    assert!((phi(model, s, f, x) - x).abs() < 1e-12, "{model:?} s={s}");
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(scalar_solve(LimitModel::Path, -1.0, 0.0).is_err());
        assert!(scalar_solve(LimitModel::Path, 1.0, 1.5).is_err());
        assert!(scalar_solve(LimitModel::Path, f64::NAN, 0.5).is_err());
        assert!(GridFunction::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(GridFunction::new(vec![0.5, 1.0], vec![0.0; 2]).is_err());
        let bad = IterationOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(iterate_path(|_| 0.0, &[0.0, 1.0], &bad).is_err());
    }

    #[test]
    fn iteration_cap_reports_residual() {
        let opts = IterationOptions {
            max_iter: 3,
            ..Default::default()
        };
        match iterate_path(|_| 0.0, &[0.0, 2.0], &opts) {
            Err(Error::Convergence { iterations: 3, residual }) => assert!(residual > 0.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn grid_function_interpolates() {
        let g = GridFunction::new(vec![0.0, 1.0, 3.0], vec![1.0, 0.5, 0.1]).unwrap();
        assert_eq!(g.eval(0.5), 0.75);
        assert!((g.eval(2.0) - 0.3).abs() < 1e-15);
        assert_eq!(g.eval(10.0), 0.1);
        assert_eq!(g.eval(-1.0), 1.0);
    }

    #[test]
    fn default_grid_layout() {
        let g = default_grid(512, 40.0);
        assert_eq!(g.len(), 512);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[256], 2.0);
        assert!((g[511] - 40.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn solvers_agree_classical() {
        // F = 0 on [0.5, 5]
        let grid: Vec<f64> = std::iter::once(0.0).chain((0..100).map(|i| 0.5 + 4.5 * i as f64 / 99.0)).collect();
        for model in [THINNED, UNTHINNED, LimitModel::Path] {
            let it = iterate(model, |_| 0.0, &grid, &IterationOptions::default()).unwrap();
            assert!(cross_check(&it, |_| 0.0).unwrap() < 1e-8, "{model:?}");
        }
    }

    #[test]
    fn solution_invariants_exponential() {
        let opts = IterationOptions::default();
        let grid = default_grid(200, 40.0);
        for model in [THINNED, UNTHINNED, LimitModel::Path] {
            for mu in [0.3, 1.0, 4.42] {
                let cdf = exp_cdf(mu);
                let sol = iterate(model, &cdf, &grid, &opts).unwrap();
                assert_eq!(sol.monotone_violations, 0);
                assert!(sol.residual_sup_norm <= opts.tol);
                assert!(sol.ratio_identity_residual(&cdf) <= 10.0 * opts.tol);
                assert!(cross_check(&sol, &cdf).unwrap() < 1e-6);
                for i in 0..grid.len() {
                    let p = sol.point(i);
                    match model {
                        LimitModel::Tree(_) => assert!(p.minus <= p.plus + 1e-15),
                        LimitModel::Path => assert!(p.unplanted <= p.minus + 1e-15),
                    }
                }
                for f in [&sol.minus, &sol.plus] {
                    assert!(f.values().windows(2).all(|w| w[1] <= w[0] + 1e-12));
                }
                // a nontrivial root must exist well above the critical point
                assert!(sol.plus.eval(20.0) < 1.0);
            }
        }
    }

    #[test]
    fn smallest_fixed_point() {
        // all-ones is a fixed point; the iteration stays at or below it and
        // strictly below where a nontrivial root exists
        let cdf = exp_cdf(1.0);
        let grid = default_grid(64, 20.0);
        let sol = iterate_path(&cdf, &grid, &IterationOptions::default()).unwrap();
        for (i, &s) in grid.iter().enumerate() {
            let f = cdf(s);
            assert_eq!(LimitModel::Path.apply(s, f, 1.0, 1.0), (1.0, 1.0));
            let p = sol.point(i);
            if s > (1.0 - f) / (1.0 + f) + 1e-3 {
                assert!(p.minus < 1.0);
            } else {
                assert!(p.minus <= 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn scalar_outputs_are_probabilities(s in 0.0f64..60.0, f in 0.0f64..=1.0) {
            for model in [THINNED, UNTHINNED, LimitModel::Path] {
                let p = scalar_solve(model, s, f).unwrap();
                for v in [p.minus, p.plus, p.unplanted] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            let (p, q) = scalar_path(s, f).unwrap();
            prop_assert!(q <= p);
        }
    }

    #[test]
    fn tiny_roots_keep_relative_precision() {
        let cdf = exp_cdf(21.285928);
        for model in [THINNED, UNTHINNED, LimitModel::Path] {
            for s in [40.0, 160.0, 640.0] {
                let f = cdf(s);
                let x = scalar_root(model, s, f).unwrap();
                assert!(x > 0.0 && x < 1e-15);
                let rel = log_phi_small(model, s, f, x) - x.ln();
                assert!(rel.abs() < 1e-9, "{model:?} s={s} rel={rel}");
            }
        }
    }
}
