//! Doubly periodic vortices: `Δv = λ e^{u₀+v}(e^{u₀+v} − 1)^5 + 4πN/|Ω|` with the
//! background `Δu₀ = −4πN/|Ω| + 4π Σ n_j δ_{p_j}`, solved by monotone iteration.

use crate::fft::{Laplacian, PeriodicSolver};
use crate::model::{nonlinearity_f, sharp_k_factor, ModelError, VortexSet, F_MIN};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("vortex {0} lies outside the fundamental cell")]
    VortexOutside(usize),
    #[error("vortices {0} and {1} round to the same grid node; refine the grid")]
    VortexOnSharedNode(usize, usize),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("iterate {iteration} rose above its predecessor by {excess:e}")]
    MonotonicityViolation { iteration: usize, excess: f64 },
    #[error("no convergence up to lambda = {0} while seeking an upper bracket")]
    UpperSeedFailure(f64),
    #[error("cutoff radius too large: {0}")]
    EpsTooLarge(String),
    #[error("sub-solution inequality fails by {0:e}")]
    SubsolutionCheck(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TorusGrid {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
}

impl TorusGrid {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self, TorusError> {
        if !(lx.is_finite() && ly.is_finite() && lx > 0.0 && ly > 0.0) {
            return Err(TorusError::InvalidGrid("periods must be positive".into()));
        }
        if nx < 16 || ny < 16 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(TorusError::InvalidGrid(format!(
                "nodes per period must be even and at least 16, got {nx} x {ny}"
            )));
        }
        Ok(Self { lx, ly, nx, ny })
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, p: usize) -> (f64, f64) {
        ((p % self.nx) as f64 * self.hx(), (p / self.nx) as f64 * self.hy())
    }

    /// Index of the node nearest to `(x, y)`, wrapping periodically.
    pub fn nearest(&self, x: f64, y: f64) -> usize {
        let i = (x / self.hx()).round().rem_euclid(self.nx as f64) as usize % self.nx;
        let j = (y / self.hy()).round().rem_euclid(self.ny as f64) as usize % self.ny;
        j * self.nx + i
    }

    /// Minimum-image distance between two points.
    pub fn distance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let wrap = |d: f64, l: f64| {
            let d = d.rem_euclid(l);
            d.min(l - d)
        };
        wrap(a.0 - b.0, self.lx).hypot(wrap(a.1 - b.1, self.ly))
    }

    pub fn solver(&self, laplacian: Laplacian) -> PeriodicSolver {
        PeriodicSolver::new(self.nx, self.ny, self.lx, self.ly, laplacian)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    pub grid: TorusGrid,
    pub values: Vec<f64>,
}

impl TorusField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: TorusGrid, f: F) -> Self {
        let values = (0..grid.len())
            .map(|p| {
                let (x, y) = grid.node(p);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Pointwise sum, for `u = u₀ + v`.
    pub fn plus(&self, other: &TorusField) -> Result<TorusField, TorusError> {
        if self.grid != other.grid {
            return Err(TorusError::GridMismatch);
        }
        Ok(TorusField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }
}

/// `(6⁶/5⁵)·4πN/|Ω|`, below which no solution exists.
pub fn lambda_lower_bound(n: u32, area: f64) -> f64 {
    -4.0 * PI * n as f64 / (area * F_MIN)
}

/// `κ = √(12/λ)`.
pub fn kappa_c_from_lambda_c(lambda_c: f64) -> f64 {
    (12.0 / lambda_c).sqrt()
}

/// `√(5⁵|Ω|/(6⁵·2πN))`, the largest admissible critical `κ`.
pub fn kappa_upper_bound(n: u32, area: f64) -> f64 {
    (3125.0 * area / (7776.0 * 2.0 * PI * n as f64)).sqrt()
}

/// Node indices of the vortices, rejecting points outside the cell or sharing a node.
fn vortex_nodes(grid: &TorusGrid, vortices: &VortexSet) -> Result<Vec<(usize, u32)>, TorusError> {
    let mut nodes: Vec<(usize, u32)> = Vec::with_capacity(vortices.len());
    for (k, v) in vortices.iter().enumerate() {
        if !(0.0..grid.lx).contains(&v.x) || !(0.0..grid.ly).contains(&v.y) {
            return Err(TorusError::VortexOutside(k));
        }
        let p = grid.nearest(v.x, v.y);
        if let Some(other) = nodes.iter().position(|&(q, _)| q == p) {
            return Err(TorusError::VortexOnSharedNode(other, k));
        }
        nodes.push((p, v.n));
    }
    Ok(nodes)
}

/// Mean-zero background with nearest-node Dirac masses of weight `4πn_j/(h_x h_y)`.
pub fn build_background_u0(grid: &TorusGrid, vortices: &VortexSet, laplacian: Laplacian) -> Result<TorusField, TorusError> {
    let nodes = vortex_nodes(grid, vortices)?;
    let n_total = vortices.total_winding();
    if n_total == 0 {
        return Ok(TorusField::zeros(*grid));
    }
    let mut rhs = vec![-4.0 * PI * n_total as f64 / grid.area(); grid.len()];
    let w = 4.0 * PI / grid.cell_area();
    for (p, n) in nodes {
        rhs[p] += w * n as f64;
    }
    let values = grid.solver(laplacian).solve(&rhs, 0.0);
    Ok(TorusField { grid: *grid, values })
}

/// Periodic solution of `(Δ − K)v = rhs`.
pub fn helmholtz_solve(grid: &TorusGrid, k: f64, rhs: &TorusField, laplacian: Laplacian) -> TorusField {
    TorusField {
        grid: *grid,
        values: grid.solver(laplacian).solve(&rhs.values, k),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverOptions {
    /// `K = k_factor·λ`.
    pub k_factor: f64,
    /// Sup-norm residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Drop of `min(u₀ + v)` below its first-iterate value that signals divergence.
    pub divergence_drop: f64,
    pub laplacian: Laplacian,
    /// Allowed rise of an iterate over its predecessor.
    pub monotonicity_slack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            k_factor: 6.0,
            tol: 1e-10,
            max_iter: 5000,
            divergence_drop: 50.0,
            laplacian: Laplacian::FiniteDifference,
            monotonicity_slack: 1e-13,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), TorusError> {
        let bad = |m: String| Err(TorusError::InvalidOptions(m));
        if !(self.k_factor >= sharp_k_factor()) {
            return bad(format!(
                "K/lambda = {} is below the order-preserving bound {}",
                self.k_factor,
                sharp_k_factor()
            ));
        }
        if !(self.tol > 0.0) || !(self.divergence_drop > 0.0) || self.max_iter == 0 {
            return bad("tol, divergence_drop and max_iter must be positive".into());
        }
        if !(self.monotonicity_slack >= 0.0) {
            return bad("monotonicity_slack must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OutcomeTag {
    Converged,
    Diverged,
    /// Iteration budget exhausted while the residual was still shrinking.
    Unresolved,
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub tag: OutcomeTag,
    pub v: TorusField,
    pub u0: TorusField,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Largest `v_n − v_{n−1}` seen over all iterations.
    pub max_increment: f64,
}

impl IterationOutcome {
    pub fn u(&self) -> TorusField {
        self.u0.plus(&self.v).expect("same grid")
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }

    pub fn converged(&self) -> bool {
        self.tag == OutcomeTag::Converged
    }
}

/// `‖Δ_h v − λf(u₀ + v) − c‖_∞`.
pub fn residual(solver: &PeriodicSolver, u0: &[f64], v: &[f64], lambda: f64, c: f64) -> f64 {
    let lv = solver.apply(v);
    lv.iter()
        .zip(u0.iter().zip(v))
        .map(|(l, (a, b))| (l - lambda * nonlinearity_f(a + b) - c).abs())
        .fold(0.0, f64::max)
}

/// Run `(Δ − K)v_n = λf(u₀ + v_{n−1}) − Kv_{n−1} + 4πN/|Ω|` from `v₀ = −u₀`.
pub fn monotone_iterate(
    grid: &TorusGrid,
    vortices: &VortexSet,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<IterationOutcome, TorusError> {
    let u0 = build_background_u0(grid, vortices, opts.laplacian)?;
    let v0 = TorusField {
        grid: *grid,
        values: u0.values.iter().map(|x| -x).collect(),
    };
    iterate_from(grid, vortices.total_winding(), lambda, u0, v0, opts, true)
}

/// The iteration from an arbitrary super-solution `v_start`.
pub fn iterate_from(
    grid: &TorusGrid,
    n_total: u32,
    lambda: f64,
    u0: TorusField,
    v_start: TorusField,
    opts: &SolverOptions,
    check_monotone: bool,
) -> Result<IterationOutcome, TorusError> {
    opts.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ModelError::InvalidCoupling(lambda).into());
    }
    if u0.grid != *grid || v_start.grid != *grid {
        return Err(TorusError::GridMismatch);
    }
    let solver = grid.solver(opts.laplacian);
    let c = 4.0 * PI * n_total as f64 / grid.area();
    let k = opts.k_factor * lambda;
    let mut v = v_start.values;
    let mut history = vec![residual(&solver, &u0.values, &v, lambda, c)];
    let mut max_increment = f64::NEG_INFINITY;
    let mut tag = None;
    let mut min_first = None;
    let mut iterations = 0;
    if history[0] < opts.tol {
        tag = Some(OutcomeTag::Converged);
    }
    let mut rhs = vec![0.0; v.len()];
    while tag.is_none() && iterations < opts.max_iter {
        for (r, (a, b)) in rhs.iter_mut().zip(u0.values.iter().zip(&v)) {
            *r = lambda * nonlinearity_f(a + b) - k * b + c;
        }
        let next = solver.solve(&rhs, k);
        iterations += 1;
        let inc = next.iter().zip(&v).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        max_increment = max_increment.max(inc);
        if check_monotone && inc > opts.monotonicity_slack {
            return Err(TorusError::MonotonicityViolation { iteration: iterations, excess: inc });
        }
        v = next;
        let res = residual(&solver, &u0.values, &v, lambda, c);
        history.push(res);
        let min_u = u0.values.iter().zip(&v).map(|(a, b)| a + b).fold(f64::INFINITY, f64::min);
        let first = *min_first.get_or_insert(min_u);
        if res < opts.tol {
            tag = Some(OutcomeTag::Converged);
        } else if min_u < first - opts.divergence_drop && !shrinking(&history) {
            tag = Some(OutcomeTag::Diverged);
        }
    }
    let tag = tag.unwrap_or(if shrinking(&history) {
        OutcomeTag::Unresolved
    } else {
        OutcomeTag::Diverged
    });
    Ok(IterationOutcome {
        tag,
        v: TorusField { grid: *grid, values: v },
        u0,
        iterations,
        residual_history: history,
        max_increment,
    })
}

/// Residual fell by at least 0.1% over the last 100 iterations.
fn shrinking(history: &[f64]) -> bool {
    let n = history.len();
    if n <= 100 {
        return true;
    }
    history[n - 1] < 0.999 * history[n - 101]
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LambdaCritical {
    pub lambda_c: f64,
    pub bracket_width: f64,
    /// Smallest coupling at which the iteration was seen to converge.
    pub lambda_converged: f64,
    pub oracle_calls: usize,
    /// Every coupling tried, in order, with whether it converged.
    pub scan: Vec<(f64, bool)>,
}

/// Bisect for the critical coupling between the necessary bound and a converging seed.
/// Unresolved runs count as not converged, so the estimate errs high.
pub fn estimate_lambda_c(
    grid: &TorusGrid,
    vortices: &VortexSet,
    opts: &SolverOptions,
    rel_width: f64,
) -> Result<LambdaCritical, TorusError> {
    let n = vortices.total_winding();
    if n == 0 {
        return Ok(LambdaCritical {
            lambda_c: 0.0,
            bracket_width: 0.0,
            lambda_converged: 0.0,
            oracle_calls: 0,
            scan: Vec::new(),
        });
    }
    let mut lo = lambda_lower_bound(n, grid.area());
    let mut hi = 2.0 * lo;
    let mut scan = Vec::new();
    let ok = |lam: f64, scan: &mut Vec<(f64, bool)>| -> Result<bool, TorusError> {
        let c = monotone_iterate(grid, vortices, lam, opts)?.converged();
        scan.push((lam, c));
        Ok(c)
    };
    let mut doublings = 0;
    while !ok(hi, &mut scan)? {
        doublings += 1;
        if doublings >= 40 {
            return Err(TorusError::UpperSeedFailure(hi));
        }
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo) > rel_width * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid, &mut scan)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LambdaCritical {
        lambda_c: 0.5 * (lo + hi),
        bracket_width: hi - lo,
        lambda_converged: hi,
        oracle_calls: scan.len(),
        scan,
    })
}

/// Smooth step: 1 for `s ≤ 0`, 0 for `s ≥ 1`, `C^∞` in between.
fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    if s >= 1.0 {
        return 0.0;
    }
    let h = |x: f64| (-1.0 / x).exp();
    h(1.0 - s) / (h(1.0 - s) + h(s))
}

#[derive(Debug, Clone)]
pub struct Subsolution {
    pub w0: TorusField,
    /// Every `λ` at or above this makes `w0` a sub-solution.
    pub valid_for_lambda_ge: f64,
    pub mu0: f64,
    pub mu1: f64,
}

/// Sub-solution `w0` of the discrete problem from a cutoff around the vortices.
///
/// `Δ_h w = (8πN/|Ω|)(f_ε − mean f_ε)`, shifted so that `e^{u₀+w₀} ≤ 1`. The
/// threshold is `max(4πN/|Ω| − g_ε)⁺ / (μ₀(1 − μ₁)^5)` with `μ₀, μ₁` the extreme
/// values of `e^{u₀+w₀}` off the inner balls; the shift maximises the denominator.
pub fn construct_subsolution(
    grid: &TorusGrid,
    vortices: &VortexSet,
    eps: f64,
    laplacian: Laplacian,
) -> Result<Subsolution, TorusError> {
    let n_total = vortices.total_winding();
    if n_total == 0 {
        return Ok(Subsolution {
            w0: TorusField::zeros(*grid),
            valid_for_lambda_ge: 0.0,
            mu0: 1.0,
            mu1: 1.0,
        });
    }
    if !(eps > 0.0) {
        return Err(TorusError::EpsTooLarge("eps must be positive".into()));
    }
    let area = grid.area();
    let nf = n_total as f64;
    if 2.0 - 8.0 * PI * nf * eps * eps / area <= 1.0 {
        return Err(TorusError::EpsTooLarge("g_eps does not dominate inside the inner balls".into()));
    }
    if 4.0 * eps >= grid.lx.min(grid.ly) {
        return Err(TorusError::EpsTooLarge("balls wrap around the torus".into()));
    }
    let pts: Vec<(f64, f64)> = vortices.iter().map(|v| (v.x, v.y)).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if grid.distance(pts[i], pts[j]) < 4.0 * eps {
                return Err(TorusError::EpsTooLarge(format!("balls around vortices {i} and {j} overlap")));
            }
        }
    }
    let u0 = build_background_u0(grid, vortices, laplacian)?;
    let dist = |p: usize| pts.iter().map(|&q| grid.distance(grid.node(p), q)).fold(f64::INFINITY, f64::min);
    let cutoff: Vec<f64> = (0..grid.len()).map(|p| smooth_step(dist(p) / eps - 1.0)).collect();
    let mean = cutoff.iter().sum::<f64>() / cutoff.len() as f64;
    let coef = 8.0 * PI * nf / area;
    let g: Vec<f64> = cutoff.iter().map(|f| coef * (f - mean)).collect();
    let solver = grid.solver(laplacian);
    let mut w = solver.solve(&g, 0.0);

    let sum: Vec<f64> = u0.values.iter().zip(&w).map(|(a, b)| a + b).collect();
    let top = sum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let outer: Vec<usize> = (0..grid.len()).filter(|&p| dist(p) >= eps).collect();
    let m0 = outer.iter().map(|&p| sum[p]).fold(f64::INFINITY, f64::min) - top;
    let m1 = outer.iter().map(|&p| sum[p]).fold(f64::NEG_INFINITY, f64::max) - top;
    // C₀(x) = A x (1 − B x)^5 with x = e^{−δ} ≤ 1 peaks at x = 1/(6B)
    let b = m1.exp();
    let x = (1.0 / (6.0 * b)).min(1.0);
    let shift = top - x.ln();
    w.iter_mut().for_each(|z| *z -= shift);
    let mu0 = (m0).exp() * x;
    let mu1 = b * x;
    let c0 = mu0 * (1.0 - mu1).powi(5);

    let c = 4.0 * PI * nf / area;
    let deficit = g.iter().map(|gi| c - gi).fold(0.0, f64::max);
    let threshold = deficit / c0;

    let lw = solver.apply(&w);
    let scale = c + g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let worst = (0..grid.len())
        .map(|p| threshold * nonlinearity_f(u0.values[p] + w[p]) + c - lw[p])
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > 1e-9 * scale {
        return Err(TorusError::SubsolutionCheck(worst));
    }
    Ok(Subsolution {
        w0: TorusField { grid: *grid, values: w },
        valid_for_lambda_ge: threshold,
        mu0,
        mu1,
    })
}

/// `Σ [½|∇_h v|² + (λ/6)(e^{u₀+v} − 1)^6 + (4πN/|Ω|) v] h_x h_y` with forward differences,
/// whose first variation is the five-point residual.
pub fn action(v: &TorusField, u0: &TorusField, lambda: f64, n: u32) -> Result<f64, TorusError> {
    if v.grid != u0.grid {
        return Err(TorusError::GridMismatch);
    }
    let g = v.grid;
    let (nx, ny) = (g.nx, g.ny);
    let (hx, hy) = (g.hx(), g.hy());
    let c = 4.0 * PI * n as f64 / g.area();
    let mut total = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let p = j * nx + i;
            let dx = (v.values[j * nx + (i + 1) % nx] - v.values[p]) / hx;
            let dy = (v.values[((j + 1) % ny) * nx + i] - v.values[p]) / hy;
            let u = u0.values[p] + v.values[p];
            total += 0.5 * (dx * dx + dy * dy) + lambda / 6.0 * u.exp_m1().powi(6) + c * v.values[p];
        }
    }
    Ok(total * g.cell_area())
}

/// `(λ/2) Σ e^u (1 − e^u)^5 h_x h_y`.
pub fn discrete_flux(u: &TorusField, lambda: f64) -> f64 {
    -0.5 * lambda * u.values.iter().map(|&x| nonlinearity_f(x)).sum::<f64>() * u.grid.cell_area()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_bound_values() {
        assert_eq!(lambda_lower_bound(0, 1.0), 0.0);
        assert!((lambda_lower_bound(1, 1.0) - 187.614_907_962_733).abs() < 1e-9);
        let v = lambda_lower_bound(1, 4.0 * PI * PI);
        assert!((v - 46656.0 / (3125.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn kappa_bounds() {
        assert!((kappa_c_from_lambda_c(12.0) - 1.0).abs() < 1e-15);
        assert!((kappa_upper_bound(1, 1.0) - 0.252_9).abs() < 1e-4);
        for area in [1.0, 7.3, 4.0 * PI * PI] {
            let k = kappa_c_from_lambda_c(lambda_lower_bound(2, area));
            assert!((k / kappa_upper_bound(2, area) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(1.0, 1.0, 15, 16).is_err());
        assert!(TorusGrid::new(1.0, 1.0, 8, 8).is_err());
        assert!(TorusGrid::new(-1.0, 1.0, 16, 16).is_err());
        assert!(TorusGrid::new(1.0, 2.0, 16, 32).is_ok());
    }

    #[test]
    fn trivial_background() {
        let g = TorusGrid::new(1.0, 1.0, 16, 16).unwrap();
        let u0 = build_background_u0(&g, &VortexSet::empty(), Laplacian::default()).unwrap();
        assert!(u0.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn shared_node_rejected() {
        let g = TorusGrid::new(1.0, 1.0, 16, 16).unwrap();
        let vs = VortexSet::new(vec![
            crate::Vortex { x: 0.5, y: 0.5, n: 1 },
            crate::Vortex { x: 0.51, y: 0.5, n: 1 },
        ])
        .unwrap();
        assert_eq!(
            build_background_u0(&g, &vs, Laplacian::default()),
            Err(TorusError::VortexOnSharedNode(0, 1))
        );
    }

    #[test]
    fn constant_action() {
        let g = TorusGrid::new(2.0, 3.0, 16, 16).unwrap();
        let v = TorusField::from_fn(g, |_, _| -0.4);
        let z = TorusField::zeros(g);
        let a = action(&v, &z, 5.0, 0).unwrap();
        assert!((a - 5.0 / 6.0 * (-0.4f64).exp_m1().powi(6) * 6.0).abs() < 1e-13);
        assert_eq!(action(&z, &z, 5.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(-0.1), 1.0);
        assert_eq!(smooth_step(1.2), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }
}
