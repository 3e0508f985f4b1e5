//! Topological vortices on the plane, solved on an exhausting family of squares
//! `[−R, R]²` with `u = 0` on the boundary.
//!
//! With `u = u₀ + v` and `u₀ = −Σ n_s ln(1 + |x − p_s|⁻²)` the discrete problem is
//! `Δ_h v = λ f(u₀ + v) + g_h`, `v = −u₀` on the boundary, where
//! `g_h = 4π Σ n_s δ_h − Δ_h u₀` uses a bilinear point mass `δ_h`. This makes
//! `Δ_h u = λ f(u) + 4π Σ n_s δ_h` exactly and `v* = −u₀` an exact discrete
//! super-solution.

use crate::fft::DirichletSolver;
use crate::model::{nonlinearity_f, sharp_k_factor, ModelError, Nonlinearity, Quadratic, SelfDual, VortexSet};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaneError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("vortex {0} is not strictly inside the domain")]
    VortexOutside(usize),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("iterate {iteration} rose above its predecessor by {excess:e}")]
    MonotonicityViolation { iteration: usize, excess: f64 },
    #[error("sub-solution inequality fails by {violation:e} at ({x}, {y})")]
    InequalityViolation { x: f64, y: f64, violation: f64 },
    #[error("R schedule must be strictly increasing")]
    BadSchedule,
    #[error("shallow parameter a must be positive, got {0}")]
    BadShift(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `[−R, R]²` with `n` interior nodes per side, spacing `h = 2R/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SquareDomain {
    pub r: f64,
    pub n: usize,
}

impl SquareDomain {
    pub fn new(r: f64, n: usize) -> Result<Self, PlaneError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(PlaneError::InvalidDomain("half-width must be positive".into()));
        }
        if n < 3 {
            return Err(PlaneError::InvalidDomain("need at least 3 interior nodes per side".into()));
        }
        Ok(Self { r, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.r / (self.n as f64 + 1.0)
    }

    /// Coordinate of node index `i`; `−1` and `n` are boundary nodes.
    pub fn coord(&self, i: isize) -> f64 {
        -self.r + self.h() * (i as f64 + 1.0)
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, p: usize) -> (f64, f64) {
        (self.coord((p % self.n) as isize), self.coord((p / self.n) as isize))
    }

    pub fn interior_points(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|p| self.node(p)).collect()
    }

    fn check_vortices(&self, vortices: &VortexSet) -> Result<(), PlaneError> {
        let lim = self.r - self.h();
        for (k, v) in vortices.iter().enumerate() {
            if !(v.x.abs() < lim && v.y.abs() < lim) {
                return Err(PlaneError::VortexOutside(k));
            }
        }
        Ok(())
    }
}

/// Interior values on a square; the boundary closure is `v = −u₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneField {
    pub domain: SquareDomain,
    pub values: Vec<f64>,
}

impl PlaneField {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `u₀(x) = −Σ n_s ln(1 + |x − p_s|⁻²)` with `|x − p_s|² ≥ r_min²`.
pub fn background_u0_plane(points: &[(f64, f64)], vortices: &VortexSet, r_min: f64) -> Vec<f64> {
    let r2min = r_min * r_min;
    points
        .iter()
        .map(|&(x, y)| {
            vortices
                .iter()
                .map(|v| {
                    let r2 = ((x - v.x).powi(2) + (y - v.y).powi(2)).max(r2min);
                    -(v.n as f64) * (1.0 / r2).ln_1p()
                })
                .sum()
        })
        .collect()
}

/// `g = 4 Σ n_s (1 + |x − p_s|²)⁻²`, with `∫ g = 4πN`.
pub fn source_g_plane(points: &[(f64, f64)], vortices: &VortexSet) -> Vec<f64> {
    points
        .iter()
        .map(|&(x, y)| {
            vortices
                .iter()
                .map(|v| {
                    let r2 = (x - v.x).powi(2) + (y - v.y).powi(2);
                    4.0 * v.n as f64 / (1.0 + r2).powi(2)
                })
                .sum()
        })
        .collect()
}

/// Everything the iteration needs on one domain.
#[derive(Debug, Clone)]
pub struct PlaneProblem {
    pub domain: SquareDomain,
    pub u0: Vec<f64>,
    /// `u₀` on the boundary ring, indexed through [`PlaneProblem::boundary_u0`].
    boundary: Vec<f64>,
    /// `g_h = 4π Σ n δ_h − Δ_h u₀`.
    pub source: Vec<f64>,
    solver: DirichletSolver,
}

impl PlaneProblem {
    pub fn new(domain: SquareDomain, vortices: &VortexSet) -> Result<Self, PlaneError> {
        domain.check_vortices(vortices)?;
        let n = domain.n;
        let h = domain.h();
        let r_min = h / 4.0;
        let u0 = background_u0_plane(&domain.interior_points(), vortices, r_min);
        // ring of boundary nodes: bottom, top (i = −1..=n), then left, right (j = 0..n)
        let mut ring = Vec::with_capacity(4 * n + 4);
        for &j in &[-1isize, n as isize] {
            for i in -1..=n as isize {
                ring.push((domain.coord(i), domain.coord(j)));
            }
        }
        for &i in &[-1isize, n as isize] {
            for j in 0..n as isize {
                ring.push((domain.coord(i), domain.coord(j)));
            }
        }
        let boundary = background_u0_plane(&ring, vortices, r_min);
        let solver = DirichletSolver::new(n, h);
        let mut p = Self {
            domain,
            u0,
            boundary,
            source: Vec::new(),
            solver,
        };
        let lu0 = p.solver.apply(&p.u0, |i, j| p.boundary_u0(i, j));
        let mut source: Vec<f64> = lu0.iter().map(|x| -x).collect();
        for v in vortices.iter() {
            let xi = (v.x + domain.r) / h - 1.0;
            let yi = (v.y + domain.r) / h - 1.0;
            let (i0, j0) = (xi.floor(), yi.floor());
            let (fx, fy) = (xi - i0, yi - j0);
            let w = 4.0 * PI * v.n as f64 / (h * h);
            for (di, wx) in [(0, 1.0 - fx), (1, fx)] {
                for (dj, wy) in [(0, 1.0 - fy), (1, fy)] {
                    let (i, j) = (i0 as usize + di, j0 as usize + dj);
                    source[j * n + i] += w * wx * wy;
                }
            }
        }
        p.source = source;
        Ok(p)
    }

    /// `u₀` at a boundary index pair (one of `i, j` is `−1` or `n`).
    pub fn boundary_u0(&self, i: isize, j: isize) -> f64 {
        let n = self.domain.n as isize;
        if j == -1 {
            self.boundary[(i + 1) as usize]
        } else if j == n {
            self.boundary[(n + 2 + i + 1) as usize]
        } else if i == -1 {
            self.boundary[(2 * (n + 2) + j) as usize]
        } else {
            self.boundary[(2 * (n + 2) + n + j) as usize]
        }
    }

    /// `Δ_h` of interior values `v` closed by `v = −u₀ + shift` on the boundary.
    pub fn laplacian(&self, v: &[f64], shift: f64) -> Vec<f64> {
        self.solver.apply(v, |i, j| -self.boundary_u0(i, j) + shift)
    }

    /// Solve `(Δ_h − K) v = rhs` with `v = −u₀` on the boundary.
    pub fn helmholtz(&self, k: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.domain.n;
        let c = 1.0 / (self.domain.h() * self.domain.h());
        let b = fold_boundary(n, c, rhs, |i, j| -self.boundary_u0(i, j));
        self.solver.solve(&b, k)
    }

    pub fn residual<F: Nonlinearity>(&self, nl: &F, v: &[f64]) -> f64 {
        let lv = self.laplacian(v, 0.0);
        (0..v.len())
            .map(|p| (lv[p] - nl.value(self.u0[p] + v[p]) - self.source[p]).abs())
            .fold(0.0, f64::max)
    }

    pub fn super_solution(&self) -> Vec<f64> {
        self.u0.iter().map(|x| -x).collect()
    }
}

/// Solve `(Δ_h − K)v = rhs` on `domain` with Dirichlet data `boundary(i, j)` at
/// indices `−1` or `n`, folded into the right-hand side at near-boundary nodes.
pub fn dirichlet_helmholtz_solve<B: Fn(isize, isize) -> f64>(
    domain: &SquareDomain,
    k: f64,
    rhs: &[f64],
    boundary: B,
) -> PlaneField {
    let c = 1.0 / (domain.h() * domain.h());
    let b = fold_boundary(domain.n, c, rhs, boundary);
    PlaneField {
        domain: *domain,
        values: DirichletSolver::new(domain.n, domain.h()).solve(&b, k),
    }
}

fn fold_boundary<B: Fn(isize, isize) -> f64>(n: usize, c: f64, rhs: &[f64], boundary: B) -> Vec<f64> {
    let ni = n as isize;
    let mut b = rhs.to_vec();
    for j in 0..ni {
        for i in 0..ni {
            let mut s = 0.0;
            if i == 0 {
                s += boundary(-1, j);
            }
            if i == ni - 1 {
                s += boundary(ni, j);
            }
            if j == 0 {
                s += boundary(i, -1);
            }
            if j == ni - 1 {
                s += boundary(i, ni);
            }
            b[(j * ni + i) as usize] -= c * s;
        }
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlaneOptions {
    /// `K = k_factor·λ`; must be at least the order-preserving bound.
    pub k_factor: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub monotonicity_slack: f64,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        Self {
            k_factor: 0.08,
            tol: 1e-9,
            max_iter: 3000,
            monotonicity_slack: 1e-13,
        }
    }
}

impl PlaneOptions {
    pub fn validate(&self) -> Result<(), PlaneError> {
        if !(self.k_factor >= sharp_k_factor()) {
            return Err(PlaneError::InvalidOptions(format!(
                "K/lambda = {} is below the order-preserving bound {}",
                self.k_factor,
                sharp_k_factor()
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.monotonicity_slack >= 0.0) {
            return Err(PlaneError::InvalidOptions("tol and max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlaneOutcome {
    pub converged: bool,
    pub v: PlaneField,
    pub u0: Vec<f64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub max_increment: f64,
}

impl PlaneOutcome {
    pub fn u(&self) -> Vec<f64> {
        self.u0.iter().zip(&self.v.values).map(|(a, b)| a + b).collect()
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Monotone iteration for `Δ_h v = nl(u₀ + v) + g_h` from `v_start` with constant `k`.
pub fn iterate_with<F: Nonlinearity>(
    problem: &PlaneProblem,
    nl: &F,
    k: f64,
    v_start: Vec<f64>,
    opts: &PlaneOptions,
    check_monotone: bool,
) -> Result<PlaneOutcome, PlaneError> {
    let mut v = v_start;
    let mut history = vec![problem.residual(nl, &v)];
    let mut iterations = 0;
    let mut max_increment = f64::NEG_INFINITY;
    let mut rhs = vec![0.0; v.len()];
    while history.last().copied().unwrap_or(0.0) >= opts.tol && iterations < opts.max_iter {
        for p in 0..v.len() {
            rhs[p] = nl.value(problem.u0[p] + v[p]) - k * v[p] + problem.source[p];
        }
        let next = problem.helmholtz(k, &rhs);
        iterations += 1;
        let inc = next.iter().zip(&v).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        max_increment = max_increment.max(inc);
        if check_monotone && inc > opts.monotonicity_slack {
            return Err(PlaneError::MonotonicityViolation { iteration: iterations, excess: inc });
        }
        v = next;
        history.push(problem.residual(nl, &v));
    }
    Ok(PlaneOutcome {
        converged: history.last().copied().unwrap_or(0.0) < opts.tol,
        v: PlaneField {
            domain: problem.domain,
            values: v,
        },
        u0: problem.u0.clone(),
        iterations,
        residual_history: history,
        max_increment,
    })
}

/// `(Δ_h − K)v_n = λf(u₀ + v_{n−1}) − K v_{n−1} + g_h` from `v₀ = −u₀`.
pub fn monotone_iterate_plane(
    domain: &SquareDomain,
    vortices: &VortexSet,
    lambda: f64,
    opts: &PlaneOptions,
) -> Result<PlaneOutcome, PlaneError> {
    opts.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ModelError::InvalidCoupling(lambda).into());
    }
    let problem = PlaneProblem::new(*domain, vortices)?;
    let start = problem.super_solution();
    iterate_with(&problem, &SelfDual { lambda }, opts.k_factor * lambda, start, opts, true)
}

/// `(λ/2) Σ e^u (1 − e^u)^5 h²` over the interior nodes.
pub fn plane_flux(u: &[f64], lambda: f64, h: f64) -> f64 {
    -0.5 * lambda * u.iter().map(|&x| nonlinearity_f(x)).sum::<f64>() * h * h
}

#[derive(Debug, Clone)]
pub struct PlaneStage {
    pub domain: SquareDomain,
    pub flux: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    /// `max(v_this − v_previous)` on the nodes shared with the previous stage.
    pub rise_over_previous: Option<f64>,
    /// `max |u|` on the outermost ring of interior nodes.
    pub boundary_band: f64,
}

#[derive(Debug, Clone)]
pub struct PlaneSolution {
    pub stages: Vec<PlaneStage>,
    pub outcome: PlaneOutcome,
    /// `max |v_last − v_previous|` on the shared nodes.
    pub cauchy_gap: Option<f64>,
}

/// Nodes shared by a smaller square `a` and a larger `b` with the same spacing:
/// pairs of indices `(index in a, index in b)`.
fn shared_nodes(a: &SquareDomain, b: &SquareDomain) -> Vec<(usize, usize)> {
    let off = (b.n - a.n) / 2;
    let mut out = Vec::with_capacity(a.len());
    for j in 0..a.n {
        for i in 0..a.n {
            out.push((j * a.n + i, (j + off) * b.n + i + off));
        }
    }
    out
}

/// Interior node counts for each half-width sharing the spacing of the last stage.
pub fn schedule_domains(r_schedule: &[f64], n_final: usize) -> Result<Vec<SquareDomain>, PlaneError> {
    if r_schedule.is_empty() || r_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PlaneError::BadSchedule);
    }
    let last = SquareDomain::new(*r_schedule.last().unwrap(), n_final)?;
    let h = last.h();
    let mut out = Vec::with_capacity(r_schedule.len());
    for &r in &r_schedule[..r_schedule.len() - 1] {
        let raw = (2.0 * r / h - 1.0).round() as isize;
        let n = if (raw - n_final as isize) % 2 == 0 { raw } else { raw + 1 };
        let n = n.max(3) as usize;
        out.push(SquareDomain::new(h * (n as f64 + 1.0) / 2.0, n)?);
    }
    out.push(last);
    Ok(out)
}

/// Solve on each square of the schedule (same spacing), reporting the decrease
/// between consecutive stages and the flux of each.
pub fn solve_topological_plane(
    vortices: &VortexSet,
    lambda: f64,
    r_schedule: &[f64],
    n_final: usize,
    opts: &PlaneOptions,
) -> Result<PlaneSolution, PlaneError> {
    let domains = schedule_domains(r_schedule, n_final)?;
    let mut stages = Vec::with_capacity(domains.len());
    let mut prev: Option<PlaneOutcome> = None;
    let mut gap = None;
    for d in &domains {
        let out = monotone_iterate_plane(d, vortices, lambda, opts)?;
        let u = out.u();
        let n = d.n;
        let band = (0..n * n)
            .filter(|p| {
                let (i, j) = (p % n, p / n);
                i == 0 || j == 0 || i == n - 1 || j == n - 1
            })
            .map(|p| u[p].abs())
            .fold(0.0, f64::max);
        let rise = prev.as_ref().map(|pv| {
            let pairs = shared_nodes(&pv.v.domain, d);
            gap = Some(
                pairs
                    .iter()
                    .map(|&(a, b)| (out.v.values[b] - pv.v.values[a]).abs())
                    .fold(0.0, f64::max),
            );
            pairs
                .iter()
                .map(|&(a, b)| out.v.values[b] - pv.v.values[a])
                .fold(f64::NEG_INFINITY, f64::max)
        });
        stages.push(PlaneStage {
            domain: *d,
            flux: plane_flux(&u, lambda, d.h()),
            iterations: out.iterations,
            converged: out.converged,
            final_residual: out.final_residual(),
            rise_over_previous: rise,
            boundary_band: band,
        });
        prev = Some(out);
    }
    Ok(PlaneSolution {
        stages,
        outcome: prev.expect("non-empty schedule"),
        cauchy_gap: gap,
    })
}

/// Push a converged `v` down by a smooth bump of height `amplitude`, iterate again
/// (without the order check), and return `max |v_again − v|`.
pub fn maximality_probe(
    vortices: &VortexSet,
    lambda: f64,
    converged: &PlaneOutcome,
    amplitude: f64,
    opts: &PlaneOptions,
) -> Result<f64, PlaneError> {
    let d = converged.v.domain;
    let problem = PlaneProblem::new(d, vortices)?;
    let width = d.r / 3.0;
    let start: Vec<f64> = (0..d.len())
        .map(|p| {
            let (x, y) = d.node(p);
            converged.v.values[p] - amplitude * (-(x * x + y * y) / (width * width)).exp()
        })
        .collect();
    let again = iterate_with(&problem, &SelfDual { lambda }, opts.k_factor * lambda, start, opts, false)?;
    Ok(again
        .v
        .values
        .iter()
        .zip(&converged.v.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct ShallowSubsolution {
    pub domain: SquareDomain,
    /// `v_* = u_* − a − u₀` on the interior nodes.
    pub v: Vec<f64>,
    /// Shallow solution `u_*`.
    pub u_shallow: Vec<f64>,
    pub a: f64,
    pub mu: f64,
    /// `min(Δ_h v_* − λf(u₀ + v_*) − g_h)` over the interior.
    pub min_slack: f64,
}

/// Sub-solution from the Abelian problem `Δu = μe^u(e^u − 1) + 4πΣnδ` with
/// `μ = λe^{−a}(e^{−a} − 1)^4`, shifted down by `a`.
pub fn shallow_subsolution(
    domain: &SquareDomain,
    vortices: &VortexSet,
    lambda: f64,
    a: f64,
    opts: &PlaneOptions,
) -> Result<ShallowSubsolution, PlaneError> {
    if !(a > 0.0) {
        return Err(PlaneError::BadShift(a));
    }
    let problem = PlaneProblem::new(*domain, vortices)?;
    let ea = (-a).exp();
    let mu = lambda * ea * (ea - 1.0).powi(4);
    let nl = Quadratic { mu };
    let out = iterate_with(&problem, &nl, nl.derivative_sup(), problem.super_solution(), opts, true)?;
    let w = out.v.values;
    let u_shallow: Vec<f64> = w.iter().zip(&problem.u0).map(|(a, b)| a + b).collect();
    let v: Vec<f64> = w.iter().map(|x| x - a).collect();
    let lv = problem.laplacian(&v, -a);
    let slack: Vec<f64> = (0..v.len())
        .map(|p| lv[p] - lambda * nonlinearity_f(problem.u0[p] + v[p]) - problem.source[p])
        .collect();
    let (worst_p, min_slack) = slack
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (p, s)| if s < acc.1 { (p, s) } else { acc });
    let h = domain.h();
    if min_slack < -10.0 * h * h {
        let (x, y) = domain.node(worst_p);
        return Err(PlaneError::InequalityViolation {
            x,
            y,
            violation: min_slack,
        });
    }
    Ok(ShallowSubsolution {
        domain: *domain,
        v,
        u_shallow,
        a,
        mu,
        min_slack,
    })
}
