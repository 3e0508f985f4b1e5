//! Observables shared by every backend: flux, energy and charge, the decay rate of
//! non-topological profiles, and the Higgs and gauge fields rebuilt from `u`.

use crate::model::{nonlinearity_f, VortexSet};
use crate::quad::linear_fit;
use crate::radial::{forcing_integral, ClassTag, RadialProfile};
use crate::torus::{discrete_flux, TorusField};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("decay window holds {points} samples, need at least {needed}")]
    WindowTooShort { points: usize, needed: usize },
    #[error("profile is not classified Negative")]
    NotNegative,
    #[error("grid shape {nx}x{ny} does not match {len} values")]
    ShapeMismatch { nx: usize, ny: usize, len: usize },
}

/// Anything carrying `u` together with quadrature weights.
#[derive(Debug, Clone, Copy)]
pub enum FluxSource<'a> {
    /// Radial profile; exact tails are added on both sides.
    Radial(&'a RadialProfile),
    Torus(&'a TorusField),
    /// Interior node values of a uniform grid with spacing `h`.
    Grid { u: &'a [f64], h: f64 },
}

/// `Φ = (λ/2) ∫ e^u (1 − e^u)^5`.
pub fn flux(src: FluxSource<'_>, lambda: f64) -> f64 {
    match src {
        FluxSource::Radial(p) => {
            // the profile carries its own λ; rescale if the caller passes another
            PI * forcing_integral(p) * lambda / p.meta.lambda
        }
        FluxSource::Torus(u) => discrete_flux(u, lambda),
        FluxSource::Grid { u, h } => -0.5 * lambda * u.iter().map(|&x| nonlinearity_f(x)).sum::<f64>() * h * h,
    }
}

/// Self-dual energy `E = Φ` and charge `Q = κΦ`.
pub fn energy_and_charge(flux: f64, kappa: f64) -> (f64, f64) {
    (flux, kappa * flux)
}

/// Least-squares decay rate `β` of `u ≈ −βt + c` over the samples given.
pub fn decay_fit_samples(t: &[f64], u: &[f64]) -> Result<f64, DiagnosticsError> {
    const NEEDED: usize = 4;
    if t.len() < NEEDED || u.len() != t.len() {
        return Err(DiagnosticsError::WindowTooShort {
            points: t.len().min(u.len()),
            needed: NEEDED,
        });
    }
    Ok(-linear_fit(t, u).0)
}

/// Fit over the last quarter of the part of a Negative profile past forcing decay,
/// sampled uniformly from the dense output.
pub fn decay_fit(profile: &RadialProfile) -> Result<f64, DiagnosticsError> {
    if profile.classification.tag != ClassTag::Negative {
        return Err(DiagnosticsError::NotNegative);
    }
    let Some(i) = profile.tail_start else {
        return Err(DiagnosticsError::WindowTooShort { points: 0, needed: 4 });
    };
    let (t_tail, t_end) = (profile.t[i], profile.t_last());
    let t_a = t_end - 0.25 * (t_end - t_tail);
    let m = 64;
    let ts: Vec<f64> = (0..=m).map(|k| t_a + (t_end - t_a) * k as f64 / m as f64).collect();
    if !(t_end > t_a) {
        return Err(DiagnosticsError::WindowTooShort { points: 1, needed: 4 });
    }
    let us: Vec<f64> = ts.iter().map(|&t| profile.eval(t)[0]).collect();
    decay_fit_samples(&ts, &us)
}

/// Node layout of a rectangular grid: node `(i, j)` sits at `(x0 + i·hx, y0 + j·hy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    /// Wrap differences across the edges.
    pub periodic: bool,
}

impl GridGeometry {
    pub fn node(&self, p: usize) -> (f64, f64) {
        (self.x0 + (p % self.nx) as f64 * self.hx, self.y0 + (p / self.nx) as f64 * self.hy)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Centered difference in x and y at node `p`; one-sided on open edges.
    fn gradient(&self, f: &[f64], p: usize) -> (f64, f64) {
        let (i, j) = (p % self.nx, p / self.nx);
        let dx = self.diff(i, self.nx, self.hx, |k| f[j * self.nx + k]);
        let dy = self.diff(j, self.ny, self.hy, |k| f[k * self.nx + i]);
        (dx, dy)
    }

    fn diff<G: Fn(usize) -> f64>(&self, k: usize, n: usize, h: f64, get: G) -> f64 {
        if self.periodic {
            (get((k + 1) % n) - get((k + n - 1) % n)) / (2.0 * h)
        } else if k == 0 {
            (get(1) - get(0)) / h
        } else if k == n - 1 {
            (get(n - 1) - get(n - 2)) / h
        } else {
            (get(k + 1) - get(k - 1)) / (2.0 * h)
        }
    }
}

/// `|φ|` and the gauge potential on a grid. Nodes within one cell of a vortex are
/// masked: their potential entries are zero and their indices listed in `masked`.
#[derive(Debug, Clone, PartialEq)]
pub struct HiggsGauge {
    pub geometry: GridGeometry,
    pub phi_abs: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub masked: Vec<usize>,
}

/// `∇ Σ n_s arg(z − p_s)`, single valued away from the points.
pub fn phase_gradient(x: f64, y: f64, vortices: &VortexSet) -> (f64, f64) {
    vortices.iter().fold((0.0, 0.0), |(gx, gy), v| {
        let (dx, dy) = (x - v.x, y - v.y);
        let r2 = dx * dx + dy * dy;
        (gx - v.n as f64 * dy / r2, gy + v.n as f64 * dx / r2)
    })
}

/// `φ = exp(½u + iθ)`, `A₁ = −2 Re(i∂̄ ln φ)`, `A₂ = −2 Im(i∂̄ ln φ)` with
/// `∂̄ = ½(∂₁ + i∂₂)`. Expanded: `A₁ = ∂₁θ + ½∂₂u`, `A₂ = ∂₂θ − ½∂₁u`.
pub fn reconstruct_higgs_gauge(
    geometry: GridGeometry,
    u: &[f64],
    vortices: &VortexSet,
) -> Result<HiggsGauge, DiagnosticsError> {
    if u.len() != geometry.len() {
        return Err(DiagnosticsError::ShapeMismatch {
            nx: geometry.nx,
            ny: geometry.ny,
            len: u.len(),
        });
    }
    let cell = geometry.hx.max(geometry.hy);
    let mut out = HiggsGauge {
        geometry,
        phi_abs: u.iter().map(|x| (0.5 * x).exp()).collect(),
        a1: vec![0.0; u.len()],
        a2: vec![0.0; u.len()],
        masked: Vec::new(),
    };
    for p in 0..u.len() {
        let (x, y) = geometry.node(p);
        if vortices.iter().any(|v| (x - v.x).hypot(y - v.y) < cell) {
            out.masked.push(p);
            continue;
        }
        let (ux, uy) = geometry.gradient(u, p);
        let (tx, ty) = phase_gradient(x, y, vortices);
        out.a1[p] = tx + 0.5 * uy;
        out.a2[p] = ty - 0.5 * ux;
    }
    for v in vortices.iter() {
        // |φ| vanishes at the vortex even though the grid value of u is finite
        let (fx, fy) = ((v.x - geometry.x0) / geometry.hx, (v.y - geometry.y0) / geometry.hy);
        if fx.fract() == 0.0 && fy.fract() == 0.0 && fx >= 0.0 && fy >= 0.0 {
            let (i, j) = (fx as usize, fy as usize);
            if i < geometry.nx && j < geometry.ny {
                out.phi_abs[j * geometry.nx + i] = 0.0;
            }
        }
    }
    Ok(out)
}

impl HiggsGauge {
    /// Counter-clockwise `∮ A·dl` around the node rectangle `[i0, i1] × [j0, j1]`
    /// by the trapezoid rule. Masked nodes on the loop make the value meaningless.
    pub fn loop_integral(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        let g = &self.geometry;
        let idx = |i: usize, j: usize| j * g.nx + i;
        let trap = |vals: &[f64], h: f64| -> f64 {
            let n = vals.len();
            h * (vals.iter().sum::<f64>() - 0.5 * (vals[0] + vals[n - 1]))
        };
        let bottom: Vec<f64> = (i0..=i1).map(|i| self.a1[idx(i, j0)]).collect();
        let right: Vec<f64> = (j0..=j1).map(|j| self.a2[idx(i1, j)]).collect();
        let top: Vec<f64> = (i0..=i1).map(|i| self.a1[idx(i, j1)]).collect();
        let left: Vec<f64> = (j0..=j1).map(|j| self.a2[idx(i0, j)]).collect();
        trap(&bottom, g.hx) + trap(&right, g.hy) - trap(&top, g.hx) - trap(&left, g.hy)
    }
}

/// `(λ/2) ∬ e^u(1 − e^u)^5` over the node rectangle with trapezoid weights.
pub fn enclosed_flux(geometry: &GridGeometry, u: &[f64], lambda: f64, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
    let mut s = 0.0;
    for j in j0..=j1 {
        let wy = if j == j0 || j == j1 { 0.5 } else { 1.0 };
        for i in i0..=i1 {
            let wx = if i == i0 || i == i1 { 0.5 } else { 1.0 };
            s += wx * wy * -nonlinearity_f(u[j * geometry.nx + i]);
        }
    }
    0.5 * lambda * s * geometry.hx * geometry.hy
}

/// Relative gap between `Σ −½Δ_h u` and `Σ (λ/2) e^u(1 − e^u)^5` over the nodes more
/// than two cells from every vortex and off the open edges.
pub fn curvature_probe(geometry: &GridGeometry, u: &[f64], vortices: &VortexSet, lambda: f64) -> f64 {
    let (nx, ny) = (geometry.nx, geometry.ny);
    let (hx, hy) = (geometry.hx, geometry.hy);
    let cell = hx.max(hy);
    let at = |i: isize, j: isize| {
        let ii = i.rem_euclid(nx as isize) as usize;
        let jj = j.rem_euclid(ny as isize) as usize;
        u[jj * nx + ii]
    };
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for j in 0..ny as isize {
        for i in 0..nx as isize {
            if !geometry.periodic && (i == 0 || j == 0 || i == nx as isize - 1 || j == ny as isize - 1) {
                continue;
            }
            let (x, y) = geometry.node(j as usize * nx + i as usize);
            if vortices.iter().any(|v| (x - v.x).hypot(y - v.y) < 2.0 * cell) {
                continue;
            }
            let c = at(i, j);
            let lap = (at(i + 1, j) - 2.0 * c + at(i - 1, j)) / (hx * hx)
                + (at(i, j + 1) - 2.0 * c + at(i, j - 1)) / (hy * hy);
            lhs += -0.5 * lap;
            rhs += -0.5 * lambda * nonlinearity_f(c);
        }
    }
    if rhs == 0.0 {
        lhs.abs()
    } else {
        ((lhs - rhs) / rhs).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolverTag {
    Radial,
    Torus,
    Plane,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Convergence {
    pub iterations: usize,
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    /// SHA-256 of the normalized configuration.
    pub config_hash: String,
    pub started_at: String,
    pub finished_at: String,
}

/// Summary of one solve.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub solver: SolverTag,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n: u32,
    pub lambda: f64,
    pub kappa: f64,
    pub flux: f64,
    pub energy: f64,
    pub charge: f64,
    pub beta: Option<f64>,
    pub a: Option<f64>,
    pub identity_residuals: Option<(f64, f64)>,
    pub decay_slope: Option<f64>,
    pub convergence: Convergence,
    pub provenance: Provenance,
}

impl SolveReport {
    /// Fill energy and charge from the flux.
    pub fn new(solver: SolverTag, n: u32, lambda: f64, kappa: f64, flux: f64, convergence: Convergence) -> Self {
        let (energy, charge) = energy_and_charge(flux, kappa);
        Self {
            solver,
            n,
            lambda,
            kappa,
            flux,
            energy,
            charge,
            beta: None,
            a: None,
            identity_residuals: None,
            decay_slope: None,
            convergence,
            provenance: Provenance {
                config_hash: String::new(),
                started_at: String::new(),
                finished_at: String::new(),
            },
        }
    }
}
