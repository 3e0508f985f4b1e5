//! Solvers for the generalized self-dual Chern–Simons vortex equation
//! `Δu = λ e^u (e^u − 1)^5 + 4π Σ n_s δ_{p_s}` on a torus, on the plane, and in
//! the radial reduction.

pub mod model;
pub mod ode;
pub mod quad;
pub mod radial;

pub use model::{Coupling, ModelError, Vortex, VortexSet};
pub mod fft;
pub mod torus;
pub mod plane;
pub mod diagnostics;
