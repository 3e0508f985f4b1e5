//! Vortex data, coupling constants and the scalar nonlinearity shared by every solver.
//!
//! With `|φ|² = e^u` the self-dual system reduces to `Δu = λ f(u) + 4π Σ n_s δ_{p_s}`
//! where `f(u) = e^u (e^u − 1)^5`. The radial problem uses the truncated form
//! `g(u) = e^u (1 − e^u)^5` for `u ≤ 0` and `0` above.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("vortex multiplicity must be at least 1, got {0}")]
    ZeroMultiplicity(u32),
    #[error("vortex coordinates must be finite, got ({0}, {1})")]
    NonFinitePoint(f64, f64),
    #[error("vortices {0} and {1} share the point ({2}, {3})")]
    CoincidentPoints(usize, usize, f64, f64),
    #[error("coupling must be positive and finite, got {0}")]
    InvalidCoupling(f64),
}

/// A single prescribed zero of the Higgs field.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vortex {
    pub x: f64,
    pub y: f64,
    pub n: u32,
}

/// Prescribed zeros with multiplicities. Points are pairwise distinct.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VortexSet {
    vortices: Vec<Vortex>,
}

impl VortexSet {
    pub fn new(vortices: Vec<Vortex>) -> Result<Self, ModelError> {
        for (i, v) in vortices.iter().enumerate() {
            if v.n == 0 {
                return Err(ModelError::ZeroMultiplicity(v.n));
            }
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(ModelError::NonFinitePoint(v.x, v.y));
            }
            for (j, w) in vortices.iter().enumerate().take(i) {
                if w.x == v.x && w.y == v.y {
                    return Err(ModelError::CoincidentPoints(j, i, v.x, v.y));
                }
            }
        }
        Ok(Self { vortices })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// One vortex of multiplicity `n` at `(x, y)`.
    pub fn single(x: f64, y: f64, n: u32) -> Result<Self, ModelError> {
        Self::new(vec![Vortex { x, y, n }])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vortex> {
        self.vortices.iter()
    }

    pub fn as_slice(&self) -> &[Vortex] {
        &self.vortices
    }

    pub fn len(&self) -> usize {
        self.vortices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vortices.is_empty()
    }

    /// Total winding `N = Σ n_s`.
    pub fn total_winding(&self) -> u32 {
        self.vortices.iter().map(|v| v.n).sum()
    }
}

/// Chern–Simons coupling `κ` together with `λ = 12/κ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coupling {
    kappa: f64,
    lambda: f64,
}

impl Coupling {
    pub fn from_kappa(kappa: f64) -> Result<Self, ModelError> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(ModelError::InvalidCoupling(kappa));
        }
        Ok(Self {
            kappa,
            lambda: 12.0 / (kappa * kappa),
        })
    }

    pub fn from_lambda(lambda: f64) -> Result<Self, ModelError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ModelError::InvalidCoupling(lambda));
        }
        Ok(Self {
            kappa: (12.0 / lambda).sqrt(),
            lambda,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Extremal constants of `f` on `u ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityConstants {
    /// Location of the minimum, `ln(1/6)`.
    pub u_star: f64,
    /// `−5⁵/6⁶`.
    pub f_min: f64,
    /// Crude bound on `|f′|` for `u ≤ 0`, the value the existence argument uses.
    pub fprime_bound: f64,
    /// Exact `max_{u ≤ 0} f′(u)`, attained at `e^u = (17 + √145)/72`.
    pub fprime_max: f64,
}

pub const F_MIN: f64 = -3125.0 / 46656.0;

impl NonlinearityConstants {
    pub fn get() -> Self {
        let s = (17.0 + 145f64.sqrt()) / 72.0;
        Self {
            u_star: (1.0f64 / 6.0).ln(),
            f_min: F_MIN,
            fprime_bound: 5.0,
            fprime_max: s * (1.0 - s).powi(4) * (6.0 * s - 1.0),
        }
    }
}

/// Smallest `K/λ` for which the monotone iteration step is order preserving.
pub fn sharp_k_factor() -> f64 {
    NonlinearityConstants::get().fprime_max
}

/// `f(u) = e^u (e^u − 1)^5`.
#[inline]
pub fn nonlinearity_f(u: f64) -> f64 {
    let s = u.exp();
    s * (s - 1.0).powi(5)
}

/// `f′(u) = e^u (e^u − 1)^4 (6e^u − 1)`.
#[inline]
pub fn nonlinearity_f_prime(u: f64) -> f64 {
    let s = u.exp();
    s * (s - 1.0).powi(4) * (6.0 * s - 1.0)
}

/// `g(u) = e^u (1 − e^u)^5` for `u ≤ 0`, zero otherwise.
#[inline]
pub fn truncated_g(u: f64) -> f64 {
    if u > 0.0 {
        0.0
    } else {
        let s = u.exp();
        s * (1.0 - s).powi(5)
    }
}

/// One-sided derivative of [`truncated_g`]; zero for `u > 0`.
#[inline]
pub fn truncated_g_prime(u: f64) -> f64 {
    if u > 0.0 {
        0.0
    } else {
        let s = u.exp();
        s * (1.0 - s).powi(4) * (1.0 - 6.0 * s)
    }
}

/// `F(u) = (e^u − 1)^6 / 6`, the antiderivative of `f` with `F(0) = 0`.
#[inline]
pub fn antiderivative_f(u: f64) -> f64 {
    (u.exp() - 1.0).powi(6) / 6.0
}

/// A nonlinearity for the monotone schemes, with a bound on its derivative over `u ≤ 0`.
pub trait Nonlinearity {
    fn value(&self, u: f64) -> f64;
    /// `sup_{u ≤ 0} value′(u)` (without any coupling prefactor).
    fn derivative_sup(&self) -> f64;
}

/// `λ f(u)`, the self-dual Chern–Simons nonlinearity.
#[derive(Debug, Clone, Copy)]
pub struct SelfDual {
    pub lambda: f64,
}

impl Nonlinearity for SelfDual {
    #[inline]
    fn value(&self, u: f64) -> f64 {
        self.lambda * nonlinearity_f(u)
    }

    fn derivative_sup(&self) -> f64 {
        self.lambda * sharp_k_factor()
    }
}

/// `μ e^u (e^u − 1)`, the classical Abelian Chern–Simons nonlinearity.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic {
    pub mu: f64,
}

impl Nonlinearity for Quadratic {
    #[inline]
    fn value(&self, u: f64) -> f64 {
        let s = u.exp();
        self.mu * s * (s - 1.0)
    }

    fn derivative_sup(&self) -> f64 {
        // e^u (2e^u − 1) peaks at u = 0
        self.mu
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_at_known_points() {
        assert_eq!(nonlinearity_f(0.0), 0.0);
        let c = NonlinearityConstants::get();
        assert!((nonlinearity_f(c.u_star) - c.f_min).abs() < 1e-16);
        assert!((c.f_min + 0.066_979_6).abs() < 1e-7);
        // 40-digit reference value of e^{-1}(e^{-1}-1)^5
        let oracle = -0.037_128_302_598_437_466_041_905_313_752_169_65;
        assert!(((nonlinearity_f(-1.0) - oracle) / oracle).abs() < 1e-15);
    }

    #[test]
    fn f_prime_zeros() {
        assert_eq!(nonlinearity_f_prime(0.0), 0.0);
        let c = NonlinearityConstants::get();
        assert!(nonlinearity_f_prime(c.u_star).abs() < 1e-16);
    }

    #[test]
    fn fprime_max_is_attained() {
        let c = NonlinearityConstants::get();
        let s: f64 = (17.0 + 145f64.sqrt()) / 72.0;
        assert!((nonlinearity_f_prime(s.ln()) - c.fprime_max).abs() < 1e-15);
        assert!((c.fprime_max - 0.072_590_463_388_328_69).abs() < 1e-15);
        // nothing on a dense grid exceeds it
        let sup = (0..200_000)
            .map(|i| nonlinearity_f_prime(-30.0 * i as f64 / 200_000.0))
            .fold(f64::MIN, f64::max);
        assert!(sup <= c.fprime_max + 1e-15);
    }

    #[test]
    fn g_branches() {
        assert_eq!(truncated_g(1.0), 0.0);
        assert_eq!(truncated_g(0.0), 0.0);
        assert_eq!(truncated_g(0.5f64.ln()), 1.0 / 64.0);
        assert!((truncated_g(-0.3) + nonlinearity_f(-0.3)).abs() < 1e-17);
    }

    #[test]
    fn antiderivative_limits() {
        assert_eq!(antiderivative_f(0.0), 0.0);
        assert!((antiderivative_f(-800.0) - 1.0 / 6.0).abs() < 1e-17);
        let (u, h) = (-0.7, 1e-6);
        let fd = (antiderivative_f(u + h) - antiderivative_f(u - h)) / (2.0 * h);
        assert!(((fd - nonlinearity_f(u)) / nonlinearity_f(u)).abs() < 1e-6);
    }

    #[test]
    fn underflow_stays_finite() {
        for u in [-800.0, -1e4, f64::MIN] {
            assert_eq!(nonlinearity_f(u), 0.0);
            assert_eq!(nonlinearity_f_prime(u), 0.0);
            assert_eq!(truncated_g(u), 0.0);
        }
    }

    #[test]
    fn coupling_relation() {
        let c = Coupling::from_kappa(1.0).unwrap();
        assert_eq!(c.lambda(), 12.0);
        let c = Coupling::from_kappa(0.37).unwrap();
        assert!((c.lambda() * c.kappa() * c.kappa() - 12.0).abs() < 1e-13);
        assert!(Coupling::from_kappa(0.0).is_err());
        assert!(Coupling::from_lambda(-1.0).is_err());
    }

    #[test]
    fn vortex_set_validation() {
        assert!(VortexSet::single(0.0, 0.0, 0).is_err());
        let dup = vec![
            Vortex { x: 1.0, y: 2.0, n: 1 },
            Vortex { x: 1.0, y: 2.0, n: 3 },
        ];
        assert!(matches!(
            VortexSet::new(dup),
            Err(ModelError::CoincidentPoints(0, 1, _, _))
        ));
        let set = VortexSet::new(vec![
            Vortex { x: 1.0, y: 2.0, n: 1 },
            Vortex { x: -1.0, y: 2.0, n: 3 },
        ])
        .unwrap();
        assert_eq!(set.total_winding(), 4);
        assert_eq!(VortexSet::empty().total_winding(), 0);
    }
}
