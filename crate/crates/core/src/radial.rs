//! Radial shooting for `u″(t) + λ e^{2t} e^u (1 − e^u)^5 = 0`, `t = ln r`.
//!
//! A trajectory starts deep in the linear regime `u ≈ 2Nt + a`. Either it
//! crosses zero (the parameter lies in the blow-up set), turns over and
//! decays like `−βt` (non-topological), or rides the separatrix towards zero
//! (the unique topological parameter `a₀`).

use crate::model::{truncated_g, NonlinearityConstants};
use crate::ode::{self, Control, OdeError, Segment, State, Tolerances};
use crate::quad::gauss_legendre;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("invalid shooting parameters: {0}")]
    InvalidParams(String),
    #[error("Picard refinement needs t_start < -ln 2, got {0}")]
    PicardTooLate(f64),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("bracket [{lo}, {hi}] does not straddle the topological parameter")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("forcing did not decay before t = {0}")]
    TailNotConverged(f64),
    #[error("profile is not classified Negative")]
    NotNegative,
    #[error("beta target {target} must exceed {min}")]
    OutOfRange { target: f64, min: f64 },
    #[error("no sign change of beta - {target} over the scanned range (beta in [{lo}, {hi}])")]
    NoBracket { target: f64, lo: f64, hi: f64 },
}

impl From<OdeError> for RadialError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::StepUnderflow { t, h } => RadialError::StepFailure { t, h },
            OdeError::NonFinite { t } => RadialError::NonFinite(t),
        }
    }
}

/// Everything except the physical inputs `(N, λ, a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootingOptions {
    /// Start time. `None` picks `min(−12, ½ ln(abs_tol/λ) − 1)`.
    pub t_start: Option<f64>,
    pub t_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_max: f64,
    pub classify_eps: f64,
    pub picard: bool,
    /// Bisection width for `a₀`.
    pub a_tol: f64,
    /// Keep integrating Negative runs until the forcing has decayed.
    pub run_to_tail: bool,
    pub beta_tail_tol: f64,
    /// Extra time integrated after the forcing decays, used by slope fits.
    pub tail_window: f64,
    pub beta_tol: f64,
    /// Number of log-spaced offsets `a₀ − d` scanned by [`find_a_for_beta`].
    pub scan_points: usize,
    pub scan_d_min: f64,
    pub scan_d_max: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            t_start: None,
            t_max: 40.0,
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            h_max: 0.25,
            classify_eps: 1e-10,
            picard: false,
            a_tol: 1e-12,
            run_to_tail: false,
            beta_tail_tol: 1e-14,
            tail_window: 10.0,
            beta_tol: 1e-6,
            scan_points: 49,
            scan_d_min: 1e-8,
            scan_d_max: 100.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShootingParams {
    pub n: u32,
    pub lambda: f64,
    pub a: f64,
    pub opts: ShootingOptions,
}

impl ShootingParams {
    pub fn new(n: u32, lambda: f64, a: f64, opts: ShootingOptions) -> Self {
        Self { n, lambda, a, opts }
    }

    pub fn t_start(&self) -> f64 {
        self.opts.t_start.unwrap_or_else(|| {
            let auto = 0.5 * (self.opts.abs_tol / self.lambda).ln() - 1.0;
            if auto.is_finite() {
                auto.min(-12.0)
            } else {
                -12.0
            }
        })
    }

    pub fn validate(&self) -> Result<(), RadialError> {
        let o = &self.opts;
        let bad = |m: &str| Err(RadialError::InvalidParams(m.to_string()));
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad("lambda must be positive");
        }
        if !self.a.is_finite() {
            return bad("a must be finite");
        }
        if !(o.abs_tol > 0.0 && o.rel_tol > 0.0 && o.h_max > 0.0 && o.classify_eps > 0.0) {
            return bad("tolerances must be positive");
        }
        let t0 = self.t_start();
        if !(t0 < 0.0 && 0.0 < o.t_max) {
            return bad("need t_start < 0 < t_max");
        }
        if self.lambda * (2.0 * t0).exp() >= o.abs_tol {
            return bad("t_start is not deep enough in the linear regime");
        }
        Ok(())
    }

    /// Time after which integration is abandoned. Very negative `a` delays the
    /// onset of the nonlinearity, so the window is shifted by the onset time.
    fn t_end(&self) -> f64 {
        let shift = (-self.a - self.lambda.ln()) / (2.0 * self.n as f64 + 2.0);
        self.opts.t_max + shift.max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ClassTag {
    Positive,
    Negative,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub tag: ClassTag,
    pub event_time: f64,
}

/// A stored trajectory. Nodes are the integrator's accepted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub up: Vec<f64>,
    pub meta: ShootingParams,
    pub classification: Classification,
    /// First node at which the forcing had decayed, for Negative runs integrated to the tail.
    pub tail_start: Option<usize>,
    segments: Vec<Segment>,
}

/// Forcing `λ e^{2t} g(u)`, evaluated so that huge `e^{2t}` never meets a vanishing `e^u`.
#[inline]
pub fn forcing(lambda: f64, t: f64, u: f64) -> f64 {
    if u > 0.0 {
        0.0
    } else {
        lambda * (2.0 * t + u).exp() * (-u.exp_m1()).powi(5)
    }
}

impl RadialProfile {
    fn from_segments(
        segments: Vec<Segment>,
        meta: ShootingParams,
        classification: Classification,
        tail_time: Option<f64>,
    ) -> Self {
        let mut t = Vec::with_capacity(segments.len() + 1);
        let mut u = Vec::with_capacity(segments.len() + 1);
        let mut up = Vec::with_capacity(segments.len() + 1);
        let first = segments[0].start();
        t.push(segments[0].t0);
        u.push(first[0]);
        up.push(first[1]);
        for s in &segments {
            if s.h <= 0.0 {
                continue;
            }
            let y = s.end();
            t.push(s.t1());
            u.push(y[0]);
            up.push(y[1]);
        }
        let tail_start = tail_time.map(|tt| t.iter().position(|&x| x >= tt).unwrap_or(t.len() - 1));
        Self {
            t,
            u,
            up,
            meta,
            classification,
            tail_start,
            segments,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_first(&self) -> f64 {
        self.t[0]
    }

    pub fn t_last(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Dense-output state at `t`, clamped to the stored window.
    pub fn eval(&self, t: f64) -> State {
        let t = t.clamp(self.t_first(), self.t_last());
        let i = self.segments.partition_point(|s| s.t1() < t).min(self.segments.len() - 1);
        self.segments[i].eval(t)
    }

    /// Uniform resampling with spacing close to `dt`.
    pub fn sample_uniform(&self, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (a, b) = (self.t_first(), self.t_last());
        let m = (((b - a) / dt).ceil() as usize).max(1);
        let mut ts = Vec::with_capacity(m + 1);
        let mut us = Vec::with_capacity(m + 1);
        let mut ups = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let t = if i == m { b } else { a + (b - a) * i as f64 / m as f64 };
            let y = self.eval(t);
            ts.push(t);
            us.push(y[0]);
            ups.push(y[1]);
        }
        (ts, us, ups)
    }

    /// Drop everything after `t_cut`.
    pub fn truncated(&self, t_cut: f64) -> Self {
        let mut segs = Vec::new();
        for s in &self.segments {
            if s.t0 >= t_cut {
                break;
            }
            if s.t1() > t_cut {
                segs.push(ode::truncate(s, t_cut));
                break;
            }
            segs.push(*s);
        }
        let tail = self.tail_start.map(|i| self.t[i]).filter(|&tt| tt <= t_cut);
        Self::from_segments(segs, self.meta, self.classification, tail)
    }

    /// Largest per-step defect of `u′(t₁) − u′(t₀) = −∫ λ e^{2t} g(u)`, measured in
    /// units of the integrator's local error target `abs_tol + rel_tol·|u′|`.
    pub fn ode_residual(&self) -> f64 {
        let lam = self.meta.lambda;
        let mut worst = 0.0f64;
        for s in self.segments.iter().filter(|s| s.h > 0.0) {
            let integral = gauss_legendre(s.t0, s.t1(), |t| forcing(lam, t, s.eval(t)[0]));
            let jump = s.end()[1] - s.start()[1];
            let size = s.start()[1].abs().max(s.end()[1].abs());
            let scale = self.meta.opts.abs_tol + self.meta.opts.rel_tol * size;
            worst = worst.max((jump + integral).abs() / scale);
        }
        worst
    }
}

/// Start state at `t_start`: `(2N t + a, 2N)`, optionally refined by Picard iteration
/// of the integral form on `(−∞, t_start]`.
pub fn init_condition(p: &ShootingParams) -> Result<State, RadialError> {
    let t0 = p.t_start();
    let n2 = 2.0 * p.n as f64;
    let zeroth = [n2 * t0 + p.a, n2];
    if !p.opts.picard {
        return Ok(zeroth);
    }
    if t0 >= -std::f64::consts::LN_2 {
        return Err(RadialError::PicardTooLate(t0));
    }
    if p.lambda == 0.0 {
        return Ok(zeroth);
    }
    // the integrand decays like e^{(2N+2)s}; 40 units leaves less than e^{-80}
    let len = 40.0;
    let m = 8000usize;
    let h = len / m as f64;
    let s: Vec<f64> = (0..=m).map(|i| t0 - len + h * i as f64).collect();
    let mut u: Vec<f64> = s.iter().map(|&x| n2 * x + p.a).collect();
    let rate = n2 + 2.0;
    let mut inner = vec![0.0; m + 1];
    let mut outer = vec![0.0; m + 1];
    for _ in 0..50 {
        let phi: Vec<f64> = s.iter().zip(&u).map(|(&x, &ui)| (2.0 * x).exp() * truncated_g(ui)).collect();
        // exponential tails to the left of the grid
        inner[0] = phi[0] / rate;
        outer[0] = phi[0] / (rate * rate);
        for i in 1..=m {
            inner[i] = inner[i - 1] + 0.5 * h * (phi[i - 1] + phi[i]);
            outer[i] = outer[i - 1] + 0.5 * h * (inner[i - 1] + inner[i]);
        }
        let mut change = 0.0f64;
        for i in 0..=m {
            let new = n2 * s[i] + p.a - p.lambda * outer[i];
            change = change.max((new - u[i]).abs());
            u[i] = new;
        }
        if change == 0.0 {
            break;
        }
    }
    Ok([u[m], n2 - p.lambda * inner[m]])
}

/// Integrate from [`init_condition`], stopping at the classifying event.
///
/// Positive: `u` crosses zero upward. Negative: `u′ < −ε` while `u < −ε`.
/// Undetermined: neither before the end of the window. With
/// `opts.run_to_tail`, Negative runs continue until the forcing has decayed
/// and `tail_window` beyond.
pub fn integrate(p: &ShootingParams) -> Result<(RadialProfile, Classification), RadialError> {
    p.validate()?;
    let y0 = init_condition(p)?;
    let t0 = p.t_start();
    let t_end = p.t_end().max(t0 + 1.0);
    let lam = p.lambda;
    let eps = p.opts.classify_eps;
    let rhs = move |t: f64, y: &State| [y[1], -forcing(lam, t, y[0])];
    let tol = Tolerances {
        abs_tol: p.opts.abs_tol,
        rel_tol: p.opts.rel_tol,
        h_max: p.opts.h_max,
        h_init: 1e-3,
    };
    let negative_gap = move |y: &State| (y[1] + eps).max(y[0] + eps);

    let mut class: Option<Classification> = None;
    if y0[0] > 0.0 {
        class = Some(Classification {
            tag: ClassTag::Positive,
            event_time: t0,
        });
    } else if negative_gap(&y0) < 0.0 {
        class = Some(Classification {
            tag: ClassTag::Negative,
            event_time: t0,
        });
    }
    let stop_now = matches!(class, Some(c) if c.tag == ClassTag::Positive || !p.opts.run_to_tail);
    let run_to_tail = p.opts.run_to_tail;
    let tail_window = p.opts.tail_window;
    let tail_tol = p.opts.beta_tail_tol;
    let stop_u = (1.0f64 / 7.0).ln();
    let mut tail_time: Option<f64> = None;
    let hard_end = if run_to_tail { t_end + tail_window } else { t_end };

    let segments = ode::integrate(rhs, t0, y0, hard_end, &tol, |seg| {
        if stop_now {
            return Control::StopAt(seg.t0 + 1e-3 * seg.h);
        }
        let a = seg.start();
        let b = seg.end();
        match class {
            None => {
                if a[0] <= 0.0 && b[0] > 0.0 {
                    let te = refine_first(seg, |y| y[0]);
                    class = Some(Classification {
                        tag: ClassTag::Positive,
                        event_time: te,
                    });
                    return Control::StopAt(te);
                }
                if negative_gap(&b) < 0.0 {
                    let te = refine_first(seg, |y| -negative_gap(y));
                    class = Some(Classification {
                        tag: ClassTag::Negative,
                        event_time: te,
                    });
                    if !run_to_tail {
                        return Control::StopAt(te);
                    }
                }
                if seg.t1() >= t_end {
                    return Control::StopAt(t_end);
                }
                Control::Continue
            }
            Some(_) => match tail_time {
                None => {
                    let t1 = seg.t1();
                    if forcing(lam, t1, b[0]) < tail_tol && b[1] < -2.0 && b[0] < stop_u {
                        tail_time = Some(t1);
                        Control::Continue
                    } else if t1 >= t_end {
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                }
                Some(tt) => {
                    if seg.t1() >= tt + tail_window {
                        Control::StopAt(tt + tail_window)
                    } else {
                        Control::Continue
                    }
                }
            },
        }
    })?;

    let classification = class.unwrap_or_else(|| Classification {
        tag: ClassTag::Undetermined,
        event_time: segments.last().map(|s| s.t1()).unwrap_or(t_end),
    });
    let profile = RadialProfile::from_segments(segments, *p, classification, tail_time);
    Ok((profile, classification))
}

/// Earliest time in a segment at which `event` becomes positive.
fn refine_first<E: Fn(&State) -> f64>(seg: &Segment, event: E) -> f64 {
    // scan the interpolant first so an early crossing within the step is not missed
    let k = 16;
    let mut lo = seg.t0;
    for i in 1..=k {
        let t = seg.t0 + seg.h * i as f64 / k as f64;
        if event(&seg.eval(t)) > 0.0 {
            return ode::refine_event(seg, lo, t, |_, y| event(y));
        }
        lo = t;
    }
    seg.t1()
}

pub fn classify(n: u32, lambda: f64, a: f64, opts: &ShootingOptions) -> Result<Classification, RadialError> {
    let mut o = *opts;
    o.run_to_tail = false;
    integrate(&ShootingParams::new(n, lambda, a, o)).map(|(_, c)| c)
}

/// `5⁵λ/(6⁶·4)`: every larger `a` blows up.
pub fn positive_threshold(lambda: f64) -> f64 {
    -NonlinearityConstants::get().f_min * lambda / 4.0
}

/// Parameter below which every trajectory turns over before reaching zero.
pub fn negative_threshold(n: u32, lambda: f64) -> f64 {
    let b = positive_threshold(lambda);
    if n == 0 {
        return -b - 2.0;
    }
    let nf = n as f64;
    let e1 = (-1f64).exp();
    let denom = lambda * e1 * (1.0 - e1).powi(5) * (1.0 / nf).exp_m1();
    let t = 0.5 * (2.0 * (2.0 * nf + 1.0) / denom).ln() + 0.5;
    -b - 2.0 - 2.0 * nf * t
}

/// Result of the bisection for the topological parameter.
#[derive(Debug, Clone)]
pub struct TopologicalSolution {
    pub a0: f64,
    /// Last Negative and Positive parameters of the bisection.
    pub a_lower: f64,
    pub a_upper: f64,
    pub bisection_steps: usize,
    /// The lower trajectory, cut where it separates from the upper one.
    pub profile: RadialProfile,
    pub separation_time: f64,
}

/// Side of the separatrix: `+1` above, `−1` below, `0` if numerically on it.
fn side(n: u32, lambda: f64, a: f64, opts: &ShootingOptions) -> Result<i8, RadialError> {
    let mut o = *opts;
    o.run_to_tail = false;
    let (prof, c) = integrate(&ShootingParams::new(n, lambda, a, o))?;
    Ok(match c.tag {
        ClassTag::Positive => 1,
        ClassTag::Negative => -1,
        ClassTag::Undetermined => {
            let u_end = *prof.u.last().unwrap();
            if u_end > opts.classify_eps {
                1
            } else if u_end < -opts.classify_eps {
                -1
            } else {
                0
            }
        }
    })
}

fn bisect_a0(n: u32, lambda: f64, opts: &ShootingOptions) -> Result<(f64, f64, f64, usize), RadialError> {
    let mut lo = negative_threshold(n, lambda);
    let mut hi = positive_threshold(lambda) + 0.5;
    let s_lo = side(n, lambda, lo, opts)?;
    let s_hi = side(n, lambda, hi, opts)?;
    if s_lo >= 0 || s_hi <= 0 {
        return Err(RadialError::BracketFailure { lo, hi });
    }
    let mut steps = 0;
    while hi - lo > opts.a_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        steps += 1;
        match side(n, lambda, mid, opts)? {
            1 => hi = mid,
            -1 => lo = mid,
            _ => return Ok((mid, mid, mid, steps)),
        }
    }
    Ok((0.5 * (lo + hi), lo, hi, steps))
}

/// Topological parameter `a₀`, by bisection between the a-priori bounds.
pub fn find_a0(n: u32, lambda: f64, opts: &ShootingOptions) -> Result<f64, RadialError> {
    bisect_a0(n, lambda, opts).map(|(a0, ..)| a0)
}

/// Bisect for `a₀` and keep the part of the trajectory that is trustworthy:
/// the lower and upper bracket trajectories agree there to `1e-4` relative.
pub fn solve_topological(n: u32, lambda: f64, opts: &ShootingOptions) -> Result<TopologicalSolution, RadialError> {
    let (a0, lo, hi, steps) = bisect_a0(n, lambda, opts)?;
    let mut o = *opts;
    o.run_to_tail = false;
    let (p_lo, _) = integrate(&ShootingParams::new(n, lambda, lo, o))?;
    let (p_hi, _) = integrate(&ShootingParams::new(n, lambda, hi, o))?;
    let mut t_sep = p_lo.t_last().min(p_hi.t_last());
    for i in 0..p_lo.len() {
        let t = p_lo.t[i];
        if t > t_sep {
            break;
        }
        let ul = p_lo.u[i];
        let uh = p_hi.eval(t)[0];
        if (uh - ul).abs() > 1e-4 * ul.abs().max(1e-300) && t > 0.0 {
            t_sep = if i > 0 { p_lo.t[i - 1] } else { t };
            break;
        }
    }
    let profile = p_lo.truncated(t_sep);
    Ok(TopologicalSolution {
        a0,
        a_lower: lo,
        a_upper: hi,
        bisection_steps: steps,
        profile,
        separation_time: t_sep,
    })
}

/// `β = −u′` at the first node past forcing decay.
pub fn compute_beta(profile: &RadialProfile) -> Result<f64, RadialError> {
    if profile.classification.tag != ClassTag::Negative {
        return Err(RadialError::NotNegative);
    }
    match profile.tail_start {
        Some(i) => Ok(-profile.up[i]),
        None => Err(RadialError::TailNotConverged(profile.t_last())),
    }
}

/// Integrate a Negative parameter out to the tail and return `(profile, β)`.
pub fn beta_of(n: u32, lambda: f64, a: f64, opts: &ShootingOptions) -> Result<(RadialProfile, f64), RadialError> {
    let mut o = *opts;
    o.run_to_tail = true;
    let (prof, c) = integrate(&ShootingParams::new(n, lambda, a, o))?;
    if c.tag != ClassTag::Negative {
        return Err(RadialError::NotNegative);
    }
    let beta = compute_beta(&prof)?;
    Ok((prof, beta))
}

/// Outcome of the inverse problem `β(a) = β_target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSolve {
    pub a: f64,
    pub beta: f64,
    pub a0: f64,
    /// Sign changes of `β − β_target` seen in the scan. More than one would mean
    /// `β(a)` is not monotone on the scanned range.
    pub sign_changes: usize,
    pub bisection_steps: usize,
}

/// Find `a < a₀` with `β(a) = β_target`.
///
/// Scans `a₀ − d` for log-spaced `d`, then bisects the sign change closest to `a₀`.
pub fn find_a_for_beta(n: u32, lambda: f64, beta_target: f64, opts: &ShootingOptions) -> Result<BetaSolve, RadialError> {
    let min = 2.0 * n as f64 + 4.0;
    if !(beta_target > min) {
        return Err(RadialError::OutOfRange { target: beta_target, min });
    }
    let a0 = find_a0(n, lambda, opts)?;
    let m = opts.scan_points.max(2);
    let ratio = (opts.scan_d_max / opts.scan_d_min).ln();
    let mut scan = Vec::with_capacity(m);
    for k in 0..m {
        let d = opts.scan_d_min * (ratio * k as f64 / (m - 1) as f64).exp();
        let a = a0 - d;
        let (_, b) = beta_of(n, lambda, a, opts)?;
        scan.push((a, b - beta_target));
    }
    let changes: Vec<usize> = (0..m - 1).filter(|&k| (scan[k].1 > 0.0) != (scan[k + 1].1 > 0.0)).collect();
    let Some(&k) = changes.first() else {
        let lo = scan.iter().map(|s| s.1).fold(f64::INFINITY, f64::min) + beta_target;
        let hi = scan.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max) + beta_target;
        return Err(RadialError::NoBracket { target: beta_target, lo, hi });
    };
    // scan[k] is closer to a₀
    let (mut a_near, mut r_near) = scan[k];
    let (mut a_far, _) = scan[k + 1];
    let mut best = (a_near, r_near);
    let mut steps = 0;
    for _ in 0..200 {
        if best.1.abs() < opts.beta_tol {
            break;
        }
        let mid = 0.5 * (a_near + a_far);
        if mid == a_near || mid == a_far {
            break;
        }
        let (_, b) = beta_of(n, lambda, mid, opts)?;
        steps += 1;
        let r = b - beta_target;
        if r.abs() < best.1.abs() {
            best = (mid, r);
        }
        if (r > 0.0) == (r_near > 0.0) {
            a_near = mid;
            r_near = r;
        } else {
            a_far = mid;
        }
    }
    Ok(BetaSolve {
        a: best.0,
        beta: best.1 + beta_target,
        a0,
        sign_changes: changes.len(),
        bisection_steps: steps,
    })
}

/// `∫_{−∞}^{T} e^{2t} e^{ku(t)} dt` for `u = 2Nt + c` through `u(T) = u_t`.
fn left_tail_power(n: u32, k: f64, t: f64, u_t: f64) -> f64 {
    (2.0 * t + k * u_t).exp() / (2.0 + 2.0 * n as f64 * k)
}

/// `∫_{T}^{∞} e^{2t} e^{ku(t)} dt` for `u = −β(t − T) + u_t`.
fn right_tail_power(beta: f64, k: f64, t: f64, u_t: f64) -> f64 {
    (2.0 * t + k * u_t).exp() / (k * beta - 2.0)
}

const BINOM5: [f64; 6] = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
const BINOM6: [f64; 7] = [1.0, 6.0, 15.0, 20.0, 15.0, 6.0, 1.0];

/// `e^u(1 − e^u)^5 = Σ_k C(5,k)(−1)^k e^{(k+1)u}` integrated against one of the tail forms.
fn g_series<T: Fn(f64) -> f64>(tail: T) -> f64 {
    (0..6)
        .map(|k| BINOM5[k] * if k % 2 == 0 { 1.0 } else { -1.0 } * tail(k as f64 + 1.0))
        .sum()
}

/// `1 − (1 − e^u)^6 = Σ_{k≥1} C(6,k)(−1)^{k+1} e^{ku}`.
fn h_series<T: Fn(f64) -> f64>(tail: T) -> f64 {
    (1..7)
        .map(|k| BINOM6[k] * if k % 2 == 1 { 1.0 } else { -1.0 } * tail(k as f64))
        .sum()
}

/// Gauss–Legendre over every stored segment.
fn quad_segments<F: Fn(f64, f64) -> f64>(profile: &RadialProfile, f: F) -> f64 {
    profile
        .segments
        .iter()
        .filter(|s| s.h > 0.0)
        .map(|s| gauss_legendre(s.t0, s.t1(), |t| f(t, s.eval(t)[0])))
        .sum()
}

/// Right-tail intercept `c` of `u ≈ −βt + c`, averaged over the last decade of the trajectory.
fn tail_intercept(profile: &RadialProfile, beta: f64) -> (f64, f64) {
    let t1 = profile.t_last();
    let (ts, us, _) = profile.sample_uniform(0.05);
    let start = t1 - 0.1 * (t1 - profile.t_first()).max(1.0);
    let sel: Vec<(f64, f64)> = ts.iter().zip(&us).filter(|(t, _)| **t >= start).map(|(t, u)| (*t, *u)).collect();
    let c = sel.iter().map(|(t, u)| u + beta * t).sum::<f64>() / sel.len() as f64;
    (t1, -beta * t1 + c)
}

/// `e^{2t}[1 − (1 − e^u)^6]`, written as `e^{2t+u} Σ_{k<6} (1 − e^u)^k` to avoid cancellation.
fn energy_integrand(t: f64, u: f64) -> f64 {
    if u > 0.0 {
        return (2.0 * t).exp();
    }
    let q = -u.exp_m1();
    let sum = 1.0 + q * (1.0 + q * (1.0 + q * (1.0 + q * (1.0 + q))));
    (2.0 * t + u).exp() * sum
}

/// Relative residuals of `β + 2N = λ∫e^{2t}g` and `β²/2 − 2N² = (λ/3)∫e^{2t}[1 − (1 − e^u)^6]`.
pub fn check_identities(profile: &RadialProfile, beta: f64) -> (f64, f64) {
    let lam = profile.meta.lambda;
    let n = profile.meta.n;
    let nf = n as f64;
    let t0 = profile.t_first();
    let u0 = profile.u[0];
    let (t1, u1) = tail_intercept(profile, beta);

    let core1 = quad_segments(profile, |t, u| forcing(lam, t, u));
    let core2 = quad_segments(profile, |t, u| lam / 3.0 * energy_integrand(t, u));
    let i1 = core1
        + lam * g_series(|k| left_tail_power(n, k, t0, u0))
        + lam * g_series(|k| right_tail_power(beta, k, t1, u1));
    let i2 = core2
        + lam / 3.0 * h_series(|k| left_tail_power(n, k, t0, u0))
        + lam / 3.0 * h_series(|k| right_tail_power(beta, k, t1, u1));

    let lhs1 = beta + 2.0 * nf;
    let lhs2 = 0.5 * beta * beta - 2.0 * nf * nf;
    ((i1 - lhs1).abs() / lhs1.abs(), (i2 - lhs2).abs() / lhs2.abs())
}

/// `λ∫_ℝ e^{2t} g(u) dt` with analytic tails. The flux is `π` times this.
///
/// Decaying profiles use the linear tail `−βt + c` with `β = −u′` at the end;
/// profiles approaching zero integrate `u″` exactly over the remaining half line.
pub fn forcing_integral(profile: &RadialProfile) -> f64 {
    let lam = profile.meta.lambda;
    let n = profile.meta.n;
    let t0 = profile.t_first();
    let u0 = profile.u[0];
    let core = quad_segments(profile, |t, u| forcing(lam, t, u));
    let left = lam * g_series(|k| left_tail_power(n, k, t0, u0));
    let last = profile.len() - 1;
    let (t1, u1, up1) = (profile.t[last], profile.u[last], profile.up[last]);
    let right = if u1 >= 0.0 {
        0.0
    } else if up1 < -2.0 {
        let beta = -up1;
        let (tt, uu) = tail_intercept(profile, beta);
        // the fit is anchored at the end, so skip the sliver between tt and t1
        lam * g_series(|k| right_tail_power(beta, k, tt.max(t1), uu))
    } else if up1 >= 0.0 {
        // u′ → 0 on the separatrix, so the remaining integral of u″ is u′(T)
        up1
    } else {
        // still turning over: no reliable asymptotic form
        0.0
    };
    core + left + right
}

/// Physical fields on `r = e^t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalProfile {
    pub r: Vec<f64>,
    pub phisq: Vec<f64>,
    pub f12: Vec<f64>,
    pub energy_density: Vec<f64>,
    /// `Σ_j |D_j φ|² = ½ u_r² e^u`.
    pub dphi_sq: Vec<f64>,
}

pub fn to_physical(profile: &RadialProfile) -> PhysicalProfile {
    let lam = profile.meta.lambda;
    let m = profile.len();
    let mut out = PhysicalProfile {
        r: Vec::with_capacity(m),
        phisq: Vec::with_capacity(m),
        f12: Vec::with_capacity(m),
        energy_density: Vec::with_capacity(m),
        dphi_sq: Vec::with_capacity(m),
    };
    for i in 0..m {
        let (t, u, up) = (profile.t[i], profile.u[i], profile.up[i]);
        let r = t.exp();
        let s = u.exp();
        let one_minus = -u.exp_m1();
        // u_r = u′/r: combine exponents so that tiny r with large u′ stays finite
        let dphi = 0.5 * up * up * (u - 2.0 * t).exp();
        let f12 = 0.5 * lam * truncated_g(u);
        let e = 0.75 * lam * s * one_minus.powi(8) + 3.0 * one_minus * one_minus * dphi;
        out.r.push(r);
        out.phisq.push(s);
        out.f12.push(f12);
        out.energy_density.push(e);
        out.dphi_sq.push(dphi);
    }
    out
}
