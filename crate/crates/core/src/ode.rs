//! Dormand–Prince 5(4) integrator with the free fourth-order dense output.
//!
//! Specialised to two-dimensional first-order systems, which is all the radial
//! shooting problem needs. Event handling lives with the caller: every accepted
//! step is handed to a controller together with its interpolant.

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    /// The controller asked for a step below the resolvable size at `t`.
    StepUnderflow { t: f64, h: f64 },
    /// The right-hand side produced a non-finite value at `t`.
    NonFinite { t: f64 },
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Segment {
    pub t0: f64,
    pub h: f64,
    rcont: [State; 5],
}

impl Segment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> State {
        self.rcont[0]
    }

    pub fn end(&self) -> State {
        [
            self.rcont[0][0] + self.rcont[1][0],
            self.rcont[0][1] + self.rcont[1][1],
        ]
    }

    /// Dense output at `t ∈ [t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> State {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let rc = &self.rcont;
        let mut y = [0.0; 2];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = rc[0][i]
                + theta * (rc[1][i] + theta1 * (rc[2][i] + theta * (rc[3][i] + theta1 * rc[4][i])));
        }
        y
    }
}

/// Returned by the step controller after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Control {
    Continue,
    /// Truncate the current segment at the given time and stop.
    StopAt(f64),
    /// Keep the full segment and stop.
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub h_max: f64,
    pub h_init: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            h_max: 0.25,
            h_init: 1e-3,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrate `y' = rhs(t, y)` from `t0` towards `t_end` (> t0).
///
/// The controller sees each accepted segment and may stop the integration.
/// Returns the accepted segments in order; the last one may be truncated.
pub fn integrate<F, C>(
    rhs: F,
    t0: f64,
    y0: State,
    t_end: f64,
    tol: &Tolerances,
    mut controller: C,
) -> Result<Vec<Segment>, OdeError>
where
    F: Fn(f64, &State) -> State,
    C: FnMut(&Segment) -> Control,
{
    let mut segments = Vec::new();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = tol.h_init.min(tol.h_max).min(t_end - t0);

    while t < t_end {
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            return Err(OdeError::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y1 = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = rhs(t + h, &y1);

        let mut err = 0.0;
        for i in 0..2 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.abs_tol + tol.rel_tol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() || !y1[0].is_finite() || !y1[1].is_finite() {
            if h <= h_min {
                return Err(OdeError::NonFinite { t });
            }
            h *= 0.2;
            continue;
        }

        if err <= 1.0 {
            let mut rcont = [[0.0; 2]; 5];
            for i in 0..2 {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k1[i]
                        + D3 * k3[i]
                        + D4 * k4[i]
                        + D5 * k5[i]
                        + D6 * k6[i]
                        + D7 * k7[i]);
            }
            let seg = Segment { t0: t, h, rcont };
            match controller(&seg) {
                Control::Continue => {
                    segments.push(seg);
                }
                Control::Stop => {
                    segments.push(seg);
                    return Ok(segments);
                }
                Control::StopAt(ts) => {
                    segments.push(truncate(&seg, ts));
                    return Ok(segments);
                }
            }
            t += h;
            y = y1;
            k1 = k7;
            if last {
                break;
            }
            let fac = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            h = (h * fac).min(tol.h_max);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(segments)
}

/// Restrict a segment to `[t0, ts]` keeping the same interpolating polynomial.
pub fn truncate(seg: &Segment, ts: f64) -> Segment {
    let ts = ts.clamp(seg.t0, seg.t1());
    if ts >= seg.t1() {
        return *seg;
    }
    let s = (ts - seg.t0) / seg.h;
    Segment {
        t0: seg.t0,
        h: ts - seg.t0,
        rcont: rescale(&seg.rcont, s),
    }
}

/// Coefficients of `p(s·θ)` in the `rcont` basis, where `p` is the original interpolant.
fn rescale(rc: &[State; 5], s: f64) -> [State; 5] {
    // monomial coefficients of p(θ), scaled, then mapped back to the nested form
    let mut out = [[0.0; 2]; 5];
    for i in 0..2 {
        let (r0, r1, r2, r3, r4) = (rc[0][i], rc[1][i], rc[2][i], rc[3][i], rc[4][i]);
        let c0 = r0;
        let c1 = r1 + r2;
        let c2 = -r2 + r3 + r4;
        let c3 = -r3 - 2.0 * r4;
        let c4 = r4;
        let m = [c0, c1 * s, c2 * s * s, c3 * s.powi(3), c4 * s.powi(4)];
        let n4 = m[4];
        let n3 = -m[3] - 2.0 * n4;
        let n2 = n3 + n4 - m[2];
        let n1 = m[1] - n2;
        out[0][i] = m[0];
        out[1][i] = n1;
        out[2][i] = n2;
        out[3][i] = n3;
        out[4][i] = n4;
    }
    out
}

/// Locate a sign change of `event(t, y)` on a segment by bisection on the interpolant.
/// `lo`/`hi` must bracket the change.
pub fn refine_event<E>(seg: &Segment, mut lo: f64, mut hi: f64, event: E) -> f64
where
    E: Fn(f64, &State) -> f64,
{
    let f_lo = event(lo, &seg.eval(lo));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = event(mid, &seg.eval(mid));
        if (f_mid > 0.0) == (f_lo > 0.0) && f_mid != 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
