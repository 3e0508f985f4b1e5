"""Independent reference values for the radial shooting solver (SciPy DOP853).

u'' = -lam e^{2t} e^u (1 - e^u)^5 for u <= 0, start (2N t0 + a, 2N) at t0 = -14.
Prints a0 for a few (N, lam) and beta(a) below a0.
"""
import numpy as np
from scipy.integrate import solve_ivp


def make(N, lam):
    def rhs(t, y):
        u = y[0]
        f = 0.0 if u > 0 else lam * np.exp(2 * t + u) * (-np.expm1(u)) ** 5
        return [y[1], -f]

    def hit_zero(t, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = 1

    def turned(t, y):
        return y[1]

    turned.terminal = True
    turned.direction = -1
    return rhs, hit_zero, turned


def side(N, lam, a, t0=-14.0):
    rhs, hz, tu = make(N, lam)
    t_end = 60 + max(0.0, (-a - np.log(lam)) / (2 * N + 2))
    s = solve_ivp(rhs, [t0, t_end], [2 * N * t0 + a, 2 * N], method="DOP853",
                  rtol=1e-13, atol=1e-15, events=[hz, tu])
    if len(s.t_events[0]):
        return 1
    if len(s.t_events[1]):
        return -1
    return 0


def a0(N, lam):
    lo, hi = -40.0, 1.0
    assert side(N, lam, lo) < 0 and side(N, lam, hi) > 0
    for _ in range(80):
        m = 0.5 * (lo + hi)
        if m in (lo, hi):
            break
        if side(N, lam, m) > 0:
            hi = m
        else:
            lo = m
    return 0.5 * (lo + hi)


def beta(N, lam, a, t0=-14.0):
    rhs, _, _ = make(N, lam)
    t_on = max(0.0, (-a - np.log(lam)) / (2 * N + 2))
    s = solve_ivp(rhs, [t0, t_on + 60], [2 * N * t0 + a, 2 * N], method="DOP853",
                  rtol=1e-13, atol=1e-15)
    return -s.y[1, -1]


if __name__ == "__main__":
    for N, lam in [(1, 1.0), (1, 12.0), (2, 1.0)]:
        print(f"a0 N={N} lam={lam}: {a0(N, lam)!r}")
    base = a0(1, 1.0)
    for d in [1.0, 5.0, 30.0]:
        print(f"beta N=1 lam=1 a=a0-{d}: {beta(1, 1.0, base - d)!r}")
    base = a0(1, 12.0)
    for d in [0.5, 5.0]:
        print(f"beta N=1 lam=12 a=a0-{d}: {beta(1, 12.0, base - d)!r}")
