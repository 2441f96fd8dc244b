"""Independent reference values for the C++ test suite.

Everything here is written from the model definitions with numpy/scipy/mpmath
and shares no code with the library. Run it and copy the printed values into
tests/fixtures.hpp when a definition changes.
"""

import mpmath as mp
import numpy as np
from scipy.optimize import brentq, minimize_scalar

P = 3


def amp(r, beta):
    # (1/beta) ln 2cosh(beta r), overflow-free; beta = inf gives |r|
    r = np.abs(r)
    if np.isinf(beta):
        return r
    return r + np.log1p(np.exp(-2.0 * beta * r)) / beta


def f_step(m, s, tau, T, p=P):
    beta = np.inf if T == 0 else 1.0 / T
    H = s * p * m ** (p - 1)
    return s * (p - 1) * m**p - (1 - tau) * amp(np.sqrt(H * H + 1.0), beta) - tau * amp(H, beta)


def minima(s, tau, T, n=100001):
    m = np.linspace(0.0, 1.0, n)
    f = f_step(m, s, tau, T)
    left = np.r_[True, f[1:] < f[:-1]]
    right = np.r_[f[:-1] <= f[1:], True]
    out = []
    for k in np.flatnonzero(left & right):
        if k in (0, n - 1):
            out.append((m[k], f[k]))
            continue
        r = minimize_scalar(lambda x: f_step(x, s, tau, T), bounds=(m[k - 1], m[k + 1]), method="bounded",
                            options={"xatol": 1e-13})
        out.append((r.x, r.fun))
    return out


def global_m(s, tau, T):
    return min(minima(s, tau, T), key=lambda q: q[1])[0]


def jump(fix, lo, hi):
    """Degeneracy point of the two branches bracketing a jump of m* in the free coordinate."""
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if abs(global_m(*fix(mid)) - global_m(*fix(lo))) < 1e-3:
            lo = mid
        else:
            hi = mid
    ml, mh = global_m(*fix(lo)), global_m(*fix(hi))

    def df(x):
        ms = minima(*fix(x))
        a = min(ms, key=lambda q: abs(q[0] - ml))
        b = min(ms, key=lambda q: abs(q[0] - mh))
        return a[1] - b[1]

    a, b = lo - 1e-6, hi + 1e-6
    x = brentq(df, a, b, xtol=1e-14)
    ms = minima(*fix(x))
    a = min(ms, key=lambda q: abs(q[0] - ml))
    b = min(ms, key=lambda q: abs(q[0] - mh))
    return x, abs(b[0] - a[0])


def classical_angle(s, tau, p=P):
    mp.mp.dps = 40
    e = lambda th: -s * (tau + (1 - tau) * mp.cos(th)) ** p - (1 - tau) * mp.sin(th)
    grid = np.linspace(0.0, np.pi / 2, 1_000_001)
    vals = -s * (tau + (1 - tau) * np.cos(grid)) ** p - (1 - tau) * np.sin(grid)
    k = int(np.argmin(vals))
    a, b = mp.mpf(grid[max(k - 1, 0)]), mp.mpf(grid[min(k + 1, len(grid) - 1)])
    g = (mp.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    for _ in range(200):
        if e(c) < e(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return float((a + b) / 2)


def critical_endpoint(p=P):
    # e' = e'' = e''' = 0 on the classical manifold, solved with mpmath
    mp.mp.dps = 50
    th, s, tau = mp.mpf("1.15"), mp.mpf("0.52"), mp.mpf("0.21")

    def e(theta, s, tau):
        return -s * (tau + (1 - tau) * mp.cos(theta)) ** p - (1 - tau) * mp.sin(theta)

    def eqs(theta, s, tau):
        return [mp.diff(lambda x: e(x, s, tau), theta, n) for n in (1, 2, 3)]

    sol = mp.findroot(eqs, (th, s, tau))
    return [float(v) for v in sol]


if __name__ == "__main__":
    print("closed step f(0.8; s=0.4, tau=0.5) =", repr(float(f_step(0.8, 0.4, 0.5, 0.0))))
    print("theta0(s=0.5, tau=0.5) =", repr(classical_angle(0.5, 0.5)))
    th, s, tau = critical_endpoint()
    print("critical endpoint theta, s, tau =", repr(th), repr(s), repr(tau))
    print("touching exponent =", repr(np.log(tau) / np.log(s)))
    ms = minima(0.7698, 0.0, 0.0)
    print("minima at s=0.7698, tau=0 (T=0) =", ms)
    x, dm = jump(lambda s: (s, 0.0, 0.0), 0.7, 0.8)
    print("homogeneous transition T=0: s =", repr(x), "delta_m =", repr(dm))
    x, dm = jump(lambda s: (s, 0.0, 0.01), 0.7, 0.8)
    print("homogeneous transition T=0.01: s =", repr(x), "delta_m =", repr(dm))
    x, dm = jump(lambda tau: (0.6, tau, 0.01), 0.085, 0.1)
    print("T=0.01 line at s=0.6: tau =", repr(x), "delta_m =", repr(dm))
