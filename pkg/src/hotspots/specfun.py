"""Fractional-order Bessel J, its derivative, and the scaled corner function.

The scaled form J_nu(k*r) / r^nu is the workhorse near expansion vertices:
it stays finite (and accurate) down to r = 0, where the direct quotient
underflows for large nu. It is summed as a series in r^2 with log-space
leading coefficients and compensated accumulation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, jv, jvp

NU_MAX = 200.0
X_MAX = 60.0
_SERIES_MAX_TERMS = 400


class EnvelopeError(ValueError):
    """Argument outside the solver's validated operating envelope."""


@dataclass(frozen=True)
class BesselEval:
    value: float
    derivative: float


def ln_gamma(x):
    """log Gamma(x) for x > 0 (elementwise)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("ln_gamma requires positive arguments")
    out = gammaln(x)
    return float(out) if out.ndim == 0 else out


def _check_envelope(nu, x):
    if not (0.0 <= nu <= NU_MAX):
        raise EnvelopeError(f"order nu={nu} outside [0, {NU_MAX}]")
    if not (0.0 <= x <= X_MAX):
        raise EnvelopeError(f"argument x={x} outside [0, {X_MAX}]")


def bessel_j(nu, x):
    """J_nu(x) and its x-derivative on the envelope nu in [0,200], x in [0,60]."""
    nu = float(nu)
    x = float(x)
    _check_envelope(nu, x)
    if x == 0.0:
        if nu == 0.0:
            return BesselEval(1.0, 0.0)
        if nu == 1.0:
            return BesselEval(0.0, 0.5)
        if nu > 1.0:
            return BesselEval(0.0, 0.0)
        raise EnvelopeError(f"J'_nu(0) diverges for 0 < nu={nu} < 1")
    return BesselEval(float(jv(nu, x)), float(jvp(nu, x)))


def bessel_j_scaled(nu, r, k):
    """J_nu(k*r) / r^nu, underflow-free for small r (series in r^2)."""
    nu = float(nu)
    r = float(r)
    k = float(k)
    if r < 0.0 or k < 0.0:
        raise EnvelopeError("bessel_j_scaled requires r >= 0 and k >= 0")
    _check_envelope(nu, k * r)
    if k == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    # series is cancellation-safe up to ~0.75*nu; beyond that J_nu(k*r) is
    # no longer in its underflow-prone regime and the quotient is exact
    if k * r <= max(12.0, 0.75 * nu):
        return _scaled_series(nu, r, k)
    # large argument, r necessarily far from 0: divide in log space
    val = float(jv(nu, k * r))
    if val == 0.0 or nu == 0.0:
        return val
    return math.copysign(math.exp(math.log(abs(val)) - nu * math.log(r)), val)


def _scaled_series(nu, r, k):
    # t_0 = (k/2)^nu / Gamma(nu+1), t_{j+1}/t_j = -(k r / 2)^2 / ((j+1)(j+nu+1))
    half_k = 0.5 * k
    t = math.exp(nu * math.log(half_k) - math.lgamma(nu + 1.0)) if nu > 0 else 1.0
    r2 = (half_k * r) ** 2
    total = 0.0
    comp = 0.0
    for j in range(_SERIES_MAX_TERMS):
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
        t *= -r2 / ((j + 1.0) * (j + nu + 1.0))
        if abs(t) <= 1e-18 * abs(total) + 5e-324:
            break
    return total


def bessel_j_scaled_many(nus, r, k):
    """Vectorized bessel_j_scaled over an array of orders at one point."""
    return np.array([bessel_j_scaled(nu, r, k) for nu in np.atleast_1d(nus)])
