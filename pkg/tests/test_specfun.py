import math

import numpy as np
import pytest
from scipy.special import jv

from hotspots.specfun import (EnvelopeError, bessel_j, bessel_j_scaled,
                              ln_gamma)


def test_ln_gamma_values():
    assert ln_gamma(1.0) == 0.0
    assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-14)
    # closed-form reflection value ln sqrt(pi)
    assert ln_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-14)


def test_ln_gamma_recurrence():
    for x in np.linspace(0.1, 40.0, 37):
        lhs = ln_gamma(x + 1.0)
        rhs = ln_gamma(x) + math.log(x)
        assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


def test_ln_gamma_rejects_nonpositive():
    with pytest.raises(ValueError):
        ln_gamma(0.0)
    with pytest.raises(ValueError):
        ln_gamma(-1.5)


def test_bessel_j_at_zero():
    j0 = bessel_j(0.0, 0.0)
    assert j0.value == 1.0 and j0.derivative == 0.0
    assert bessel_j(2.5, 0.0).value == 0.0
    assert bessel_j(1.0, 0.0).derivative == 0.5


def test_bessel_half_order_closed_form():
    # J_{1/2}(x) = sqrt(2/(pi x)) sin x; frozen at x=2
    assert bessel_j(0.5, 2.0).value == pytest.approx(0.5130161365618278,
                                                     rel=1e-12)
    for x in (0.3, 1.7, 9.4, 31.0):
        ref = math.sqrt(2.0 / (math.pi * x)) * math.sin(x)
        assert bessel_j(0.5, x).value == pytest.approx(ref, rel=1e-10,
                                                       abs=1e-14)
        ref_mhalf = math.sqrt(2.0 / (math.pi * x)) * math.cos(x)
        # derivative via the closed forms: J'_{1/2} = J_{-1/2} - J_{1/2}/(2x)
        dref = ref_mhalf - ref / (2.0 * x)
        assert bessel_j(0.5, x).derivative == pytest.approx(dref, rel=1e-9,
                                                            abs=1e-12)


def test_bessel_envelope():
    with pytest.raises(EnvelopeError):
        bessel_j(-1.0, 1.0)
    with pytest.raises(EnvelopeError):
        bessel_j(201.0, 1.0)
    with pytest.raises(EnvelopeError):
        bessel_j(1.0, 61.0)


def test_recurrence_residual_grid():
    # |J_{nu-1} + J_{nu+1} - (2 nu/x) J_nu| <= 1e-9 max(1, |J_nu|)
    worst = 0.0
    for nu in np.linspace(0.3, 20.0, 12):
        for x in np.linspace(0.1, 50.0, 18):
            jm = bessel_j(nu, x).value
            jm1 = bessel_j(nu - 1.0, x).value if nu >= 1.0 \
                else float(jv(nu - 1.0, x))
            jp1 = bessel_j(nu + 1.0, x).value
            res = abs(jm1 + jp1 - 2.0 * nu / x * jm) / max(1.0, abs(jm))
            worst = max(worst, res)
    assert worst <= 1e-9


def test_derivative_identity():
    for nu in (1.0, 2.5, 7.0, 19.5):
        for x in (0.4, 3.0, 22.0):
            d = bessel_j(nu, x).derivative
            ref = 0.5 * (bessel_j(nu - 1.0, x).value
                         - bessel_j(nu + 1.0, x).value)
            assert d == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_scaled_constant_term():
    assert bessel_j_scaled(0.0, 0.0, 3.0) == pytest.approx(1.0, rel=1e-14)
    assert bessel_j_scaled(0.0, 0.0, 0.0) == 1.0
    assert bessel_j_scaled(2.0, 0.0, 0.0) == 0.0


def test_scaled_small_r_limit():
    # leading coefficient (k/2)^2 / Gamma(3) = pi^2/8 at nu=2, k=pi
    assert bessel_j_scaled(2.0, 1e-8, np.pi) == pytest.approx(
        1.2337005501361697, rel=1e-10)
    assert bessel_j_scaled(2.0, 0.0, np.pi) == pytest.approx(
        np.pi**2 / 8.0, rel=1e-14)


def test_scaled_no_underflow_large_order():
    # r^nu underflows but the scaled value is an ordinary double
    val = bessel_j_scaled(150.0, 1e-8, 20.0)
    ref = math.exp(150.0 * math.log(10.0) - math.lgamma(151.0))
    assert val == pytest.approx(ref, rel=1e-10)


def test_scaled_consistency_with_direct():
    assert bessel_j_scaled(3.0, 0.5, 3.0) * 0.5**3 == pytest.approx(
        bessel_j(3.0, 1.5).value, rel=1e-11)
    rng = np.random.default_rng(2)
    for _ in range(120):
        nu = rng.uniform(0.0, 30.0)
        r = rng.uniform(1e-6, 2.0)
        k = rng.uniform(0.1, 25.0)
        if k * r > 60.0 or r**nu < 1e-280:
            continue
        direct = bessel_j(nu, k * r).value
        scaled = bessel_j_scaled(nu, r, k) * r**nu
        assert scaled - direct == pytest.approx(0.0, abs=1e-9 * max(1.0, abs(direct)))
        if abs(direct) > 1e-250:
            assert scaled == pytest.approx(direct, rel=1e-9)
