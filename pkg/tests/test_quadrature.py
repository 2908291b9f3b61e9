import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraczener.errors import ContourFailure, NotConverged, PoleOnBoundary
from fraczener.mittag_leffler import ml_e
from fraczener.quadrature import (
    QuadSpec,
    bromwich_oracle,
    integrate_principal_value,
    integrate_semi_infinite,
)

# int_0^inf rho^-0.05/(1 + rho^1.8) e^-rho, 40-digit adaptive quadrature
POWER_RATIONAL = 0.65585091513835028
# -e^-1 Ei(1)
PV_EXP = -0.69717488323506607


def _log_trapezoid(f, n=10**6, lo=-40.0, hi=math.log(900.0)):
    u = np.linspace(lo, hi, n)
    x = np.exp(u)
    return np.trapezoid(f(x) * x, u)


def test_exponential():
    r = integrate_semi_infinite(lambda x: math.exp(-x), 1.0)
    assert r.value == pytest.approx(1.0, rel=1e-12)
    assert r.converged


def test_gamma_half():
    r = integrate_semi_infinite(lambda x: x**-0.5 * math.exp(-x) if x > 0 else 0.0, 1.0)
    assert r.value == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert r.value == pytest.approx(1.772454, abs=1e-6)


def test_power_rational_against_trapezoid():
    g = lambda x: x**-0.05 / (1 + x**1.8) * np.exp(-x)  # noqa: E731
    r = integrate_semi_infinite(lambda x: float(g(x)) if x > 0 else 0.0, 1.0)
    oracle = _log_trapezoid(g)
    assert r.value == pytest.approx(oracle, rel=1e-7)
    assert r.value == pytest.approx(POWER_RATIONAL, rel=1e-9)


@pytest.mark.parametrize("f,exact", [
    (lambda x: math.exp(-x), 1.0),
    (lambda x: x**-0.5 * math.exp(-x) if x > 0 else 0.0, math.sqrt(math.pi)),
    (lambda x: x**-0.05 / (1 + x**1.8) * math.exp(-x) if x > 0 else 0.0, POWER_RATIONAL),
])
def test_error_estimate_bounds_error(f, exact):
    spec = QuadSpec(rel_tol=1e-6, abs_tol=1e-9)
    r = integrate_semi_infinite(f, 1.0, spec)
    assert abs(r.value - exact) <= max(r.err, 1e-15)


def test_undamped_tail():
    r = integrate_semi_infinite(lambda x: 1.0 / (1.0 + x) ** 2, 0.0, damped=False)
    assert r.value == pytest.approx(1.0, rel=1e-10)


def test_strict_flags_divergence():
    with pytest.raises(NotConverged):
        integrate_semi_infinite(lambda x: 1.0 / math.sqrt(x) if x > 0 else 0.0, 0.0,
                                damped=False, strict=True)


def test_pv_symmetric():
    r = integrate_principal_value(lambda x: 1.0 / (x - 1.0), 1.0, upper=2.0)
    assert abs(r.value) < 1e-12


def test_pv_exponential_integral():
    r = integrate_principal_value(lambda x: math.exp(-x) / (x - 1.0), 1.0, 1.0)
    assert r.value == pytest.approx(PV_EXP, rel=1e-10)
    assert r.value == pytest.approx(-0.6971, abs=1e-4)


def test_pv_bad_pole():
    with pytest.raises(PoleOnBoundary):
        integrate_principal_value(lambda x: 1.0 / x, 0.0)
    with pytest.raises(PoleOnBoundary):
        integrate_principal_value(lambda x: 1.0 / (x - 3), 3.0, upper=2.0)


@given(st.floats(0.1, 10.0), st.floats(0.1, 5.0), st.integers(1, 5))
def test_pv_antisymmetric_vanishes(pole, width, power):
    spec = QuadSpec()
    half = min(width, pole)
    f = lambda x: (x - pole) ** (2 * power - 1) / ((x - pole) ** 2 + 1.0) ** power / (x - pole) ** 2  # noqa: E731
    # odd in (x - pole) on [pole - half, pole + half]
    lo = pole - half
    g = lambda x: f(x) if x >= lo else 0.0  # noqa: E731
    r = integrate_principal_value(g, pole, upper=pole + half, spec=spec)
    assert abs(r.value) < 1e-12 * max(1.0, half)


def test_oracle_examples():
    for t in (0.1, 1.0, 10.0):
        assert bromwich_oracle(lambda s: 1 / s, t) == pytest.approx(1.0, rel=1e-12)
    assert bromwich_oracle(lambda s: 1 / (s + 1), 1.0) == pytest.approx(0.3678794, abs=1e-7)
    assert bromwich_oracle(lambda s: 1 / (s + 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-8)
    v = bromwich_oracle(lambda s: s**-0.5, 4.0)
    assert v == pytest.approx(0.5 / math.sqrt(math.pi), rel=1e-10)
    assert v == pytest.approx(0.2820948, abs=1e-7)


def test_oracle_needs_positive_time():
    with pytest.raises(ContourFailure):
        bromwich_oracle(lambda s: 1 / s, 0.0)


@settings(max_examples=15)
@given(st.floats(0.2, 0.95), st.floats(0.1, 1.5), st.floats(0.0, 3.0), st.floats(0.1, 10.0))
def test_oracle_inverts_ml_pairs(xi, zeta, lam, t):
    v = bromwich_oracle(lambda s: s ** (xi - zeta) / (s**xi + lam), t)
    assert v == pytest.approx(ml_e(xi, zeta, lam, t), rel=1e-6, abs=1e-12)
