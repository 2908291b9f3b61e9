import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.special import erfc, erfcx, gamma

from fraczener.errors import ParameterWindow
from fraczener.mittag_leffler import MLParams, ml_E, ml_e, ml_e_integral, ml_laplace_check

# e * erfc(1), from the E_{1/2,1}(-x) = exp(x^2) erfc(x) identity
E_HALF_MINUS_ONE = 0.427583576155807


def test_exponential_identity():
    assert ml_E(1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-14)
    assert ml_E(1.0, 1.0, 1.0) == pytest.approx(2.718281828, abs=1e-9)


@pytest.mark.parametrize("xi,zeta", [(0.3, 0.5), (0.9, 1.0), (1.0, 2.5), (0.5, 1.7)])
def test_zero_argument(xi, zeta):
    assert ml_E(xi, zeta, 0.0) == pytest.approx(1.0 / gamma(zeta), rel=1e-14)


def test_half_order_erfc():
    assert ml_E(0.5, 1.0, -1.0) == pytest.approx(E_HALF_MINUS_ONE, rel=1e-12)
    assert ml_E(0.5, 1.0, -1.0) == pytest.approx(math.e * erfc(1.0), rel=1e-12)
    assert ml_E(0.5, 1.0, -1.0) == pytest.approx(0.427584, abs=1e-6)


@pytest.mark.parametrize("x", [0.5, 2.0, 4.0, 6.0, 12.0, 30.0])
def test_half_order_erfc_both_routes(x):
    # |z| > 5 goes through the integral representation
    assert ml_E(0.5, 1.0, -x) == pytest.approx(erfcx(x), rel=1e-10)


def test_kernel_examples():
    t = np.array([0.5, 1.0, 3.0])
    assert ml_e(0.7, 1.4, 0.0, t) == pytest.approx(t**0.4 / gamma(1.4), rel=1e-13)
    assert ml_e(1.0, 1.0, 2.0, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-13)
    assert ml_e(1.0, 1.0, 2.0, 1.0) == pytest.approx(0.135335, abs=1e-6)


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_derivative_lowers_zeta(t):
    xi, zeta, lam, h = 0.8, 1.3, 1.0, 1e-4
    fd = (ml_e(xi, zeta, lam, t + h) - ml_e(xi, zeta, lam, t - h)) / (2 * h)
    assert fd == pytest.approx(ml_e(xi, zeta - 1.0, lam, t), abs=1e-6)


@pytest.mark.parametrize("zeta", [0.5, 1.5, 2.0])
def test_unit_xi_large_argument(zeta):
    # E_{1,zeta}(z) = sum z^n / Gamma(n + zeta), checked with a long exact-precision sum
    import mpmath
    z = -12.0
    with mpmath.workdps(60):
        ref = mpmath.nsum(lambda n: mpmath.mpf(z) ** n * mpmath.rgamma(n + zeta), [0, mpmath.inf])
    assert ml_E(1.0, zeta, z) == pytest.approx(float(ref), rel=1e-12)


def test_sign_change_outside_monotone_window():
    e = ml_e(1.0, 0.5, 1.0, np.array([0.1, 100.0]))
    assert e[0] > 0 > e[1]


def test_kernel_rejects_bad_input():
    with pytest.raises(ParameterWindow):
        ml_e(0.5, 1.0, 1.0, 0.0)
    with pytest.raises(ParameterWindow):
        ml_e(0.5, 1.0, -1.0, 1.0)
    with pytest.raises(ParameterWindow):
        ml_E(0.0, 1.0, 1.0)


def test_integral_form_agrees():
    assert ml_e_integral(0.9, 0.9, 1.0, 1.0) == pytest.approx(ml_e(0.9, 0.9, 1.0, 1.0), rel=1e-8)


def test_integral_form_zeta_equals_xi():
    # only the rho^xi sin(zeta pi) numerator survives
    for lam in (0.5, 2.0):
        assert ml_e_integral(0.6, 0.6, lam, 1.3) == pytest.approx(ml_e(0.6, 0.6, lam, 1.3), rel=1e-8)
    for t in (0.2, 1.0, 7.0):
        assert ml_e_integral(0.6, 0.6, 0.0, t) == pytest.approx(t**-0.4 / gamma(0.6), rel=1e-8)


def test_integral_form_window():
    with pytest.raises(ParameterWindow):
        ml_e_integral(1.0, 0.5, 1.0, 1.0)
    with pytest.raises(ParameterWindow):
        ml_e_integral(0.5, 1.5, 1.0, 1.0)
    with pytest.raises(ParameterWindow):
        ml_e_integral(0.5, 0.5, 1.0, -1.0)


def test_laplace_examples():
    assert ml_laplace_check(1.0, 1.0, 2.0, 3.0) == pytest.approx(0.2, rel=1e-15)
    assert ml_laplace_check(0.9, 0.95, 1.0, 2.0) == pytest.approx(2**-0.05 / (2**0.9 + 1), rel=1e-15)


def test_laplace_round_trip_numeric():
    xi, zeta, lam, s = 0.9, 0.95, 1.0, 2.0
    f = lambda t: ml_e(xi, zeta, lam, t) * math.exp(-s * t)  # noqa: E731
    edges = [0.0, 1e-6, 1e-4, 1e-2, 0.1, 1.0, 5.0, 20.0, 200.0]
    total = sum(integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
                for a, b in zip(edges, edges[1:]))
    assert total == pytest.approx(ml_laplace_check(xi, zeta, lam, s), abs=1e-6)


def test_params_object():
    p = MLParams(0.5, 1.0, 1.0)
    assert p.integral_form_valid
    assert p.E(-1.0) == pytest.approx(E_HALF_MINUS_ONE, rel=1e-12)
    assert p.e(1.0) == pytest.approx(E_HALF_MINUS_ONE, rel=1e-12)
    assert p.laplace(3.0) == pytest.approx(3**-0.5 / (3**0.5 + 1.0))
    assert not MLParams(1.0, 1.0).integral_form_valid
    assert not MLParams(0.5, 1.5).integral_form_valid
    with pytest.raises(ParameterWindow):
        MLParams(1.2, 1.0)
    with pytest.raises(ParameterWindow):
        MLParams(0.5, 1.0, -0.1)


@given(xi=st.floats(0.05, 0.95), frac=st.floats(0.02, 0.98), lam=st.floats(0.01, 4.0),
       t=st.floats(0.1, 1.0))
def test_series_matches_integral(xi, frac, lam, t):
    zeta = 0.02 + frac * (1.0 + xi - 0.04)
    # lam t^xi <= 4 keeps ml_e on the series route
    series = ml_e(xi, zeta, lam, t)
    assert ml_e_integral(xi, zeta, lam, t) == pytest.approx(series, rel=1e-8, abs=1e-14)


@given(xi=st.floats(0.05, 1.0), zeta_frac=st.floats(0.0, 1.0), lam=st.floats(0.05, 5.0))
def test_completely_monotone_window(xi, zeta_frac, lam):
    # complete monotonicity holds for 0 < xi <= zeta <= 1; e_{1,1/2,1} already changes sign
    zeta = min(xi + zeta_frac * (1.0 - xi), 1.0)
    t = np.geomspace(0.1, 100.0, 25)
    e = ml_e(xi, zeta, lam, t)
    assert np.all(e > 0)
    assert np.all(np.diff(e) < 0)


@given(xi=st.floats(0.3, 1.0), zeta=st.floats(0.6, 1.2), lam=st.floats(0.0, 2.0))
def test_laplace_round_trip(xi, zeta, lam):
    s = 2.0 * max(1.0, lam ** (1.0 / xi))
    f = lambda t: ml_e(xi, zeta, lam, t) * math.exp(-s * t)  # noqa: E731
    edges = [0.0, 1e-6, 1e-3, 0.1, 1.0, 10.0, 60.0]
    total = sum(integrate.quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
                for a, b in zip(edges, edges[1:]))
    assert total == pytest.approx(ml_laplace_check(xi, zeta, lam, s), abs=1e-6)
