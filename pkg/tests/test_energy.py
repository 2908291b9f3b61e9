import numpy as np
import pytest
from scipy import integrate

from fraczener.constraints import NARROWED_OK, check_narrowed
from fraczener.energy import (
    STRAIN,
    STRESS,
    History,
    KernelSamples,
    convolution_identity_check,
    creep_rate_kernels,
    energy_from_strain,
    energy_from_stress,
    relaxation_kernels,
    strain_from_stress,
    stress_from_strain,
)
from fraczener.errors import GridTooCoarse
from fraczener.pole_finder import NO_POLES
from fraczener.response import classify_creep, classify_relaxation, creep, relaxation, relaxation_ml


def _step(kind, t_end=5.0, n=1001):
    return History.from_function(lambda t: np.ones_like(t), t_end, n, kind)


def test_zero_histories(case1):
    z = History.from_function(lambda t: 0 * t, 2.0, 401, STRAIN)
    assert np.all(stress_from_strain(case1, z).values == 0)
    e = energy_from_strain(case1, z)
    assert np.all(e.P == 0) and np.all(e.W == 0) and np.all(e.Pdiss == 0)
    z = History.from_function(lambda t: 0 * t, 2.0, 401, STRESS)
    assert np.all(strain_from_stress(case1, z).values == 0)
    e = energy_from_stress(case1, z)
    assert np.all(e.P == 0) and np.all(e.W == 0) and np.all(e.Pdiss == 0)


def test_unit_step_strain(case1):
    h = _step(STRAIN)
    sig = stress_from_strain(case1, h)
    i = np.arange(10, len(h.times) - 1)
    ref = relaxation(case1, h.times[i]).values
    assert np.max(np.abs(sig.values[i] / ref - 1)) < 0.01


def test_unit_step_stress(case1):
    h = _step(STRESS)
    eps = strain_from_stress(case1, h)
    i = np.arange(10, len(h.times))
    ref = creep(case1, h.times[i]).values
    assert np.max(np.abs(eps.values[i] / ref - 1)) < 0.01


def test_ramp_strain_idid(idid):
    h = History.from_function(lambda t: t, 2.0, 2001, STRAIN)
    sig = stress_from_strain(idid, h)
    for t in (0.5, 1.0, 1.5):
        i = int(round(t / h.dt))
        direct = integrate.quad(lambda x: relaxation_ml(idid, x), 0, t, limit=200,
                                points=[1e-8, 1e-5, 1e-2], epsrel=1e-10)[0]
        assert sig.values[i] == pytest.approx(direct, rel=1e-4)


def test_round_trip_idid(idid):
    h = History.from_function(lambda t: np.sin(t) ** 2, 4.0, 1001, STRAIN)
    back = strain_from_stress(idid, stress_from_strain(idid, h))
    assert np.max(np.abs(back.values - h.values)[5:-5]) <= 0.02 * np.max(np.abs(h.values))


def test_constant_kernel_is_elastic():
    n, dt, E = 400, 0.01, 2.5
    ks = KernelSamples.from_functions(dt, n, lambda t: E + 0 * t, lambda t: 0 * t,
                                      lambda t: 0 * t, lambda t: E * t)
    h = History.from_function(lambda t: np.sin(t), n * dt, n + 1, STRAIN)
    e = energy_from_strain(ks, h)
    assert e.W == pytest.approx(0.5 * E * h.values**2, abs=1e-12)
    assert np.all(e.Pdiss[1:] == 0)


@pytest.fixture(scope="module")
def balance(case1):
    out = {}
    for n in (2000, 4000):
        h = History.from_function(lambda t: 1 - np.exp(-t), 10.0, n, STRAIN)
        out[n] = energy_from_strain(case1, h)
    return out


def test_case1_balance(balance):
    e = balance[2000]
    assert e.identity_residual <= 1e-3 * np.max(np.abs(e.P))
    assert np.all(e.W >= 0) and np.all(e.Pdiss >= 0)


def test_balance_first_order(balance):
    ratio = balance[4000].identity_residual / balance[2000].identity_residual
    assert 0.4 <= ratio <= 0.6


def test_positivity_random_histories(case1):
    assert check_narrowed(case1).overall == NARROWED_OK
    assert classify_relaxation(case1).kind == NO_POLES
    n, t_end = 800, 4.0
    ks = relaxation_kernels(case1, t_end / (n - 1), n - 1)
    rng = np.random.default_rng(11)
    for _ in range(5):
        amp, freq, rate = rng.uniform(-1, 1, 3), rng.uniform(0.2, 3, 3), rng.uniform(0.1, 2, 3)
        f = lambda t: sum(a * np.sin(w * t) * np.exp(-r * t) for a, w, r in zip(amp, freq, rate))  # noqa: E731
        e = energy_from_strain(ks, History.from_function(f, t_end, n, STRAIN))
        scale = max(np.max(np.abs(e.W)), np.max(np.abs(e.Pdiss)))
        assert np.all(e.W >= -1e-8 * scale)
        assert np.all(e.Pdiss >= -1e-8 * scale)


def test_stress_form_pulse(case1):
    assert classify_creep(case1).kind == NO_POLES
    h = History.from_function(lambda t: np.sin(np.pi * t / 2) ** 2 * (t < 2), 4.0, 801, STRESS)
    e = energy_from_stress(case1, h)
    assert np.all(e.W >= 0)
    assert np.all(e.Pdiss[1:] >= 0)
    assert e.identity_residual <= 1e-2 * np.max(np.abs(e.P))


def test_cross_form_power(case1):
    n, t_end = 2001, 4.0
    eps = History.from_function(lambda t: np.sin(t) ** 2, t_end, n, STRAIN)
    a = energy_from_strain(case1, eps)
    sig = stress_from_strain(case1, eps)
    b = energy_from_stress(case1, sig)
    i = slice(20, n - 20)
    assert np.max(np.abs(a.P[i] - b.P[i])) <= 5e-3 * np.max(np.abs(a.P))


def test_identity_check_examples():
    u = History.from_function(np.sin, 5.0, 2000, STRAIN)
    assert convolution_identity_check(lambda t: np.exp(-t), u) <= 1e-4
    c = History.from_function(lambda t: 0 * t + 0.7, 5.0, 2000, STRAIN)
    assert convolution_identity_check(lambda t: np.exp(-t), c) <= 1e-6
    assert convolution_identity_check(lambda t: 0 * t + 3.0, u) <= 1e-6


def test_kernels_share_grid(case1):
    ks = creep_rate_kernels(case1, 0.01, 50)
    assert ks.prim[0] == 0 and len(ks.k) == 51
    with pytest.raises(ValueError):
        energy_from_stress(ks, History.from_function(np.sin, 1.0, 101, STRESS))


def test_history_validation():
    with pytest.raises(ValueError):
        History(np.array([0, 1, 3, 4, 5, 6, 7, 8.0]), np.zeros(8), STRAIN)
    with pytest.raises(ValueError):
        History(np.arange(1, 9.0), np.zeros(8), STRAIN)
    with pytest.raises(ValueError):
        History(np.arange(8.0), np.zeros(8), "temperature")
    with pytest.raises(GridTooCoarse):
        History(np.arange(4.0), np.zeros(4), STRAIN)
    with pytest.raises(ValueError):
        stress_from_strain(None, History(np.arange(8.0), np.zeros(8), STRESS))


def test_unresolved_kernel():
    # tau^-3.5 near zero is not integrable against tau^2
    n, dt = 20, 0.1
    ks = KernelSamples.from_functions(dt, n, lambda t: t**-2.5, lambda t: -2.5 * t**-3.5,
                                      lambda t: 8.75 * t**-4.5, lambda t: 0 * t)
    with pytest.raises(GridTooCoarse):
        energy_from_strain(ks, History.from_function(np.sin, n * dt, n + 1, STRAIN))
