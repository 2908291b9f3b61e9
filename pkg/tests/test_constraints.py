import math

import numpy as np
import pytest
from hypothesis import given, settings, assume, strategies as st

import sampling as S
from fraczener.constraints import (
    NARROWED_OK,
    NOT_GUARANTEEABLE,
    THERMO_FAIL,
    THERMO_ONLY,
    K_closed_form,
    K_generic,
    K_nonneg_scan,
    check_narrowed,
    check_thermo,
)
from fraczener.model_catalog import MODEL_CODES, ModelSpec, PowerSum, build_model

# case-1 K(1): 0.05*0.7 sin(.95pi) + 0.05*0.95 sin(1.85pi) + 1.5*0.7 sin(.05pi)
#              + 1.5*0.95 sin(.95pi) - 0.45*0.7 sin(.85pi) + 0.45*0.95 sin(.05pi)
K_CASE1_AT_ONE = 0.29495468490009261


def _by_id(report):
    return {r.id: r for r in report.results}


def test_case1_order_checks(case1):
    r = check_thermo(case1)
    assert r.overall == THERMO_ONLY and r.passed
    ids = _by_id(r)
    assert ids["TD-I+ID.ID-1_1"].rhs == pytest.approx(0.5)
    assert ids["TD-I+ID.ID-1_3"].rhs == pytest.approx(1.3)
    assert ids["TD-I+ID.ID-1_5"].lhs == pytest.approx(0.35)
    assert ids["TD-I+ID.ID-1_6"].rhs == pytest.approx(0.45)


def test_case1_coefficient_bounds(case1):
    al, be, nu = 0.35, 0.55, 0.4
    a1, a2, a3 = 0.05, 1.5, 0.45
    b1, b2 = 0.7, 0.95
    A, B, P, Q = al + 2 * be + nu, nu - al, be + nu, 2 * al + be - nu
    lower = a1 / a2 * abs(np.cos(A * np.pi / 2)) / np.cos(B * np.pi / 2)
    upper = a2 / a3 * np.sin(P * np.pi / 2) / np.sin(Q * np.pi / 2)
    ids = _by_id(check_thermo(case1))
    assert ids["TD-I+ID.ID-2_1"].lhs == pytest.approx(lower, rel=1e-14)
    assert ids["TD-I+ID.ID-2_1"].rhs == pytest.approx(b1 / b2, rel=1e-14)
    assert ids["TD-I+ID.ID-2_2"].rhs == pytest.approx(upper, rel=1e-14)


def test_id_id_mu_above_alpha_fails():
    m = build_model("ID.ID", dict(alpha=0.2, beta=0.3, mu=0.3), [1, 1], [1, 1])
    r = check_thermo(m)
    assert r.overall == THERMO_FAIL
    assert any(f.lhs == pytest.approx(0.3) and f.rhs == pytest.approx(0.2) for f in r.failures())


def test_id_ddp_low_order_sum_fails():
    m = build_model("ID.DD+", dict(alpha=0.2, beta=0.2, mu=0.1), [1, 1], [1, 1])
    r = check_thermo(m)
    assert r.overall == THERMO_FAIL
    assert any(f.lhs == pytest.approx(1.0) and f.rhs == pytest.approx(0.5) for f in r.failures())


def test_case1_narrowed_ok(case1):
    assert check_narrowed(case1).overall == NARROWED_OK


def test_ccp_narrowed_fails(ccp):
    r = check_narrowed(ccp)
    assert r.overall == THERMO_ONLY
    assert {f.id.rsplit("_", 1)[0] for f in r.failures()} <= {"STD-I+ID.ID-2", "STD-I+ID.ID-3"}
    assert r.failures()


def test_id_id_guard(idid):
    # 2 alpha + beta - mu = 0.8 < 1: guard holds
    assert check_narrowed(idid).overall != NOT_GUARANTEEABLE
    m = build_model("ID.ID", dict(alpha=0.45, beta=0.3, mu=0.1), [1, 2], [3, 4])
    r = check_narrowed(m)
    assert check_thermo(m).passed
    assert r.overall == NOT_GUARANTEEABLE
    assert r.failed_guard and r.failed_guard[0].id.startswith("GUARD-ID.ID")


def test_report_json(case1):
    import json
    d = json.loads(check_narrowed(case1).to_json())
    assert d["overall"] == NARROWED_OK
    assert d["inequalities"][0]["id"] == "TD-I+ID.ID-1_1"


def test_K_identical_phi(idid):
    phi = PowerSum([(1.0, 0.0), (2.0, 0.7)])
    m = ModelSpec("custom", idid.orders, phi, phi, 0.3)
    rho = np.logspace(-4, 4, 50)
    expected = np.abs(phi(rho * np.exp(1j * np.pi))) ** 2 * np.sin(0.3 * np.pi)
    assert K_generic(m, rho) == pytest.approx(expected, rel=1e-12)
    assert K_nonneg_scan(m).nonnegative


def test_K_case1_value(case1):
    assert K_closed_form(case1, 1.0) == pytest.approx(K_CASE1_AT_ONE, rel=1e-14)
    assert K_generic(case1, 1.0) == pytest.approx(K_CASE1_AT_ONE, rel=1e-12)


def test_K_small_rho_limit(case1):
    limit = 0.05 * 0.7 * math.sin(0.95 * math.pi)
    assert K_generic(case1, 1e-12) == pytest.approx(limit, rel=1e-6)


def test_K_id_id_symmetric_coefficients():
    m = build_model("ID.ID", dict(alpha=0.4, beta=0.5, mu=0.1), [1.5, 0.7], [1.5, 0.7])
    assert np.all(K_closed_form(m, np.logspace(-6, 6, 241)) >= 0)


def test_scan(case1, ccp):
    assert K_nonneg_scan(case1).nonnegative
    r = K_nonneg_scan(ccp)
    assert not r.nonnegative
    rho, k = r.first_violation
    assert k < 0 and K_generic(ccp, rho) == k


def test_scan_grid_validation(case1):
    with pytest.raises(ValueError):
        K_nonneg_scan(case1, lo=1e-3)
    with pytest.raises(ValueError):
        K_nonneg_scan(case1, per_decade=5)


@pytest.mark.parametrize("code", MODEL_CODES)
@given(seed=st.integers(0, 2**32 - 1))
def test_K_forms_agree(code, seed):
    m = S.random_model(code, np.random.default_rng(seed))
    assume(m is not None)
    rho = np.logspace(-4, 4, 100)
    kg, kc = K_generic(m, rho), K_closed_form(m, rho)
    scale = np.maximum(np.abs(kg), 1e-14 * np.max(np.abs(kg)))
    assert np.all(np.abs(kg - kc) <= 1e-10 * scale)


@pytest.mark.parametrize("code", MODEL_CODES)
@settings(max_examples=4)
@given(seed=st.integers(0, 2**32 - 1))
def test_narrowed_implies_scan_and_thermo(code, seed):
    (m,) = S.narrowed_ok_models(code, 1, seed)
    assert check_thermo(m).passed
    assert K_nonneg_scan(m).nonnegative
