"""Random parameter sets for property tests."""

from __future__ import annotations

import numpy as np

from fraczener.constraints import NARROWED_OK, check_narrowed, check_thermo
from fraczener.errors import FracZenerError
from fraczener.model_catalog import _TABLE, FractionalOrders, build_model, required_orders


def random_model(code: str, rng: np.random.Generator, spread: float = 4.0):
    """Orders uniform in (0, 1), coefficients log-uniform in e^(+-spread); None if invalid."""
    o = FractionalOrders.from_mapping({k: float(rng.uniform(0.01, 0.99))
                                       for k in required_orders(code)})
    row = _TABLE[code]
    try:
        n_a, n_b = len(row.sigma(o)), len(row.epsilon(o))
        a = np.exp(rng.uniform(-spread, spread, n_a))
        b = np.exp(rng.uniform(-spread, spread, n_b))
        return build_model(code, o, a, b)
    except FracZenerError:
        return None


def _coefficients(code, orders, rng, spread=4.0):
    row = _TABLE[code]
    return (np.exp(rng.uniform(-spread, spread, len(row.sigma(orders)))),
            np.exp(rng.uniform(-spread, spread, len(row.epsilon(orders)))))


def _orders_feasible(code, orders, rng, check=check_narrowed) -> bool:
    """False when an inequality that involves orders only already fails."""
    m1 = build_model(code, orders, *_coefficients(code, orders, rng))
    m2 = build_model(code, orders, *_coefficients(code, orders, rng))
    r1, r2 = check(m1), check(m2)
    if r1.failed_guard:
        return False
    for x, y in zip(r1.results, r2.results):
        if x.lhs == y.lhs and x.rhs == y.rhs and not x.satisfied:
            return False
    return True


def narrowed_ok_models(code: str, count: int, seed: int, coeff_tries: int = 100,
                       max_orders: int = 100000):
    """``count`` NarrowedOK parameter sets: feasible orders are drawn first, then
    coefficients are redrawn until the narrowed restrictions hold."""
    return _models(code, count, seed, check_narrowed, lambda r: r.overall == NARROWED_OK,
                   coeff_tries, max_orders)


def thermo_valid_models(code: str, count: int, seed: int, coeff_tries: int = 100,
                        max_orders: int = 100000):
    """``count`` parameter sets that pass the thermodynamical restrictions."""
    return _models(code, count, seed, check_thermo, lambda r: r.passed, coeff_tries, max_orders)


def _models(code, count, seed, check, accept, coeff_tries, max_orders):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(max_orders):
        o = FractionalOrders.from_mapping({k: float(rng.uniform(0.01, 0.99))
                                           for k in required_orders(code)})
        try:
            if not _orders_feasible(code, o, rng, check):
                continue
        except FracZenerError:
            continue
        for _ in range(coeff_tries):
            m = build_model(code, o, *_coefficients(code, o, rng))
            if accept(check(m)):
                out.append(m)
                break
        if len(out) == count:
            return out
    raise RuntimeError(f"{code}: only {len(out)} accepted sets found")
