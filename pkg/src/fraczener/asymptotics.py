"""Short- and long-time expansions of the I+ID.ID responses.

With r = alpha + beta, xi = beta + nu, lam = b1/b2:

    phi_sigma/phi_eps = (a3/b2) s^r + (a3/b2)(a2/a3 - lam) + ...         (s -> inf)
                      = (a1/b1)[1 + (a2/a1 - b2/b1) s^r + ...]           (s -> 0)

and s^(-1-k) inverts to t^k/Gamma(1+k), so each series is a short sum of
powers of t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rgamma

from .errors import WrongModelShape
from .model_catalog import ModelSpec

SHORT_TIME = "short"
LONG_TIME = "long"


@dataclass(frozen=True)
class AsymptoticSeries:
    """sum_k c_k t^{e_k}; ``terms`` holds (c_k, e_k) with the Gamma factor folded into c_k."""

    terms: tuple[tuple[float, float], ...]
    valid_end: str

    def __post_init__(self):
        exps = [e for _, e in self.terms]
        steps = np.diff(exps)
        if self.valid_end == SHORT_TIME and np.any(steps <= 0):
            raise ValueError("short-time exponents must increase")
        if self.valid_end == LONG_TIME and np.any(steps >= 0):
            raise ValueError("long-time exponents must decrease")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = sum(c * t**e for c, e in self.terms)
        return float(out) if np.ndim(out) == 0 else out

    def leading(self) -> tuple[float, float]:
        return self.terms[0]

    def as_dict(self) -> dict:
        return {"valid_end": self.valid_end,
                "terms": [{"coefficient": c, "exponent": e} for c, e in self.terms]}


def _params(m: ModelSpec):
    if m.code != "I+ID.ID":
        raise WrongModelShape(f"expansions are available for I+ID.ID only, not {m.code}")
    o = m.orders
    (a1, a2, a3), (b1, b2) = m.a, m.b
    return o.alpha, o.beta, o.nu, a1, a2, a3, b1, b2


def _term(c: float, k: float) -> tuple[float, float]:
    """c t^k / Gamma(1 + k)."""
    return c * float(rgamma(1.0 + k)), k


def relax_short(m: ModelSpec) -> AsymptoticSeries:
    al, be, nu, a1, a2, a3, b1, b2 = _params(m)
    c = b2 / a3
    return AsymptoticSeries((
        _term(c, al - nu),
        _term(c * (b1 / b2 - a2 / a3), 2 * al + be - nu),
        _term(c * ((a2 / a3) ** 2 - a1 / a3 - a2 / a3 * b1 / b2), 3 * al + 2 * be - nu),
    ), SHORT_TIME)


def relax_long(m: ModelSpec) -> AsymptoticSeries:
    al, be, nu, a1, a2, a3, b1, b2 = _params(m)
    return AsymptoticSeries((_term(b1 / a1, -(be + nu)),), LONG_TIME)


def creep_short(m: ModelSpec) -> AsymptoticSeries:
    al, be, nu, a1, a2, a3, b1, b2 = _params(m)
    c = a3 / b2
    lam = b1 / b2
    return AsymptoticSeries((
        _term(c, nu - al),
        _term(c * (a2 / a3 - lam), be + nu),
        _term(c * (a1 / a3 - a2 / a3 * lam + lam**2), al + 2 * be + nu),
    ), SHORT_TIME)


def creep_long(m: ModelSpec) -> AsymptoticSeries:
    al, be, nu, a1, a2, a3, b1, b2 = _params(m)
    c = a1 / b1
    mu = b2 / b1
    return AsymptoticSeries((
        _term(c, be + nu),
        _term(c * (a2 / a1 - mu), nu - al),
        _term(c * (a3 / a1 - a2 / a1 * mu + mu**2), nu - 2 * al - be),
    ), LONG_TIME)


SERIES = {"relax_short": relax_short, "relax_long": relax_long,
          "creep_short": creep_short, "creep_long": creep_long}


def series(m: ModelSpec, which: str) -> AsymptoticSeries:
    try:
        return SERIES[which](m)
    except KeyError:
        raise ValueError(f"unknown series {which!r}; choose from {sorted(SERIES)}") from None


def relative_gap(series_value: float, reference: float) -> float:
    return abs(series_value - reference) / abs(reference) if reference else math.inf
