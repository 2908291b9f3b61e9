"""Catalogue of the fifteen fractional anti-Zener and Zener models.

Every model is reduced to the Laplace-domain pair

    sigma~_sr(s) = s^(xi-1) phi_eps(s) / phi_sigma(s),
    eps~_cr(s)   = s^(-1-xi) phi_sigma(s) / phi_eps(s),

where phi_sigma and phi_eps are short power sums with positive coefficients
and a leading constant term. The table below stores, per model code, the
exponent pattern of both sums and the order xi as functions of the
fractional orders.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import mpmath
import numpy as np

from .errors import (
    ExponentOutOfRange,
    MissingOrder,
    NonPositiveCoefficient,
    PoleHit,
    UnknownModel,
    ZeroArgument,
)

ORDER_NAMES = ("alpha", "beta", "gamma", "mu", "nu", "eta")

POLE_REL_TOL = 1e-12


class PowerSeries:
    """Finite sum of real-power terms sum_k c_k s^p_k (any signs, any exponents).

    Evaluation uses the principal branch s^p = rho^p e^{i p phi}, phi in (-pi, pi].
    """

    def __init__(self, terms: Sequence[tuple[float, float]]):
        self.terms = tuple((float(c), float(p)) for c, p in terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([p for _, p in self.terms])

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*s^{p:g}" for c, p in self.terms) or "0"
        return f"{type(self).__name__}({body})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PowerSeries) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def polar(self, rho, phi: float):
        """Evaluate at s = rho e^{i phi}; rho may be an array."""
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(rho.shape, dtype=complex)
        for c, p in self.terms:
            out = out + c * rho**p * complex(math.cos(p * phi), math.sin(p * phi))
        return out if out.ndim else complex(out)

    def on_cut(self, rho):
        """Value on the upper edge of the negative real axis, s = rho e^{i pi}."""
        return self.polar(rho, math.pi)

    def __call__(self, s):
        return power_sum_eval(self, s)

    def scale(self) -> float:
        return sum(abs(c) for c, _ in self.terms)

    @property
    def top_exponent(self) -> float:
        return self.terms[-1][1] if self.terms else 0.0


class PowerSum(PowerSeries):
    """Constitutive function: 1 to 3 positive terms, exponents strictly increasing in [0, 2]."""

    def __init__(self, terms: Sequence[tuple[float, float]]):
        super().__init__(terms)
        if not 1 <= len(self.terms) <= 3:
            raise ExponentOutOfRange(f"a power sum needs 1 to 3 terms, got {len(self.terms)}")
        for c, p in self.terms:
            if not c > 0 or not math.isfinite(c):
                raise NonPositiveCoefficient(f"coefficient {c} is not positive")
            if not 0.0 <= p <= 2.0:
                raise ExponentOutOfRange(f"exponent {p} outside [0, 2]")
        ps = [p for _, p in self.terms]
        if any(q <= p for p, q in zip(ps, ps[1:])):
            raise ExponentOutOfRange(f"exponents {ps} are not strictly increasing")


def power_sum_eval(f: PowerSeries, s):
    """Principal-branch evaluation of f at complex s (also accepts mpmath numbers)."""
    if isinstance(s, (mpmath.mpc, mpmath.mpf)):
        if s == 0:
            raise ZeroArgument("power sum evaluated at s = 0")
        return mpmath.fsum(mpmath.mpf(c) * mpmath.power(s, mpmath.mpf(p)) for c, p in f.terms)
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr == 0):
        raise ZeroArgument("power sum evaluated at s = 0")
    rho = np.abs(s_arr)
    phi = np.angle(s_arr)
    # arg s lives in (-pi, pi]; -pi only arises from a signed zero imaginary part
    phi = np.where(phi <= -math.pi, math.pi, phi)
    out = np.zeros(s_arr.shape, dtype=complex)
    for c, p in f.terms:
        out = out + c * rho**p * np.exp(1j * p * phi)
    return out if out.ndim else complex(out)


def power_sum_derivative(f: PowerSeries) -> PowerSeries:
    """Termwise d/ds; constant terms are dropped."""
    return PowerSeries([(c * p, p - 1.0) for c, p in f.terms if p != 0.0])


@dataclass(frozen=True)
class FractionalOrders:
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None
    mu: float | None = None
    nu: float | None = None
    eta: float | None = None

    @classmethod
    def from_mapping(cls, m: Mapping[str, float]) -> "FractionalOrders":
        unknown = set(m) - set(ORDER_NAMES)
        if unknown:
            raise MissingOrder(f"unknown order names {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in m.items()})

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ORDER_NAMES if getattr(self, k) is not None}


@dataclass(frozen=True)
class _Row:
    orders: tuple[str, ...]
    sigma: Callable[..., tuple[float, ...]]
    epsilon: Callable[..., tuple[float, ...]]
    xi: Callable[..., float]
    lam: Callable[..., float] | None = None
    kappa: Callable[..., float] | None = None


def _half(a, g):
    return (1.0 + a + g) / 2.0


# exponent patterns of phi_sigma and phi_eps (leading 0 for the constant term)
_TABLE: dict[str, _Row] = {
    "ID.ID": _Row(("alpha", "beta", "mu"),
                  lambda o: (0.0, o.alpha + o.beta),
                  lambda o: (0.0, o.alpha + o.beta),
                  lambda o: o.alpha - o.mu),
    "ID.DD+": _Row(("alpha", "beta", "mu"),
                   lambda o: (0.0, o.alpha + o.beta),
                   lambda o: (0.0, o.alpha + o.beta),
                   lambda o: o.alpha + o.mu),
    "IID.IID": _Row(("alpha", "beta", "gamma", "eta"),
                    lambda o: (0.0, o.alpha - o.beta, o.alpha + o.gamma),
                    lambda o: (0.0, o.alpha - o.beta, o.alpha + o.gamma),
                    lambda o: o.eta - o.gamma,
                    lam=lambda o: o.alpha - o.beta),
    "IDD.IDD": _Row(("alpha", "beta", "gamma", "mu"),
                    lambda o: (0.0, o.alpha + o.beta, o.alpha + o.gamma),
                    lambda o: (0.0, o.alpha + o.beta, o.alpha + o.gamma),
                    lambda o: o.alpha - o.mu,
                    lam=lambda o: o.alpha + o.beta),
    "IID.IDD": _Row(("alpha", "beta", "gamma", "mu", "nu"),
                    lambda o: (0.0, o.mu + o.nu, o.alpha + o.gamma),
                    lambda o: (0.0, o.alpha - o.beta, o.alpha + o.gamma),
                    lambda o: o.alpha - o.mu,
                    lam=lambda o: o.mu + o.nu,
                    kappa=lambda o: o.alpha - o.beta),
    "I+ID.I+ID": _Row(("alpha", "gamma", "mu"),
                      lambda o: (0.0, _half(o.alpha, o.gamma), 1.0 + o.alpha + o.gamma),
                      lambda o: (0.0, _half(o.alpha, o.gamma), 1.0 + o.alpha + o.gamma),
                      lambda o: o.alpha - o.mu),
    "IDD+.IDD+": _Row(("alpha", "gamma", "eta"),
                      lambda o: (0.0, _half(o.alpha, o.gamma), 1.0 + o.alpha + o.gamma),
                      lambda o: (0.0, _half(o.alpha, o.gamma), 1.0 + o.alpha + o.gamma),
                      lambda o: o.eta - o.gamma),
    "I+ID.IDD+": _Row(("alpha", "gamma", "eta"),
                      lambda o: (0.0, _half(o.alpha, o.gamma), 1.0 + o.alpha + o.gamma),
                      lambda o: (0.0, _half(o.alpha, o.gamma), 1.0 + o.alpha + o.gamma),
                      lambda o: 1.0 - (o.gamma - o.eta)),
    "IID.ID": _Row(("alpha", "beta", "gamma", "nu"),
                   lambda o: (0.0, o.alpha + o.beta - o.gamma - o.nu, o.alpha + o.beta),
                   lambda o: (0.0, o.alpha + o.beta),
                   lambda o: o.beta - o.gamma,
                   lam=lambda o: o.alpha + o.beta - o.gamma - o.nu,
                   kappa=lambda o: o.alpha + o.beta),
    "IDD.DD+": _Row(("alpha", "beta", "mu"),
                    lambda o: (0.0, o.alpha + o.beta, o.alpha + o.mu),
                    lambda o: (0.0, o.alpha + o.beta),
                    lambda o: o.alpha + o.mu,
                    lam=lambda o: o.alpha + o.beta,
                    kappa=lambda o: o.alpha + o.mu),
    "I+ID.ID": _Row(("alpha", "beta", "nu"),
                    lambda o: (0.0, o.alpha + o.beta, 2.0 * (o.alpha + o.beta)),
                    lambda o: (0.0, o.alpha + o.beta),
                    lambda o: o.beta + o.nu),
    "IDD+.DD+": _Row(("alpha", "beta", "mu"),
                     lambda o: (0.0, o.alpha + o.beta, 2.0 * (o.alpha + o.beta)),
                     lambda o: (0.0, o.alpha + o.beta),
                     lambda o: o.alpha + o.mu),
    "ID.IDD": _Row(("alpha", "beta", "mu", "nu"),
                   lambda o: (0.0, o.mu + o.nu),
                   lambda o: (0.0, o.alpha + o.beta, o.mu + o.nu),
                   lambda o: o.mu - o.alpha,
                   lam=lambda o: o.mu + o.nu,
                   kappa=lambda o: o.alpha + o.beta),
    "ID.DDD+": _Row(("alpha", "beta", "mu", "nu"),
                    lambda o: (0.0, o.alpha + o.beta),
                    lambda o: (0.0, o.nu - o.mu, o.alpha + o.beta + o.nu - o.mu),
                    lambda o: o.alpha + o.mu,
                    lam=lambda o: o.nu - o.mu,
                    kappa=lambda o: o.alpha + o.beta + o.nu - o.mu),
    "ID.IDD+": _Row(("alpha", "beta", "nu"),
                    lambda o: (0.0, o.alpha + o.beta),
                    lambda o: (0.0, o.alpha + o.beta, 2.0 * (o.alpha + o.beta)),
                    lambda o: o.nu - o.beta),
}

MODEL_CODES: tuple[str, ...] = tuple(_TABLE)


def normalize_code(code: str) -> str:
    c = code.strip().replace("⁺", "+").replace("^{+}", "+").replace("^+", "+").upper()
    if c not in _TABLE:
        raise UnknownModel(f"unknown model code {code!r}; expected one of {', '.join(MODEL_CODES)}")
    return c


def required_orders(code: str) -> tuple[str, ...]:
    return _TABLE[normalize_code(code)].orders


@dataclass(frozen=True)
class ModelSpec:
    code: str
    orders: FractionalOrders
    phi_sigma: PowerSum
    phi_epsilon: PowerSum
    xi: float
    lambda_order: float | None = None
    kappa_order: float | None = None
    a: tuple[float, ...] = field(default=())
    b: tuple[float, ...] = field(default=())

    def to_descriptor(self) -> dict:
        return {"code": self.code, "orders": self.orders.as_dict(),
                "a": list(self.a), "b": list(self.b)}


def build_model(code: str, orders: FractionalOrders | Mapping[str, float],
                a: Sequence[float], b: Sequence[float]) -> ModelSpec:
    """Assemble phi_sigma, phi_eps and xi for a model code."""
    code = normalize_code(code)
    row = _TABLE[code]
    if not isinstance(orders, FractionalOrders):
        orders = FractionalOrders.from_mapping(orders)
    for name in row.orders:
        v = getattr(orders, name)
        if v is None:
            raise MissingOrder(f"model {code} needs order {name}")
        if not 0.0 <= v <= 1.0:
            raise ExponentOutOfRange(f"order {name}={v} outside [0, 1]")
    ps, pe = row.sigma(orders), row.epsilon(orders)
    a = tuple(float(x) for x in a)
    b = tuple(float(x) for x in b)
    if len(a) != len(ps) or len(b) != len(pe):
        raise NonPositiveCoefficient(
            f"model {code} needs {len(ps)} a-coefficients and {len(pe)} b-coefficients")
    for c in a + b:
        if not c > 0:
            raise NonPositiveCoefficient(f"coefficient {c} is not positive")
    for p in ps[1:] + pe[1:]:
        if not 0.0 < p < 2.0:
            raise ExponentOutOfRange(f"model {code}: combined exponent {p:g} outside (0, 2)")
    return ModelSpec(
        code=code,
        orders=orders,
        phi_sigma=PowerSum(list(zip(a, ps))),
        phi_epsilon=PowerSum(list(zip(b, pe))),
        xi=row.xi(orders),
        lambda_order=row.lam(orders) if row.lam else None,
        kappa_order=row.kappa(orders) if row.kappa else None,
        a=a,
        b=b,
    )


def model_from_descriptor(d: Mapping | str) -> ModelSpec:
    """Build a model from the JSON descriptor (dict or JSON text)."""
    if isinstance(d, str):
        d = json.loads(d)
    return build_model(d["code"], d.get("orders", {}), d["a"], d["b"])


def load_model(path: str) -> ModelSpec:
    with open(path) as fh:
        return model_from_descriptor(json.load(fh))


def _check_pole(f: PowerSeries, value, s) -> None:
    if isinstance(s, (mpmath.mpc, mpmath.mpf)):
        rho = float(abs(s))
        mag = float(abs(value))
    else:
        rho = np.abs(s)
        mag = np.abs(value)
    pmax = f.top_exponent
    scale = f.scale() * np.maximum(1.0, rho) ** pmax
    if np.any(mag < POLE_REL_TOL * scale):
        raise PoleHit(f"s={s} is a zero of the denominator")


def laplace_relaxation(m: ModelSpec, s):
    """s^(xi-1) phi_eps(s)/phi_sigma(s) on the principal branch."""
    den = power_sum_eval(m.phi_sigma, s)
    _check_pole(m.phi_sigma, den, s)
    num = power_sum_eval(m.phi_epsilon, s)
    return _spow(s, m.xi - 1.0) * num / den


def laplace_creep(m: ModelSpec, s):
    """s^(-1-xi) phi_sigma(s)/phi_eps(s) on the principal branch."""
    den = power_sum_eval(m.phi_epsilon, s)
    _check_pole(m.phi_epsilon, den, s)
    num = power_sum_eval(m.phi_sigma, s)
    return _spow(s, -1.0 - m.xi) * num / den


def _spow(s, p):
    if isinstance(s, (mpmath.mpc, mpmath.mpf)):
        return mpmath.power(s, p)
    if np.ndim(s) == 0:
        s = complex(s)
        if s.imag == 0 and s.real < 0:
            s = complex(s.real, 0.0)
        return cmath.exp(p * cmath.log(s))
    s = np.asarray(s, dtype=complex)
    return np.abs(s) ** p * np.exp(1j * p * np.where(np.angle(s) <= -math.pi, math.pi, np.angle(s)))
