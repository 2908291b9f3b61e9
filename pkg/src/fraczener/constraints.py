"""Thermodynamical and narrowed restrictions, and the function K(rho).

K(rho) = Im(e^{i xi pi} phi_eps(rho e^{i pi}) conj(phi_sigma(rho e^{i pi}))) is the
numerator of the branch-cut integrand of the relaxation modulus. K >= 0 on
rho > 0 makes the relaxation modulus completely monotone and the creep
compliance a Bernstein function. The narrowed restrictions are sufficient
conditions for K >= 0.

Inequality identifiers are "TD-<code>-<n>_<k>" (thermodynamical) and
"STD-<code>-<n>_<k>" (narrowed), where n numbers the restriction block and
k the pairwise comparison within it. Chains a <= b <= c are split into
their consecutive pairs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .model_catalog import ModelSpec

TIE_TOL = 1e-14

THERMO_FAIL = "ThermoFail"
THERMO_ONLY = "ThermoOnly"
NARROWED_OK = "NarrowedOK"
NOT_GUARANTEEABLE = "NarrowedNotGuaranteeable"


@dataclass(frozen=True)
class Inequality:
    id: str
    lhs: float
    rhs: float
    relation: str  # "<=" or "<"
    satisfied: bool

    def as_dict(self) -> dict:
        return {"id": self.id, "lhs": self.lhs, "rhs": self.rhs,
                "relation": self.relation, "satisfied": self.satisfied}


@dataclass
class ConstraintReport:
    code: str
    results: list[Inequality] = field(default_factory=list)
    overall: str = THERMO_ONLY
    failed_guard: list[Inequality] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.satisfied for r in self.results)

    def failures(self) -> list[Inequality]:
        return [r for r in self.results if not r.satisfied]

    def as_dict(self) -> dict:
        return {"code": self.code, "overall": self.overall,
                "failed_guard": [g.as_dict() for g in self.failed_guard],
                "inequalities": [r.as_dict() for r in self.results]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.as_dict(), **kw)


def _compare(lhs: float, rhs: float, rel: str) -> bool:
    if not (math.isfinite(lhs) or math.isinf(lhs)) or math.isnan(lhs) or math.isnan(rhs):
        return False
    if rel == "<=":
        return lhs <= rhs + TIE_TOL
    return lhs < rhs - TIE_TOL


class _Block:
    """Collects the pairwise comparisons of one numbered restriction block."""

    def __init__(self, label: str, out: list[Inequality]):
        self.label, self.out, self.k = label, out, 0

    def chain(self, values, rels):
        for (x, y), rel in zip(zip(values, values[1:]), rels):
            self.k += 1
            x, y = float(x), float(y)
            self.out.append(Inequality(f"{self.label}_{self.k}", x, y, rel, _compare(x, y, rel)))
        return self

    def le(self, *values):
        return self.chain(values, ["<="] * (len(values) - 1))

    def lt(self, *values):
        return self.chain(values, ["<"] * (len(values) - 1))


def _div(x: float, y: float) -> float:
    if y == 0.0:
        return math.copysign(math.inf, x) if x != 0.0 else math.nan
    return x / y


def S(x):
    return math.sin(x * math.pi / 2.0)


def C(x):
    return math.cos(x * math.pi / 2.0)


def s4(x):
    return math.sin(x * math.pi / 4.0)


def c4(x):
    return math.cos(x * math.pi / 4.0)


def sn(x):
    return math.sin(x * math.pi)


def _orders(m: ModelSpec):
    o = m.orders
    return o.alpha, o.beta, o.gamma, o.mu, o.nu, o.eta


# --- per-model restriction tables --------------------------------------------------
# Each entry gets (blocks factory, model) and fills thermodynamical blocks, narrowed
# blocks and applicability guards.


def _id_id(m, td, std, guard):
    al, be, _, mu, _, _ = _orders(m)
    (a1, a2), (b1, b2) = m.a, m.b
    A, B = 2 * al + be - mu, be + mu
    td(1).le(0, al + be - mu, 1).le(mu, al).le(be + mu, 1)
    td(2).le(-a1 / a2 * _div(C(A), C(B)), b1 / b2, a1 / a2 * _div(S(A), S(B)))
    std(1).le(0, al + be - mu, 1).le(mu, al).le(be + mu, 1)
    std(2).le(-a1 / a2 * _div(C(A), C(B)), b1 / b2,
              a1 / a2 * _div(S(A), S(B)) * _div(C(A), C(B)), a1 / a2 * _div(S(A), S(B)))
    guard().le(al, A).lt(A, 1)


def _id_ddp(m, td, std, guard):
    al, be, _, mu, _, _ = _orders(m)
    (a1, a2), (b1, b2) = m.a, m.b
    A, B = 2 * al + be + mu, mu - be
    td(1).le(1, al + be + mu, 2).le(be, mu, 1 - al)
    td(2).le(a1 / a2 * _div(abs(C(A)), C(B)), b1 / b2)
    std(1).le(1, al + be + mu, 2).le(be, mu, 1 - al)
    std(2).le(a1 / a2 * _div(abs(C(A)), C(B)),
              a1 / a2 * _div(abs(C(A)), C(B)) * _div(S(A), S(B)), b1 / b2)


def _iid_iid(m, td, std, guard):
    al, be, ga, _, _, et = _orders(m)
    (a1, a2, a3), (b1, b2, b3) = m.a, m.b

    def orders(blk):
        blk.lt(be, al).le(ga, et).le(0, be + ga - et, al + 2 * ga - et, 1).le(al + ga, be + et)

    orders(td(1))
    for n, x, ai, bi in ((2, al, a1, b1), (3, be, a2, b2)):
        A, B = x + et, x + 2 * ga - et
        td(n).le(-b3 / bi * _div(C(A), C(B)), a3 / ai, b3 / bi * _div(S(A), S(B)))
    orders(std(1))
    for n, x, ai, bi in ((2, al, a1, b1), (3, be, a2, b2)):
        A, B = x + et, x + 2 * ga - et
        std(n).le(-b3 / bi * _div(C(A), C(B)), a3 / ai,
                  b3 / bi * _div(S(A), S(B)) * _div(C(A), C(B)), b3 / bi * _div(S(A), S(B)))
    guard().lt(be + et, al + et, 1)


def _idd_idd(m, td, std, guard):
    al, be, ga, mu, _, _ = _orders(m)
    (a1, a2, a3), (b1, b2, b3) = m.a, m.b

    def orders(blk):
        blk.le(0, al + ga - mu, 1).lt(be, ga).le(mu, al).le(ga + mu, al + be).le(ga + mu, 1)

    orders(td(1))
    for n, x, ai, bi in ((2, be, a2, b2), (3, ga, a3, b3)):
        A, B = 2 * al + x - mu, x + mu
        td(n).le(-bi / b1 * _div(C(A), C(B)), ai / a1, bi / b1 * _div(S(A), S(B)))
    orders(std(1))
    for n, x, ai, bi in ((2, be, a2, b2), (3, ga, a3, b3)):
        A, B = 2 * al + x - mu, x + mu
        std(n).le(-bi / b1 * _div(C(A), C(B)), ai / a1,
                  bi / b1 * _div(S(A), S(B)) * _div(C(A), C(B)), bi / b1 * _div(S(A), S(B)))
    guard().lt(2 * al + be - mu, 2 * al + ga - mu, 1)


def _iid_idd(m, td, std, guard):
    al, be, ga, mu, nu, _ = _orders(m)
    (a1, a2, a3), (b1, b2, b3) = m.a, m.b
    A, B = 2 * al + ga - mu, ga + mu

    def orders(blk):
        blk.chain([mu, be, al], ["<=", "<"]).le(ga, nu).le(al + be + ga, 1 + mu)
        blk.chain([mu + nu - ga, al, 1 - nu], ["<", "<="])

    orders(td(1))
    td(2).le(-b3 / b1 * _div(C(A), C(B)), a3 / a1, b3 / b1 * _div(S(A), S(B)))
    orders(std(1))
    mid = 2 * al - be - 2 * mu - nu
    g = std(2)
    g.le(0, al - be - ga - mu, mid).le(0, al - 2 * mu - nu, mid)
    g.le(mid, 2 * al - be - mu, A).le(mid, 2 * al + ga - 2 * mu - nu, A).lt(A, 1)
    std(3).le(-b3 / b1 * _div(C(A), C(B)), a3 / a1,
              b3 / b1 * _div(S(A), S(B)) * _div(C(A), C(B)), b3 / b1 * _div(S(A), S(B)))
    gd = guard()
    gd.le(0, al - be - ga - mu, mid).le(0, al - 2 * mu - nu, mid)
    gd.le(mid, 2 * al - be - mu, A).le(mid, 2 * al + ga - 2 * mu - nu, A).lt(A, 1)


def _ipid_ipid(m, td, std, guard):
    al, _, ga, mu, _, _ = _orders(m)
    (a1, a2, a3), (b1, b2, b3) = m.a, m.b
    X, Y = 1 - 3 * al - ga + 2 * mu, 1 + al - ga - 2 * mu
    U, V = 1 + 3 * al + ga - 2 * mu, 1 - al + ga + 2 * mu
    td(1).le(mu, al).le(3 * al + ga - 2 * mu, 1)
    td(2).le(a2 / a1, b2 / b1 * _div(c4(X), c4(Y))).le(a3 / a2, b3 / b2 * _div(s4(U), s4(V)))
    td(3).le(a3 * b1 * C(ga + mu) - a2 * b2 * S(al - mu), a1 * b3 * C(2 * al + ga - mu))
    td(4).le(a1 * b3 * S(2 * al + ga - mu), a2 * b2 * C(al - mu) - a3 * b1 * S(ga + mu))
    std(1).le(mu, al).le(3 * al + ga - 2 * mu, 1)
    std("2.1").le(a2 / a1, b2 / b1 * _div(c4(X), c4(Y)) * _div(s4(X), s4(Y)),
                  b2 / b1 * _div(c4(X), c4(Y)))
    std("2.2").le(a3 / a2, b3 / b2 * _div(s4(U), s4(V)) * _div(c4(U), c4(V)),
                  b3 / b2 * _div(s4(U), s4(V)))
    W = 2 * al + ga - mu
    std(3).le(a3 * b1 * C(ga + mu), a2 * b2 * S(al - mu) + a1 * b3 * C(W))
    std(7).le(a1 * b3 * S(W), a2 * b2 * C(al - mu) - a3 * b1 * S(ga + mu))
    std(8).le(a1 * b3 * S(W), a2 * b2 * C(al - mu) * _div(S(al - mu), C(W))
              + a3 * b1 * S(ga + mu) * _div(C(ga + mu), C(W)))


def _iddp_iddp(m, td, std, guard):
    al, _, ga, _, _, et = _orders(m)
    (a1, a2, a3), (b1, b2, b3) = m.a, m.b
    X, Y = 1 + al - ga + 2 * et, 1 + al + 3 * ga - 2 * et
    U, V = 1 - al + ga - 2 * et, 1 - al - 3 * ga + 2 * et
    P, Q = al + 2 * ga - et, al + et

    def orders(blk):
        blk.le(0, al + ga - et, 1).le(ga, et).le(al - ga + 2 * et, 1)

    orders(td(1))
    td(3).le(a2 / a1, b2 / b1 * _div(s4(X), s4(Y))).le(a3 / a2, b3 / b2 * _div(c4(U), c4(V)))
    td(4).le(a3 * b1 * C(P) - a2 * b2 * S(et - ga), a1 * b3 * C(Q))
    td(5).le(a1 * b3 * S(Q), a2 * b2 * C(et - ga) - a3 * b1 * S(P))
    orders(std(1))
    std(2).le(a2 / a1, b2 / b1 * _div(s4(X), s4(Y)) * _div(c4(X), c4(Y)),
              b2 / b1 * _div(s4(X), s4(Y)))
    std("2a").le(a3 / a2, b3 / b2 * _div(c4(U), c4(V)) * _div(s4(U), s4(V)),
                 b3 / b2 * _div(c4(U), c4(V)))
    std(3).le(a3 * b1 * C(P) - a2 * b2 * S(et - ga), a1 * b3 * C(Q))
    std(4).le(a1 * b3 * S(Q), a2 * b2 * C(et - ga) - a3 * b1 * S(P))
    std(5).le(a1 * b3 * S(Q), a2 * b2 * C(et - ga) * _div(S(et - ga), C(Q))
              + a3 * b1 * S(P) * _div(C(P), C(Q)))


def _ipid_iddp(m, td, std, guard):
    al, _, ga, _, _, et = _orders(m)
    (a1, a2, a3), (b1, b2, b3) = m.a, m.b
    X, Y = 1 + al - ga + 2 * et, 1 - al - 3 * ga + 2 * et
    P, Q = al + 2 * ga - et, al + et
    td(1).le(et, ga).le(al + 3 * ga - 2 * et, 1)
    td(2).le(a1 / b1 * _div(s4(X), c4(Y)), a2 / b2, a3 / b3 * _div(c4(Y), s4(X)))
    td(3).le(a1 * b3 * C(Q) - a2 * b2 * S(ga - et), a3 * b1 * C(P))
    td(4).le(a3 * b1 * S(P), a2 * b2 * C(ga - et) - a1 * b3 * S(Q))
    std(1).le(et, ga).le(al + 3 * ga - 2 * et, 1)
    std(2).le(a1 / b1 * _div(s4(X), c4(Y)),
              a1 / b1 * _div(s4(X), c4(Y)) * _div(c4(X), s4(Y)), a2 / b2)
    std("2a").le(a2 / b2, a3 / b3 * _div(c4(Y), s4(X)) * _div(s4(Y), c4(X)),
                 a3 / b3 * _div(c4(Y), s4(X)))
    std(3).le(a1 * b3 * C(Q) - a2 * b2 * S(ga - et), a3 * b1 * C(P))
    std(4).le(a3 * b1 * S(P), a2 * b2 * C(ga - et) - a1 * b3 * S(Q))
    std(5).le(a3 * b1 * S(P), a2 * b2 * C(ga - et) * _div(S(ga - et), C(P))
              + a1 * b3 * S(Q) * _div(C(Q), C(P)))


def _iid_id(m, td, std, guard):
    al, be, ga, _, nu, _ = _orders(m)
    (a1, a2, a3), (b1, b2) = m.a, m.b
    A, B = al + 2 * be - ga, al + ga

    def orders(blk):
        blk.chain([0, al, nu, al + be - ga, 1], ["<=", "<=", "<", "<="]).le(be + nu, 1)

    orders(td(1))
    td(2).le(-a1 / a3 * _div(C(A), C(B)), b1 / b2, a1 / a3 * _div(S(A), S(B)))
    orders(std(1))
    std(2).le(b1 / b2, a1 / a3 * _div(S(A), S(B)) * _div(C(A), C(B)), a1 / a3 * _div(S(A), S(B)))
    guard().lt(A, 1)


def _idd_ddp(m, td, std, guard):
    al, be, ga, mu, _, _ = _orders(m)
    ga = mu if ga is None else ga
    (a1, a2, a3), (b1, b2) = m.a, m.b
    A, B = 2 * al + be + mu, mu - be

    def orders(blk):
        blk.le(1, al + be + mu, 2).lt(be, ga).le(ga, mu, 1 - al)

    orders(td(1))
    td(2).le(a1 / a2 * _div(abs(C(A)), C(B)), b1 / b2)
    orders(std(1))
    std(2).le(a1 / a2 * _div(abs(C(A)), C(B)),
              a1 / a2 * _div(abs(C(A)), C(B)) * _div(S(A), S(B)), b1 / b2)


def _ipid_id(m, td, std, guard):
    al, be, _, _, nu, _ = _orders(m)
    (a1, a2, a3), (b1, b2) = m.a, m.b
    A, B = al + 2 * be + nu, nu - al
    P, Q = be + nu, 2 * al + be - nu

    def orders(blk):
        blk.le(0, al + be - nu, 1).le(1, al + be + nu, 2).le(al, nu, 1 - be)

    orders(td(1))
    td(2).le(a1 / a2 * _div(abs(C(A)), C(B)), b1 / b2, a2 / a3 * _div(S(P), S(Q)))
    orders(std(1))
    std(2).le(a1 / a2 * _div(abs(C(A)), C(B)),
              a1 / a2 * _div(abs(C(A)), C(B)) * _div(S(A), S(B)), b1 / b2)
    std(3).le(b1 / b2, a2 / a3 * _div(S(P), S(Q)) * _div(C(P), C(Q)), a2 / a3 * _div(S(P), S(Q)))


def _iddp_ddp(m, td, std, guard):
    al, be, _, mu, _, _ = _orders(m)
    (a1, a2, a3), (b1, b2) = m.a, m.b
    A, B = 2 * al + be + mu, mu - be
    P, Q = al + mu, al + 2 * be - mu

    def orders(blk):
        blk.le(1, al + 2 * be, 2).le(1, al + be + mu, 2).le(be, mu, 1 - al)

    orders(td(1))
    td(2).le(a1 / a2 * _div(abs(C(A)), C(B)), b1 / b2, a2 / a3 * _div(S(P), S(Q)))
    orders(std(1))
    std(2).le(a1 / a2 * _div(abs(C(A)), C(B)),
              a1 / a2 * _div(abs(C(A)), C(B)) * _div(S(A), S(B)), b1 / b2)
    std(3).le(b1 / b2, a2 / a3 * _div(S(P), S(Q)) * _div(C(P), C(Q)), a2 / a3 * _div(S(P), S(Q)))
    guard().lt(Q, 1)


def _id_idd(m, td, std, guard):
    al, be, _, mu, nu, _ = _orders(m)
    (a1, a2), (b1, b2, b3) = m.a, m.b
    A, B = 2 * mu + nu - al, al + nu

    def orders(blk):
        blk.chain([0, nu, be, mu + nu - al, 1], ["<=", "<=", "<", "<="]).le(al, mu, 1 - be)

    orders(td(1))
    td(2).le(-a1 / a2 * _div(C(A), C(B)), b1 / b3, a1 / a2 * _div(S(A), S(B)))
    orders(std(1))
    std(2).le(-a1 / a2 * _div(C(A), C(B)), b1 / b3,
              a1 / a2 * _div(S(A), S(B)) * _div(C(A), C(B)), a1 / a2 * _div(S(A), S(B)))
    guard().lt(A, 1)


def _id_dddp(m, td, std, guard):
    al, be, _, mu, nu, _ = _orders(m)
    (a1, a2), (b1, b2, b3) = m.a, m.b
    A, B = 2 * al + be + nu, nu - be

    def orders(blk):
        blk.le(1, al + be + nu, 2).chain([be, mu, nu, 1 - al], ["<=", "<", "<="])

    orders(td(1))
    td(2).le(a1 / a2 * _div(abs(C(A)), C(B)), b2 / b3)
    orders(std(1))
    std(2).le(a1 / a2 * _div(abs(C(A)), C(B)),
              a1 / a2 * _div(abs(C(A)), C(B)) * _div(S(A), S(B)), b2 / b3)


def _id_iddp(m, td, std, guard):
    al, be, _, _, nu, _ = _orders(m)
    (a1, a2), (b1, b2, b3) = m.a, m.b
    P, Q = al + 2 * be - nu, al + nu
    A, B = 2 * al + be + nu, nu - be

    def orders(blk):
        blk.le(0, al + be - nu, 1).le(1, al + be + nu, 2).le(be, nu, 1 - al)

    orders(td(1))
    td(2).le(b1 / b2 * _div(S(P), S(Q)), a1 / a2, b2 / b3 * _div(C(B), abs(C(A))))
    orders(std(1))
    std(2).le(b1 / b2 * _div(S(P), S(Q)), b1 / b2 * _div(S(P), S(Q)) * _div(C(P), C(Q)), a1 / a2)
    std(3).le(a1 / a2, b2 / b3 * _div(C(B), abs(C(A))) * _div(S(B), S(A)),
              b2 / b3 * _div(C(B), abs(C(A))))


_RESTRICTIONS: dict[str, Callable] = {
    "ID.ID": _id_id, "ID.DD+": _id_ddp, "IID.IID": _iid_iid, "IDD.IDD": _idd_idd,
    "IID.IDD": _iid_idd, "I+ID.I+ID": _ipid_ipid, "IDD+.IDD+": _iddp_iddp,
    "I+ID.IDD+": _ipid_iddp, "IID.ID": _iid_id, "IDD.DD+": _idd_ddp, "I+ID.ID": _ipid_id,
    "IDD+.DD+": _iddp_ddp, "ID.IDD": _id_idd, "ID.DDD+": _id_dddp, "ID.IDD+": _id_iddp,
}


def _collect(m: ModelSpec):
    td_out, std_out, guard_out = [], [], []
    _RESTRICTIONS[m.code](
        m,
        lambda n: _Block(f"TD-{m.code}-{n}", td_out),
        lambda n: _Block(f"STD-{m.code}-{n}", std_out),
        lambda: _Block(f"GUARD-{m.code}", guard_out),
    )
    return td_out, std_out, guard_out


def check_thermo(m: ModelSpec) -> ConstraintReport:
    """Evaluate the thermodynamical restrictions of the model."""
    td, _, _ = _collect(m)
    ok = all(r.satisfied for r in td)
    return ConstraintReport(m.code, td, THERMO_ONLY if ok else THERMO_FAIL)


def check_narrowed(m: ModelSpec) -> ConstraintReport:
    """Evaluate the narrowed restrictions on top of the thermodynamical ones."""
    td, std, guard = _collect(m)
    results = td + std
    if not all(r.satisfied for r in td):
        return ConstraintReport(m.code, results, THERMO_FAIL)
    failed_guard = [g for g in guard if not g.satisfied]
    if failed_guard:
        return ConstraintReport(m.code, results + guard, NOT_GUARANTEEABLE, failed_guard)
    overall = NARROWED_OK if all(r.satisfied for r in std) else THERMO_ONLY
    return ConstraintReport(m.code, results + guard, overall)


# --- K(rho) -------------------------------------------------------------------------


def K_generic(m: ModelSpec, rho):
    """sum_{i,j} a_i b_j rho^(p_i+q_j) sin((xi + q_j - p_i) pi)."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros(rho.shape)
    for ai, pi in m.phi_sigma.terms:
        for bj, qj in m.phi_epsilon.terms:
            out = out + ai * bj * rho ** (pi + qj) * math.sin((m.xi + qj - pi) * math.pi)
    return out if out.ndim else float(out)


def _K_magnitude(m: ModelSpec, rho: np.ndarray) -> np.ndarray:
    """sum_{i,j} a_i b_j rho^(p_i+q_j): the size of the summands in K_generic."""
    out = np.zeros(rho.shape)
    for ai, pi in m.phi_sigma.terms:
        for bj, qj in m.phi_epsilon.terms:
            out = out + ai * bj * rho ** (pi + qj)
    return out


def _K_terms(m: ModelSpec) -> list[tuple[float, float, float]]:
    """Closed-form K as (coefficient, exponent, sine value) triples, one per printed term."""
    al, be, ga, mu, nu, et = _orders(m)
    a, b = m.a, m.b
    code = m.code
    if code == "ID.ID":
        h = al + be
        return [(a[0] * b[0], 0, sn(al - mu)), (a[0] * b[1], h, sn(2 * al + be - mu)),
                (-a[1] * b[0], h, sn(be + mu)), (a[1] * b[1], 2 * h, sn(al - mu))]
    if code == "ID.DD+":
        h = al + be
        return [(a[0] * b[0], 0, sn(al + mu)), (a[0] * b[1], h, sn(2 * al + be + mu)),
                (a[1] * b[0], h, sn(mu - be)), (a[1] * b[1], 2 * h, sn(al + mu))]
    if code == "IID.IID":
        return [(a[0] * b[0], 0, sn(et - ga)),
                (a[0] * b[1], al - be, sn(al + et - be - ga)),
                (a[0] * b[2], al + ga, sn(al + et)),
                (a[1] * b[0], al - be, sn(be + et - al - ga)),
                (a[1] * b[1], 2 * (al - be), sn(et - ga)),
                (a[1] * b[2], 2 * al - be + ga, sn(be + et)),
                (-a[2] * b[0], al + ga, sn(al + 2 * ga - et)),
                (-a[2] * b[1], 2 * al - be + ga, sn(be + 2 * ga - et)),
                (a[2] * b[2], 2 * (al + ga), sn(et - ga))]
    if code == "IDD.IDD":
        return [(a[0] * b[0], 0, sn(al - mu)),
                (a[0] * b[1], al + be, sn(2 * al + be - mu)),
                (a[0] * b[2], al + ga, sn(2 * al + ga - mu)),
                (-a[1] * b[0], al + be, sn(be + mu)),
                (a[1] * b[1], 2 * (al + be), sn(al - mu)),
                (a[1] * b[2], 2 * al + be + ga, sn(al + ga - be - mu)),
                (-a[2] * b[0], al + ga, sn(ga + mu)),
                (a[2] * b[1], 2 * al + be + ga, sn(al + be - ga - mu)),
                (a[2] * b[2], 2 * (al + ga), sn(al - mu))]
    if code == "IID.IDD":
        return [(a[0] * b[0], 0, sn(al - mu)),
                (a[0] * b[1], al - be, sn(2 * al - be - mu)),
                (a[0] * b[2], al + ga, sn(2 * al + ga - mu)),
                (a[1] * b[0], mu + nu, sn(al - 2 * mu - nu)),
                (a[1] * b[1], al - be + mu + nu, sn(2 * al - be - 2 * mu - nu)),
                (a[1] * b[2], al + ga + mu + nu, sn(2 * al + ga - 2 * mu - nu)),
                (-a[2] * b[0], al + ga, sn(mu + ga)),
                (a[2] * b[1], 2 * al - be + ga, sn(al - be - ga - mu)),
                (a[2] * b[2], 2 * (al + ga), sn(al - mu))]
    if code in ("I+ID.I+ID", "IDD+.IDD+", "I+ID.IDD+"):
        h = (1 + al + ga) / 2
        if code == "I+ID.I+ID":
            U, V = 1 + 3 * al + ga - 2 * mu, 1 - al + ga + 2 * mu
            return [(a[0] * b[0], 0, sn(al - mu)), (a[0] * b[1], h, S(U)),
                    (a[0] * b[2], 2 * h, sn(1 + 2 * al + ga - mu)),
                    (-a[1] * b[0], h, S(V)), (a[1] * b[1], 2 * h, sn(al - mu)),
                    (a[1] * b[2], 3 * h, S(U)), (-a[2] * b[0], 2 * h, sn(1 + ga + mu)),
                    (-a[2] * b[1], 3 * h, S(V)), (a[2] * b[2], 4 * h, sn(al - mu))]
        if code == "IDD+.IDD+":
            X, Y = 1 + al - ga + 2 * et, 1 + al + 3 * ga - 2 * et
            return [(a[0] * b[0], 0, sn(et - ga)), (a[0] * b[1], h, S(X)),
                    (-a[0] * b[2], 2 * h, sn(al + et)),
                    (-a[1] * b[0], h, S(Y)), (a[1] * b[1], 2 * h, sn(et - ga)),
                    (a[1] * b[2], 3 * h, S(1 + al + 2 * et - ga)),
                    (a[2] * b[0], 2 * h, sn(al + 2 * ga - et)),
                    (-a[2] * b[1], 3 * h, S(Y)), (a[2] * b[2], 4 * h, sn(et - ga))]
        X, Y = 1 + al - ga + 2 * et, 1 - al - 3 * ga + 2 * et
        return [(a[0] * b[0], 0, sn(ga - et)), (-a[0] * b[1], h, S(X)),
                (a[0] * b[2], 2 * h, sn(al + et)),
                (a[1] * b[0], h, S(Y)), (a[1] * b[1], 2 * h, sn(ga - et)),
                (-a[1] * b[2], 3 * h, S(X)), (-a[2] * b[0], 2 * h, sn(al + 2 * ga - et)),
                (a[2] * b[1], 3 * h, S(Y)), (a[2] * b[2], 4 * h, sn(ga - et))]
    if code == "IID.ID":
        h = al + be
        return [(a[0] * b[0], 0, sn(be - ga)), (a[0] * b[1], h, sn(al + 2 * be - ga)),
                (a[1] * b[0], h - ga - nu, sn(nu - al)),
                (a[1] * b[1], 2 * h - ga - nu, sn(be + nu)),
                (-a[2] * b[0], h, sn(al + ga)), (a[2] * b[1], 2 * h, sn(be - ga))]
    if code == "IDD.DD+":
        h = al + be
        return [(a[0] * b[0], 0, sn(al + mu)), (a[0] * b[1], h, sn(2 * al + be + mu)),
                (a[1] * b[0], h, sn(mu - be)), (a[1] * b[1], 2 * h, sn(al + mu)),
                (a[2] * b[1], 2 * al + be + mu, sn(al + be))]
    if code == "I+ID.ID":
        h = al + be
        return [(a[0] * b[0], 0, sn(be + nu)), (a[0] * b[1], h, sn(al + 2 * be + nu)),
                (a[1] * b[0], h, sn(nu - al)), (a[1] * b[1], 2 * h, sn(be + nu)),
                (-a[2] * b[0], 2 * h, sn(2 * al + be - nu)), (a[2] * b[1], 3 * h, sn(nu - al))]
    if code == "IDD+.DD+":
        h = al + be
        return [(a[0] * b[0], 0, sn(al + mu)), (a[0] * b[1], h, sn(2 * al + be + mu)),
                (a[1] * b[0], h, sn(mu - be)), (a[1] * b[1], 2 * h, sn(al + mu)),
                (-a[2] * b[0], 2 * h, sn(al + 2 * be - mu)), (a[2] * b[1], 3 * h, sn(mu - be))]
    if code == "ID.IDD":
        return [(a[0] * b[0], 0, sn(mu - al)), (a[0] * b[1], al + be, sn(be + mu)),
                (a[0] * b[2], mu + nu, sn(2 * mu + nu - al)),
                (-a[1] * b[0], mu + nu, sn(al + nu)),
                (a[1] * b[1], al + be + mu + nu, sn(be - nu)),
                (a[1] * b[2], 2 * (mu + nu), sn(mu - al))]
    if code == "ID.DDD+":
        return [(a[0] * b[0], 0, sn(al + mu)), (a[0] * b[1], nu - mu, sn(al + nu)),
                (a[0] * b[2], al + be + nu - mu, sn(2 * al + be + nu)),
                (a[1] * b[0], al + be, sn(mu - be)),
                (a[1] * b[1], al + be + nu - mu, sn(nu - be)),
                (a[1] * b[2], 2 * al + 2 * be + nu - mu, sn(al + nu))]
    if code == "ID.IDD+":
        h = al + be
        return [(a[0] * b[0], 0, sn(nu - be)), (a[0] * b[1], h, sn(al + nu)),
                (a[0] * b[2], 2 * h, sn(2 * al + be + nu)),
                (-a[1] * b[0], h, sn(al + 2 * be - nu)), (a[1] * b[1], 2 * h, sn(nu - be)),
                (a[1] * b[2], 3 * h, sn(al + nu))]
    raise KeyError(code)


def K_closed_form(m: ModelSpec, rho):
    """The per-model sine-weighted power polynomial for K(rho)."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros(rho.shape)
    for coef, p, s in _K_terms(m):
        out = out + coef * s * rho**p
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ScanResult:
    nonnegative: bool
    first_violation: tuple[float, float] | None


def K_nonneg_scan(m: ModelSpec, lo: float = 1e-6, hi: float = 1e6,
                  per_decade: int = 20) -> ScanResult:
    """Sample K on a log grid; report the smallest rho where K is negative beyond rounding.

    The rounding allowance is 1e-12 times the summed magnitude of the terms of K at
    that rho: K spans many decades over the grid, so one global allowance taken from
    max|K| would hide every violation at moderate rho.
    """
    if lo > 1e-6 or hi < 1e6 or per_decade < 10:
        raise ValueError("the scan grid must cover [1e-6, 1e6] with at least 10 points per decade")
    n = int(round(math.log10(hi / lo) * per_decade)) + 1
    rho = np.logspace(math.log10(lo), math.log10(hi), n)
    k = K_generic(m, rho)
    eps = 1e-12 * _K_magnitude(m, rho)
    bad = np.nonzero(k < -eps)[0]
    if bad.size:
        i = bad[0]
        return ScanResult(False, (float(rho[i]), float(k[i])))
    return ScanResult(True, None)
