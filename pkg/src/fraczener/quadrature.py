"""Semi-infinite quadrature, principal values and a Bromwich inversion oracle.

The integrals met in the branch-cut representations have the form
int_0^inf f(rho) d rho with an algebraic endpoint singularity at rho = 0 and
either exponential damping e^{-rho t} or an algebraically decaying tail.
QUADPACK (through scipy.integrate.quad) does the panel work; this module
decides where the panels go.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import mpmath
import numpy as np
from scipy import integrate

from .errors import ContourFailure, NotConverged, PoleOnBoundary


@dataclass(frozen=True)
class QuadSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    # e^{-rho t} below exp(-tail_exponent) is dropped
    tail_exponent: float = 690.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be at least 10")


DEFAULT_SPEC = QuadSpec()

# undamped integrands are panelled out to FAR_TAIL times the split point before the
# remaining tail goes to QUADPACK's infinite-range rule
FAR_TAIL = 2.0**80


class QuadResult(NamedTuple):
    value: float
    err: float
    converged: bool


def _quad(f, a, b, spec: QuadSpec, n_panels: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = integrate.quad(f, a, b, epsabs=spec.abs_tol / max(n_panels, 1),
                             epsrel=spec.rel_tol, limit=spec.max_subdivisions,
                             full_output=1)
    value, err = out[0], out[1]
    # a fourth element (message) is only returned when QUADPACK flags a problem
    return value, err, len(out) == 3


def _edges(lo_cut: float, split: float, hi: float, breakpoints: Iterable[float],
           far: float | None = None, start: float = 0.0) -> list[float]:
    edges = {start}
    e = split
    while e > max(lo_cut, start):
        edges.add(e)
        e *= 0.25
    # a positive start leaves mixed powers of rho in between: coarser panels down to it
    while e > start > 0.0:
        edges.add(e)
        e *= 1.0 / 16.0
    e = split
    while e < hi:
        edges.add(e)
        e *= 2.0
    edges.add(hi)
    if far is not None:
        # slowly decaying tails: coarser geometric panels well past hi
        e = hi
        while e < far:
            e = min(4.0 * e, far)
            edges.add(e)
        hi = far
    for p in breakpoints:
        if start < p < hi and math.isfinite(p):
            edges.add(float(p))
    return sorted(e for e in edges if start <= e <= hi)


def _quad_vec(f, a, b, spec: QuadSpec, n_panels: int):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        value, err, info = integrate.quad_vec(f, a, b, epsabs=spec.abs_tol / max(n_panels, 1),
                                              epsrel=spec.rel_tol, norm="max",
                                              limit=spec.max_subdivisions, full_output=True)
    return np.asarray(value, dtype=float), float(err), bool(info.success)


def _sum(parts, vector: bool):
    if vector:
        return np.sum(np.array(parts), axis=0) if parts else 0.0
    return math.fsum(parts)


def _integrate_edges(f, edges, spec, tail_to_inf: bool, vector: bool = False) -> QuadResult:
    quad = _quad_vec if vector else _quad
    total, err, ok = [], 0.0, True
    n = len(edges)
    for a, b in zip(edges, edges[1:]):
        if b <= a:
            continue
        v, e, good = quad(f, a, b, spec, n)
        total.append(v)
        err += e
        ok &= good
    growing = tail_to_inf and _tail_growing(total, spec)
    # vector families stop at the last edge: their panels already reach FAR_TAIL times
    # the split point, and the infinite-range map would push rho into overflow
    if tail_to_inf and not vector:
        v, e, good = quad(f, edges[-1], np.inf, spec, n)
        total.append(v)
        err += e
        ok &= good
    value = _sum(total, vector)
    scale = float(np.max(np.abs(value))) if vector else abs(value)
    ok = (ok or err <= max(spec.rel_tol * scale, spec.abs_tol)) and not growing
    return QuadResult(value, err, ok)


def _tail_growing(parts, spec: QuadSpec) -> bool:
    """True when the last far-tail panels (each 4x wider than the one before) do not shrink.

    For f ~ rho^-p a panel [e, 4e] carries ~ e^(1-p), so growth means p <= 1 and the
    integral diverges however small QUADPACK's per-panel error is.
    """
    if len(parts) < 3:
        return False
    mags = [float(np.max(np.abs(v))) for v in parts[-2:]]
    scale = float(np.max(np.abs(_sum(parts, isinstance(parts[0], np.ndarray)))))
    return mags[1] >= mags[0] and mags[1] > max(spec.rel_tol * scale, spec.abs_tol)


def integrate_semi_infinite(f: Callable[[float], float], t: float = 0.0,
                            spec: QuadSpec = DEFAULT_SPEC, *, damped: bool = True,
                            breakpoints: Iterable[float] = (), strict: bool = False,
                            vector: bool = False, lower: float = 0.0,
                            upper: float | None = None) -> QuadResult:
    """int_lower^upper f(rho) d rho, by default over (0, inf).

    With ``damped`` and t > 0 the integrand is assumed to carry e^{-rho t}; the
    range is cut where that factor drops below exp(-spec.tail_exponent).
    Otherwise the tail is integrated to infinity and must decay faster than 1/rho.
    Panels shrink geometrically (ratio 1/4) toward rho = 0 from the split point
    1/t and grow geometrically (ratio 2) above it; ``breakpoints`` adds panel
    edges at known features such as near-poles. ``lower`` and ``upper`` let the
    caller handle the ends of the range in closed form.
    """
    split = 1.0 / t if t > 0 else 1.0
    lo_cut = 1e-15 * split
    if upper is not None:
        hi = upper
        if damped and t > 0:
            hi = min(hi, spec.tail_exponent / t)
        if not hi > lower:
            return QuadResult(0.0, 0.0, True)
        split = min(max(split, lower), hi)
        near = min(hi, split * 2.0**20)
        res = _integrate_edges(f, _edges(lo_cut, split, near, breakpoints,
                                         hi if hi > near else None, start=lower),
                               spec, False, vector)
    elif damped and t > 0:
        hi = max(spec.tail_exponent / t, 2.0 * lower)
        split = max(split, lower)
        res = _integrate_edges(f, _edges(lo_cut, split, hi, breakpoints, start=lower), spec,
                               False, vector)
    else:
        split = max(split, lower)
        hi = split * 2.0**20
        res = _integrate_edges(f, _edges(lo_cut, split, hi, breakpoints, FAR_TAIL * split,
                                         start=lower), spec, True, vector)
    if strict and not res.converged:
        exc = NotConverged(f"quadrature error estimate {res.err:.3g} above tolerance")
        exc.result = res
        raise exc
    return res


def integrate_principal_value(f: Callable[[float], float], pole: float, t: float = 0.0,
                              spec: QuadSpec = DEFAULT_SPEC, *, damped: bool = True,
                              breakpoints: Iterable[float] = (), strict: bool = False,
                              upper: float | None = None, vector: bool = False,
                              lower: float = 0.0) -> QuadResult:
    """Symmetric-exclusion principal value of int_lower^inf f with a simple pole at ``pole``.

    Inside [pole-h, pole+h] the reflected points are paired,
    int_0^h [f(pole+u) + f(pole-u)] du, so the 1/(rho-pole) parts cancel
    before they reach the integrator. ``upper`` turns the range into [lower, upper];
    the pairing then covers the widest window that fits, so an integrand odd about
    the pole on a symmetric range cancels to rounding rather than to rel_tol.
    """
    if not (pole > lower and math.isfinite(pole)):
        raise PoleOnBoundary(f"pole {pole} is not strictly inside the range")
    if upper is not None and not pole < upper:
        raise PoleOnBoundary(f"pole {pole} is not strictly inside [0, {upper}]")
    h = 0.5 * (pole - lower)
    if upper is not None:
        h = min(pole - lower, upper - pole)
    paired = lambda u: f(pole + u) + f(pole - u)  # noqa: E731
    vp, ep, okp = (_quad_vec if vector else _quad)(paired, 0.0, h, spec, 4)
    if pole - h > lower:
        lo_edges = _edges(1e-15 * (pole - h), pole - h, pole - h, breakpoints, start=lower)
        left = _integrate_edges(f, lo_edges, spec, False, vector)
    else:
        left = QuadResult(np.zeros_like(vp) if vector else 0.0, 0.0, True)
    bps = [p for p in breakpoints if p > pole + h]
    if upper is not None:
        split = max(pole + h, 1.0 / t if t > 0 else 1.0)
        hi = upper
        if damped and t > 0:
            hi = min(upper, max(spec.tail_exponent / t, 2 * split))
        split = min(split, hi)
        near = min(hi, split * 2.0**20)
        edges = _edges(pole + h, split, near, bps, hi if hi > near else None, start=pole + h)
        right = _integrate_edges(f, edges, spec, False, vector)
    else:
        split = max(pole + h, 1.0 / t if t > 0 else 1.0)
        if damped and t > 0:
            hi = max(spec.tail_exponent / t, 2 * split)
            edges = [pole + h] + [e for e in _edges(pole + h, split, hi, bps) if e > pole + h]
            right = _integrate_edges(f, edges, spec, False, vector)
        else:
            hi = split * 2.0**20
            edges = [pole + h] + [e for e in _edges(pole + h, split, hi, bps, FAR_TAIL * split)
                                  if e > pole + h]
            right = _integrate_edges(f, edges, spec, True, vector)
    value = _sum([left.value, vp, right.value], vector)
    err = left.err + ep + right.err
    scale = float(np.max(np.abs(value))) if vector else abs(value)
    ok = (left.converged and okp and right.converged) or err <= max(spec.rel_tol * scale, spec.abs_tol)
    res = QuadResult(value, err, ok)
    if strict and not ok:
        exc = NotConverged(f"principal value error estimate {err:.3g} above tolerance")
        exc.result = res
        raise exc
    return res


TALBOT_NODES = 64
ORACLE_DIGITS = 40


def bromwich_oracle(F: Callable, t: float, M: int = TALBOT_NODES, dps: int = ORACLE_DIGITS) -> float:
    """Fixed-Talbot inversion f(t) of a Laplace transform F.

    Contour s(theta) = r theta (cot theta + i), r = 2M/(5t), with M nodes
    (Abate and Valko). The node weights grow like e^{rt}, so the sum is
    formed in ``dps``-digit arithmetic; F is called with mpmath numbers and
    falls back to Python complex if it cannot take them.
    """
    if not t > 0:
        raise ContourFailure("the oracle needs t > 0")
    with mpmath.workdps(dps):
        tm = mpmath.mpf(t)
        r = mpmath.mpf(2 * M) / (5 * tm)

        def call(s):
            try:
                v = F(s)
                v = mpmath.mpc(v)
            except (TypeError, AttributeError, ValueError):
                v = mpmath.mpc(complex(F(complex(s))))
            if not (mpmath.isfinite(v.real) and mpmath.isfinite(v.imag)):
                raise ContourFailure(f"F is not finite at s={complex(s)}")
            return v

        total = mpmath.mpf(0.5) * mpmath.re(call(r) * mpmath.exp(r * tm))
        for k in range(1, M):
            theta = k * mpmath.pi / M
            cot = mpmath.cot(theta)
            s = r * theta * (cot + 1j)
            sigma = theta + (theta * cot - 1) * cot
            total += mpmath.re(mpmath.exp(tm * s) * call(s) * (1 + 1j * sigma))
        return float(r / M * total)
