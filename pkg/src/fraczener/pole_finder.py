"""Zeros of constitutive power sums on the principal Riemann sheet.

A sum whose exponents all lie in [0, 1) has no zeros. With a top exponent
in (1, 2) there is at most one zero in the upper-left quarter plane (plus
its conjugate); it may also sit exactly on the negative real axis, where
it becomes a simple real pole of the response function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DegenerateGap, UnsupportedShape
from .model_catalog import PowerSeries, power_sum_derivative

NO_POLES = "none"
REAL_POLE = "rp"
COMPLEX_PAIR = "ccp"

RP_TOL = 1e-6
VERIFY_TOL = 1e-9
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 200


@dataclass(frozen=True)
class PoleClassification:
    kind: str
    rho: float | None = None
    phi: float | None = None
    residual: float = 0.0

    @property
    def s(self) -> complex | None:
        if self.kind == NO_POLES:
            return None
        return cmath.rect(self.rho, self.phi)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "rho": self.rho,
                "phi_over_pi": None if self.phi is None else self.phi / math.pi,
                "residual": self.residual}


def _polar(f: PowerSeries, rho: float, phi: float) -> complex:
    return sum(c * rho**p * cmath.exp(1j * p * phi) for c, p in f.terms)


def _scale(f: PowerSeries, rho: float) -> float:
    return sum(abs(c) * rho**p for c, p in f.terms)


def classify_two_term(a: float, b: float, p: float) -> PoleClassification:
    """Zeros of a s^p + b."""
    if p < 1.0:
        return PoleClassification(NO_POLES)
    rho = (b / a) ** (1.0 / p)
    if p == 1.0:
        return PoleClassification(REAL_POLE, rho, math.pi, 0.0)
    phi = math.pi / p
    res = abs(b + a * rho**p * cmath.exp(1j * p * phi))
    return PoleClassification(COMPLEX_PAIR, rho, phi, res)


def classify_quadratic(a: float, b: float, c: float, xi: float,
                       rp_tol: float = RP_TOL) -> PoleClassification:
    """Zeros of a s^(2 xi) + b s^xi + c, read off from the roots of a w^2 + b w + c."""
    if xi <= 0.5:
        return PoleClassification(NO_POLES)
    if 2.0 * math.sqrt(a * c) / b <= 1.0:
        return PoleClassification(NO_POLES)
    d = math.sqrt(4.0 * a * c / b**2 - 1.0)
    tan = math.tan(xi * math.pi)
    rho = (c / a) ** (1.0 / (2.0 * xi))
    f = PowerSeries([(c, 0.0), (b, xi), (a, 2.0 * xi)])
    if abs(tan + d) <= rp_tol * max(1.0, abs(tan)):
        return PoleClassification(REAL_POLE, rho, math.pi, abs(_polar(f, rho, math.pi)))
    if tan < -d:
        return PoleClassification(NO_POLES)
    phi = (1.0 - math.atan(d) / math.pi) * math.pi / xi
    return PoleClassification(COMPLEX_PAIR, rho, phi, abs(_polar(f, rho, phi)))


def _newton(f: PowerSeries, rho0: float, phi0: float) -> tuple[float, float, float] | None:
    """Damped Newton iteration in w = log s; returns (rho, phi, |f|) or None."""
    df = power_sum_derivative(f)
    w = complex(math.log(rho0), phi0)
    for _ in range(NEWTON_MAX_ITER):
        rho, phi = math.exp(w.real), w.imag
        val = _polar(f, rho, phi)
        if abs(val) < NEWTON_TOL * _scale(f, rho):
            return rho, phi, abs(val)
        deriv = cmath.rect(rho, phi) * _polar(df, rho, phi)
        if deriv == 0:
            return None
        step = val / deriv
        lam = 1.0
        while lam > 1e-6:
            wn = w - lam * step
            if 0.0 < wn.imag <= math.pi and abs(_polar(f, math.exp(wn.real), wn.imag)) < abs(val):
                break
            lam *= 0.5
        else:
            return None
        w = wn
    rho, phi = math.exp(w.real), w.imag
    val = abs(_polar(f, rho, phi))
    return (rho, phi, val) if val < VERIFY_TOL * _scale(f, rho) else None


def classify_three_term(a: float, b: float, c: float, p: float, q: float,
                        rp_tol: float = RP_TOL) -> PoleClassification:
    """Zeros of a s^p + b s^q + c with 0 < q < 1 < p < 2.

    On the upper edge of the cut the imaginary part a rho^p sin(p pi) + b rho^q sin(q pi)
    vanishes only at rho*; the sign of the real part there decides the case.
    """
    if p - q < 1e-9:
        raise DegenerateGap(f"exponents p={p} and q={q} are too close")
    if p <= 1.0:
        return PoleClassification(NO_POLES)
    f = PowerSeries([(c, 0.0), (b, q), (a, p)])
    rho_s = (b * math.sin(q * math.pi) / (a * math.sin((p - 1.0) * math.pi))) ** (1.0 / (p - q))
    re = a * rho_s**p * math.cos(p * math.pi) + b * rho_s**q * math.cos(q * math.pi) + c
    if abs(re) <= rp_tol * _scale(f, rho_s):
        return PoleClassification(REAL_POLE, rho_s, math.pi, abs(_polar(f, rho_s, math.pi)))
    if re < 0:
        return PoleClassification(NO_POLES)
    seeds = [(rho_s, math.pi * (1.0 - 0.1 * (p - 1.0))), (rho_s, math.pi / p),
             ((c / a) ** (1.0 / p), math.pi / p), (rho_s, 0.75 * math.pi),
             ((c / b) ** (1.0 / q), 0.9 * math.pi)]
    for r0, p0 in seeds:
        out = _newton(f, r0, p0)
        if out is not None and math.pi / 2 < out[1] < math.pi:
            return PoleClassification(COMPLEX_PAIR, out[0], out[1], out[2])
    raise UnsupportedShape("complex zero exists but the locator did not converge")


def classify(f: PowerSeries, rp_tol: float = RP_TOL) -> PoleClassification:
    """Dispatch on the exponent pattern of a constitutive power sum."""
    terms = f.terms
    if not terms:
        raise UnsupportedShape("empty power sum")
    if terms[0][1] != 0.0 and len(terms) > 1:
        raise UnsupportedShape("the lowest exponent must be 0")
    exps = [p for _, p in terms]
    top = exps[-1]
    if top < 1.0 or len(terms) == 1:
        return PoleClassification(NO_POLES)
    if len(terms) == 2:
        out = classify_two_term(terms[1][0], terms[0][0], top)
    elif len(terms) == 3:
        (c, _), (b, q), (a, p) = terms
        if q > 1.0:
            raise UnsupportedShape(f"two exponents above 1 ({q}, {p}) are not covered")
        if top == 1.0:
            # every term has argument in [0, pi) off the cut and Im > 0 on it
            return PoleClassification(NO_POLES)
        if abs(p - 2.0 * q) <= 1e-12 * p:
            out = classify_quadratic(a, b, c, q, rp_tol)
        else:
            out = classify_three_term(a, b, c, p, q, rp_tol)
    else:
        raise UnsupportedShape("more than three terms")
    if out.kind != NO_POLES:
        # inside the band a real pole is reported even though phi only nearly vanishes
        tol = max(VERIFY_TOL, rp_tol) if out.kind == REAL_POLE else VERIFY_TOL
        if out.residual > tol * _scale(f, out.rho):
            raise UnsupportedShape(f"reported zero has residual {out.residual:.3g}")
    return out


def on_cut(f: PowerSeries, cls: PoleClassification) -> bool:
    """True when a reported real pole is a zero of f to rounding level."""
    return cls.kind == REAL_POLE and cls.residual <= VERIFY_TOL * _scale(f, cls.rho)


def strict(f: PowerSeries, rp_tol: float = RP_TOL) -> PoleClassification:
    """Classification used for evaluating responses.

    A real pole found only through the tolerance band (f is small but not zero on
    the cut) is reclassified with a zero band: its residue would otherwise be
    counted twice, once as the pole term and once as the sharp peak it leaves in
    the cut integrand.
    """
    cls = classify(f, rp_tol)
    if cls.kind == REAL_POLE and not on_cut(f, cls):
        return classify(f, 0.0)
    return cls
