"""Two-parameter Mittag-Leffler function for real arguments.

E_{xi,zeta}(z) = sum_n z^n / Gamma(xi n + zeta), and the kernel
e_{xi,zeta,lam}(t) = t^(zeta-1) E_{xi,zeta}(-lam t^xi), whose Laplace
transform is s^(xi-zeta)/(s^xi + lam).

Small |z| uses the series; large negative z uses the integral
representation of e_{xi,zeta,lam} at t = 1, after lowering zeta below 1
with E_{xi,zeta}(z) = (E_{xi,zeta-xi}(z) - 1/Gamma(zeta-xi)) / z.
At xi = 1 the integral form has a pole on the path, and the confluent
hypergeometric form 1F1(1; zeta; z)/Gamma(zeta) is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln, rgamma

from .errors import Divergence, ParameterWindow
from .quadrature import QuadSpec, integrate_semi_infinite

Z_SWITCH = 5.0
TERM_BUDGET = 2000
# largest |term|/|sum| ratio the series may have before digits are considered lost
MAX_CANCELLATION = 1e4

_IR_SPEC = QuadSpec(rel_tol=1e-12, abs_tol=1e-300)


@dataclass(frozen=True)
class MLParams:
    """(xi, zeta, lam) of a kernel e_{xi,zeta,lam}."""

    xi: float
    zeta: float
    lam: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.xi <= 1.0:
            raise ParameterWindow(f"xi={self.xi} outside (0, 1]")
        if not self.lam >= 0.0:
            raise ParameterWindow(f"lam={self.lam} must be non-negative")

    @property
    def integral_form_valid(self) -> bool:
        return self.xi < 1.0 and self.zeta < 1.0 + self.xi

    def E(self, z: float) -> float:
        return ml_E(self.xi, self.zeta, z)

    def e(self, t):
        return ml_e(self.xi, self.zeta, self.lam, t)

    def laplace(self, s: float) -> float:
        return ml_laplace_check(self.xi, self.zeta, self.lam, s)


def _rgamma(x: float) -> float:
    if x < 170.0:
        return float(rgamma(x))
    return math.exp(-gammaln(x))


def _series(xi: float, zeta: float, z: float) -> tuple[float, float] | None:
    """Series sum and cancellation ratio, or None if the budget runs out."""
    if z == 0.0:
        return _rgamma(zeta), 1.0
    terms = []
    log_abs = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    biggest = 0.0
    for n in range(TERM_BUDGET):
        arg = xi * n + zeta
        if arg <= 0:
            term = (sign**n) * math.exp(n * log_abs) * float(rgamma(arg))
        else:
            log_term = n * log_abs - gammaln(arg)
            if log_term > 700.0:
                return None
            term = (sign**n) * math.exp(log_term)
        terms.append(term)
        biggest = max(biggest, abs(term))
        if n > 3 and arg > 1 and abs(term) <= 1e-17 * max(abs(math.fsum(terms)), 1e-300) \
                and abs(terms[-2]) <= 1e-16 * max(abs(math.fsum(terms)), 1e-300):
            total = math.fsum(terms)
            return total, biggest / max(abs(total), 1e-300)
        if not math.isfinite(term):
            return None
    return None


def ml_E(xi: float, zeta: float, z: float) -> float:
    """E_{xi,zeta}(z) for real z."""
    if not xi > 0:
        raise ParameterWindow(f"xi={xi} must be positive")
    z = float(z)
    if abs(z) <= Z_SWITCH:
        res = _series(xi, zeta, z)
        if res is not None and res[1] <= MAX_CANCELLATION:
            return res[0]
        if z > 0 and res is not None:
            return res[0]
    if z < 0 and xi < 1.0:
        return _E_negative(xi, zeta, z)
    if xi == 1.0 and zeta == 1.0:
        return math.exp(z)
    if xi == 1.0:
        # E_{1,zeta}(z) = 1F1(1; zeta; z) / Gamma(zeta)
        return float(mpmath.hyp1f1(1, zeta, z) * mpmath.rgamma(zeta))
    res = _series(xi, zeta, z)
    if res is None or (z < 0 and res[1] > MAX_CANCELLATION):
        raise Divergence(f"E_{{{xi},{zeta}}}({z}): series not usable and no integral form applies")
    return res[0]


def _E_negative(xi: float, zeta: float, z: float) -> float:
    """E_{xi,zeta}(z) for z < 0, 0 < xi < 1, through the integral representation."""
    # keep zeta below 1 so the integrand stays well away from rho^-1 at the origin;
    # for |z| > 1 this upward recurrence does not cancel
    if zeta >= 1.0:
        lowered = zeta - xi
        return (_E_negative(xi, lowered, z) - _rgamma(lowered)) / z
    return ml_e_integral(xi, zeta, -z, 1.0)


def ml_e(xi: float, zeta: float, lam: float, t):
    """e_{xi,zeta,lam}(t) = t^(zeta-1) E_{xi,zeta}(-lam t^xi); t may be an array."""
    if lam < 0:
        raise ParameterWindow("lam must be non-negative")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ParameterWindow("t must be positive")
    out = np.array([tt ** (zeta - 1.0) * ml_E(xi, zeta, -lam * tt**xi) for tt in t_arr.ravel()])
    out = out.reshape(t_arr.shape)
    return float(out) if out.ndim == 0 else out


def ml_e_integral(xi: float, zeta: float, lam: float, t: float) -> float:
    """e_{xi,zeta,lam}(t) from its integral along the negative real axis."""
    if not 0.0 < xi < 1.0:
        raise ParameterWindow(f"integral form needs 0 < xi < 1, got {xi}")
    if not zeta < 1.0 + xi:
        raise ParameterWindow(f"integral form needs zeta < 1 + xi, got zeta={zeta}, xi={xi}")
    if lam < 0 or not t > 0:
        raise ParameterWindow("need lam >= 0 and t > 0")
    if lam == 0.0 and zeta >= 1.0:
        # the integrand is no longer integrable at 0; the value is the power law
        return t ** (zeta - 1.0) * _rgamma(zeta)
    s1 = lam * math.sin((zeta - xi) * math.pi)
    s2 = math.sin(zeta * math.pi)
    c = 2.0 * lam * math.cos(xi * math.pi)

    def f(rho: float) -> float:
        if rho == 0.0:
            return 0.0
        rx = rho**xi
        return (s1 + rx * s2) / (rx * rx + c * rx + lam * lam) * rho ** (xi - zeta) * math.exp(-rho * t)

    bps = (lam ** (1.0 / xi),) if lam > 0 else ()
    return integrate_semi_infinite(f, t, _IR_SPEC, breakpoints=bps).value / math.pi


def ml_laplace_check(xi: float, zeta: float, lam: float, s: float) -> float:
    """Laplace transform of e_{xi,zeta,lam} at real s."""
    return s ** (xi - zeta) / (s**xi + lam)
