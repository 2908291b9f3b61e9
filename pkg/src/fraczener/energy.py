"""Power, stored energy and dissipated power for prescribed histories.

Strain form, with sigma = d/dt (sigma_sr * eps):

    W(t)    = 1/2 sigma_sr(t) eps(t)^2 + 1/2 int_0^t (-sigma_sr')(t-t') (eps(t) - eps(t'))^2 dt'
    Pd(t)   = 1/2 (-sigma_sr'(t)) eps(t)^2 + 1/2 int_0^t sigma_sr''(t-t') (eps(t) - eps(t'))^2 dt'

Stress form, with eps = eps_cr' * sigma:

    W(t)    = 1/2 int_0^t eps_cr'(t-t') sigma(t')^2 dt'
    Pd(t)   = 1/2 eps_cr'(t) sigma(t)^2 + 1/2 int_0^t (-eps_cr'')(t-t') (sigma(t) - sigma(t'))^2 dt'

In both forms the power P = sigma eps' splits as P = dW/dt + Pd.

All hereditary integrals use product integration on a uniform grid: the
kernel is integrated exactly over each panel (through its primitive) and the
history factor is averaged over the panel ends. The panel touching the
diagonal, where the kernel is singular, uses a power law fitted to the
kernel at dt and 2 dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import GridTooCoarse
from .model_catalog import ModelSpec
from .pole_finder import RP_TOL
from .response import creep_family, relaxation_family

STRAIN = "strain"
STRESS = "stress"

MIN_POINTS = 8
# the power law fitted at dt, 2 dt must predict the kernel at 4 dt to this relative accuracy
FIT_TOL = 0.1
UNIFORM_TOL = 1e-9


@dataclass(frozen=True)
class History:
    times: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.kind not in (STRAIN, STRESS):
            raise ValueError(f"kind must be {STRAIN!r} or {STRESS!r}")
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if len(t) < MIN_POINTS:
            raise GridTooCoarse(f"a history needs at least {MIN_POINTS} samples")
        if t[0] != 0.0:
            raise ValueError("the time grid must start at 0")
        steps = np.diff(t)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > UNIFORM_TOL * steps[0]:
            raise ValueError("the time grid must be uniform")
        if not np.all(np.isfinite(v)):
            raise ValueError("history values must be finite")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n(self) -> int:
        """Number of panels."""
        return len(self.times) - 1

    @classmethod
    def from_function(cls, f: Callable, t_end: float, n_points: int, kind: str) -> "History":
        t = np.linspace(0.0, t_end, n_points)
        return cls(t, np.asarray(f(t), dtype=float) * np.ones_like(t), kind)

    def derivative(self) -> np.ndarray:
        """Central differences inside, one-sided at the ends."""
        return np.gradient(self.values, self.dt, edge_order=1)


@dataclass
class EnergyBreakdown:
    times: np.ndarray
    P: np.ndarray
    W: np.ndarray
    Pdiss: np.ndarray
    residual: np.ndarray
    identity_residual: float

    def as_rows(self):
        return [(float(t), float(p), float(w), float(d), float(r))
                for t, p, w, d, r in zip(self.times, self.P, self.W, self.Pdiss, self.residual)]


# --- kernel samples -----------------------------------------------------------------


@dataclass(frozen=True)
class KernelSamples:
    """A kernel k and what the product rules need, sampled at tau_j = j dt.

    ``prim[j]`` = int_0^{tau_j} k (j = 0..N), ``k[j]``, ``dk[j]``, ``ddk[j]`` for
    j = 1..N (index 0 unused, set to nan).
    """

    dt: float
    prim: np.ndarray
    k: np.ndarray
    dk: np.ndarray
    ddk: np.ndarray

    @classmethod
    def from_functions(cls, dt: float, n: int, k: Callable, dk: Callable, ddk: Callable,
                       prim: Callable) -> "KernelSamples":
        tau = dt * np.arange(n + 1)
        pad = lambda f: np.concatenate(([np.nan], np.asarray(f(tau[1:]), dtype=float)  # noqa: E731
                                        * np.ones(n)))
        p = np.concatenate(([0.0], np.asarray(prim(tau[1:]), dtype=float) * np.ones(n)))
        return cls(dt, p, pad(k), pad(dk), pad(ddk))


def relaxation_kernels(m: ModelSpec, dt: float, n: int, rp_tol: float = RP_TOL) -> KernelSamples:
    """sigma_sr, its first two derivatives and its primitive on tau_j = j dt."""
    tau = dt * np.arange(1, n + 1)
    prim = np.concatenate(([0.0], relaxation_family(m, tau, -1, rp_tol=rp_tol)))
    vals = [np.concatenate(([np.nan], relaxation_family(m, tau, k, rp_tol=rp_tol))) for k in (0, 1, 2)]
    return KernelSamples(dt, prim, *vals)


def creep_rate_kernels(m: ModelSpec, dt: float, n: int, rp_tol: float = RP_TOL) -> KernelSamples:
    """eps_cr' with its derivatives; its primitive is eps_cr itself (eps_cr(0) = 0)."""
    tau = dt * np.arange(1, n + 1)
    prim = np.concatenate(([0.0], creep_family(m, tau, 0, rp_tol=rp_tol)))
    k = np.concatenate(([np.nan], creep_family(m, tau, 1, rp_tol=rp_tol)))
    dk = np.concatenate(([np.nan], creep_family(m, tau, 2, rp_tol=rp_tol)))
    # the third derivative is never needed by the stress form
    return KernelSamples(dt, prim, k, dk, np.full(n + 1, np.nan))


def _check(kernels: KernelSamples, h: History):
    if abs(kernels.dt - h.dt) > UNIFORM_TOL * h.dt or len(kernels.prim) < len(h.times):
        raise ValueError("kernel samples do not match the history grid")


# --- product integration ------------------------------------------------------------


def _near_moment(k1: float, k2: float, k4: float, dt: float) -> float:
    """int_0^dt k(tau) tau^2 d tau with k ~ C tau^-b fitted at dt and 2 dt."""
    if k1 == 0.0 and k2 == 0.0:
        return 0.0
    if not (k1 * k2 > 0 and math.isfinite(k1) and math.isfinite(k2)):
        return k1 * dt**3 / 3.0
    b = math.log(k1 / k2) / math.log(2.0)
    if b >= 3.0:
        raise GridTooCoarse(f"kernel singularity tau^-{b:.3g} is not integrable against tau^2")
    if math.isfinite(k4) and k4 != 0.0 and abs(k1 * 4.0**-b / k4 - 1.0) > FIT_TOL:
        raise GridTooCoarse("the grid does not resolve the kernel near tau = 0")
    return k1 * dt**b * dt ** (3.0 - b) / (3.0 - b)


def _first_moment_corrections(prim: np.ndarray, k: np.ndarray, dt: float) -> np.ndarray:
    """c_j with int_{tau_j}^{tau_j+dt} (tau - tau_j) k = dt I_j / 2 + dt^2 c_j.

    Away from the origin c_j = (k_{j+1} - k_j)/12; on the first panel the
    primitive is fitted as C tau^(1-b) from its values at dt and 2 dt.
    """
    c = np.zeros(len(prim) - 1)
    c[1:] = (k[2:] - k[1:-1]) / 12.0
    p1, p2 = prim[1], prim[2] if len(prim) > 2 else math.nan
    if p1 * p2 > 0 and math.isfinite(p1) and math.isfinite(p2):
        b = 1.0 - math.log(p2 / p1) / math.log(2.0)
        if b < 2.0:
            c[0] = p1 * ((1.0 - b) / (2.0 - b) - 0.5) / dt
    return c


def _convolve_panels(prim: np.ndarray, u: np.ndarray, k: np.ndarray | None = None,
                     dt: float | None = None) -> np.ndarray:
    """(k * u)(t_n) with u linear on each panel and exact panel integrals of k.

    ``prim`` is int_0^tau k. Without kernel samples the rule falls back to panel
    averages of u (first order next to a singular kernel).
    """
    n = len(u) - 1
    dprim = np.diff(prim[: n + 1])
    uavg = 0.5 * (u[1:] + u[:-1])
    out = np.zeros(n + 1)
    out[1:] = np.convolve(dprim, uavg)[:n]
    if k is not None:
        c = _first_moment_corrections(prim[: n + 1], k[: n + 1], dt)
        # panel j pairs u_{n-j} -> u_{n-j-1}, i.e. the backward difference of u
        du = u[:-1] - u[1:]
        out[1:] += dt * np.convolve(c, du)[:n]
    return out


def _quadratic_memory(u: np.ndarray, w: np.ndarray, m0: float, dt: float) -> np.ndarray:
    """int_0^{t_n} k(tau) (u(t_n) - u(t_n - tau))^2 d tau.

    ``w[j]`` is the exact kernel integral over [tau_j, tau_{j+1}] (j >= 1) and ``m0``
    the moment int_0^dt k tau^2; on the first panel (u_n - u_{n-1})^2 / dt^2 stands
    in for the squared slope.
    """
    n = len(u) - 1
    out = np.zeros(n + 1)
    for i in range(1, n + 1):
        g = (u[i] - u[i::-1]) ** 2
        acc = m0 * g[1] / dt**2
        if i > 1:
            acc += np.dot(w[1:i], 0.5 * (g[1:i] + g[2 : i + 1]))
        out[i] = acc
    return out


def _balance(h: History, P, W, Pd) -> EnergyBreakdown:
    dW = np.gradient(W, h.dt, edge_order=1)
    res = P - dW - Pd
    res[0] = res[-1] = np.nan
    interior = res[1:-1]
    finite = interior[np.isfinite(interior)]
    ir = float(np.max(np.abs(finite))) if finite.size else math.nan
    return EnergyBreakdown(h.times, P, W, Pd, res, ir)


# --- public operations --------------------------------------------------------------


def stress_from_strain(m: ModelSpec | KernelSamples, eps: History) -> History:
    """sigma = d/dt (sigma_sr * eps) on the history grid."""
    if eps.kind != STRAIN:
        raise ValueError("expected a strain history")
    ks = m if isinstance(m, KernelSamples) else relaxation_kernels(m, eps.dt, eps.n)
    _check(ks, eps)
    conv = _convolve_panels(ks.prim, eps.values, ks.k, eps.dt)
    return History(eps.times, np.gradient(conv, eps.dt, edge_order=2), STRESS)


def strain_from_stress(m: ModelSpec | KernelSamples, sig: History) -> History:
    """eps = eps_cr' * sigma on the history grid (eps_cr(0) = 0)."""
    if sig.kind != STRESS:
        raise ValueError("expected a stress history")
    ks = m if isinstance(m, KernelSamples) else creep_rate_kernels(m, sig.dt, sig.n)
    _check(ks, sig)
    return History(sig.times, _convolve_panels(ks.prim, sig.values, ks.k, sig.dt), STRAIN)


def energy_from_strain(m: ModelSpec | KernelSamples, eps: History) -> EnergyBreakdown:
    """P, W and dissipated power for a prescribed strain history."""
    if eps.kind != STRAIN:
        raise ValueError("expected a strain history")
    ks = m if isinstance(m, KernelSamples) else relaxation_kernels(m, eps.dt, eps.n)
    _check(ks, eps)
    n, dt, u = eps.n, eps.dt, eps.values
    sig = stress_from_strain(ks, eps)
    P = sig.values * eps.derivative()

    # kernel -sigma_sr' for W, sigma_sr'' for the dissipated power
    wW = np.full(n + 1, np.nan)
    wD = np.full(n + 1, np.nan)
    wW[1:n] = ks.k[1:n] - ks.k[2 : n + 1]
    wD[1:n] = ks.dk[2 : n + 1] - ks.dk[1:n]
    k4 = lambda a: a[4] if n >= 4 else math.nan  # noqa: E731
    mW = _near_moment(-ks.dk[1], -ks.dk[2], -k4(ks.dk), dt)
    mD = _near_moment(ks.ddk[1], ks.ddk[2], k4(ks.ddk), dt)
    IW = _quadratic_memory(u, wW, mW, dt)
    ID = _quadratic_memory(u, wD, mD, dt)

    with np.errstate(invalid="ignore"):
        k_t = np.concatenate(([np.inf if u[0] != 0 else 0.0], ks.k[1 : n + 1]))
        dk_t = np.concatenate(([-np.inf if u[0] != 0 else 0.0], ks.dk[1 : n + 1]))
        W = 0.5 * k_t * u**2 + 0.5 * IW
        Pd = 0.5 * (-dk_t) * u**2 + 0.5 * ID
    if u[0] == 0.0:
        W[0], Pd[0] = 0.0, 0.0
    return _balance(eps, P, W, Pd)


def energy_from_stress(m: ModelSpec | KernelSamples, sig: History) -> EnergyBreakdown:
    """P, W and dissipated power for a prescribed stress history."""
    if sig.kind != STRESS:
        raise ValueError("expected a stress history")
    ks = m if isinstance(m, KernelSamples) else creep_rate_kernels(m, sig.dt, sig.n)
    _check(ks, sig)
    n, dt, u = sig.n, sig.dt, sig.values
    eps = strain_from_stress(ks, sig)
    P = u * eps.derivative()
    W = 0.5 * _convolve_panels(ks.prim, u**2, ks.k, dt)

    # kernel -eps_cr'' for the dissipated power
    wD = np.full(n + 1, np.nan)
    wD[1:n] = ks.k[1:n] - ks.k[2 : n + 1]
    k4 = -ks.dk[4] if n >= 4 else math.nan
    mD = _near_moment(-ks.dk[1], -ks.dk[2], k4, dt)
    ID = _quadratic_memory(u, wD, mD, dt)
    k_t = np.concatenate(([0.0], ks.k[1 : n + 1]))
    with np.errstate(invalid="ignore"):
        Pd = 0.5 * k_t * u**2 + 0.5 * ID
    if u[0] != 0.0:
        Pd[0] = np.inf
    return _balance(sig, P, W, Pd)


def convolution_identity_check(k, u: History) -> float:
    """Largest interior residual of

        d/dt (k * u) u = 1/2 k u^2 + 1/2 d/dt (k * u^2) - 1/2 int_0^t k'(t-t') (u(t) - u(t'))^2 dt'

    for a kernel given as samples on the history grid (or a callable of t).

    Both time derivatives of convolutions are taken in Leibniz form,
    d/dt (k * v) = k(0) v + k' * v, and every k' integral uses the exact panel
    increments k(tau_{j+1}) - k(tau_j) against panel-averaged history factors,
    the same product rule the energy balance relies on. The residual then
    measures how far the sampled data are from satisfying the identity under
    that rule.
    """
    t, v = u.times, u.values
    kk = np.asarray(k(t) if callable(k) else k, dtype=float) * np.ones_like(t)
    dk = np.diff(kk)

    def leibniz(w):
        return kk[0] * w + _convolve_increments(dk, w)

    lhs = leibniz(v) * v
    mem = _quadratic_memory_increments(v, dk)
    rhs = 0.5 * kk * v**2 + 0.5 * leibniz(v**2) - 0.5 * mem
    return float(np.max(np.abs(lhs - rhs)[1:-1]))


def _convolve_increments(dk: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum_j dk_j (w_{n-j} + w_{n-j-1})/2 for every n."""
    n = len(w) - 1
    out = np.zeros(n + 1)
    out[1:] = np.convolve(dk, 0.5 * (w[1:] + w[:-1]))[:n]
    return out


def _quadratic_memory_increments(v: np.ndarray, dk: np.ndarray) -> np.ndarray:
    out = np.zeros(len(v))
    for i in range(1, len(v)):
        g = (v[i] - v[i::-1]) ** 2
        out[i] = np.dot(dk[:i], 0.5 * (g[:-1] + g[1:]))
    return out
