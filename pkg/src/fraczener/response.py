"""Relaxation modulus and creep compliance in the time domain.

Both responses are inverted along the negative real axis. With
s = rho e^{i pi} the branch-cut parts read

    sigma_NP(t) = (1/pi) int rho^(xi-1) K(rho)/|phi_sigma|^2 e^{-rho t} d rho,
    eps_NP(t)   = (1/pi) int rho^(-1-xi) K(rho)/|phi_eps|^2 (1 - e^{-rho t}) d rho,

and a zero s0 of the denominator (a real pole on the cut or a complex pair)
adds a residue term. Near rho = 0 and rho = inf the integrands are sums of
powers with nearly equal exponents (mixed algebraic singularities, slow
algebraic tails); there the expansion of the Laplace-domain ratio is integrated
term by term in closed form and QUADPACK only sees the middle of the cut.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy import integrate
from scipy.special import gammainc, gammaln, rgamma

from .errors import DerivativeVanishes, NotConverged, ParameterWindow, WrongModelShape
from .mittag_leffler import ml_e
from .model_catalog import ModelSpec, PowerSeries, power_sum_derivative
from .pole_finder import COMPLEX_PAIR, NO_POLES, REAL_POLE, RP_TOL, PoleClassification, strict
from .quadrature import (
    DEFAULT_SPEC,
    QuadSpec,
    integrate_principal_value,
    integrate_semi_infinite,
)

INTEGRAL = "integral"
MITTAG_LEFFLER = "ml"
STABLE_SPLIT = "stable"

RELAXATION_ML_MODELS = ("ID.ID", "ID.DD+", "ID.IDD", "ID.DDD+", "ID.IDD+")
CREEP_ML_MODELS = ("ID.ID", "ID.DD+", "IID.ID", "IDD.DD+", "I+ID.ID", "IDD+.DD+")

DERIV_TOL = 1e-14

# the ends of the cut are summed in closed form where every ratio of a lower (upper)
# term of the denominator to its lowest (highest) term is below END_RATIO / n
END_RATIO = 0.25
END_REL = 1e-18
END_MAX_TERMS = 4000
# cut points stay inside e^(+-LN_LIMIT)
LN_LIMIT = 650.0


@dataclass
class ResponseCurve:
    times: np.ndarray
    values: np.ndarray
    branch_values: dict[str, np.ndarray] | None
    classification: PoleClassification
    method: str

    def as_rows(self):
        br = self.branch_values or {}
        npv = br.get("np", np.full(self.times.shape, np.nan))
        bv = br.get("branch", np.full(self.times.shape, np.nan))
        return [(float(t), float(v), float(a), float(b), self.method)
                for t, v, a, b in zip(self.times, self.values, npv, bv)]


def _require_xi(m: ModelSpec, which: str) -> None:
    """The cut integrands behave like rho^(xi-1) (relaxation) and rho^(-xi) (creep) at 0."""
    if not m.xi > 0 or (which == "creep" and not m.xi < 1):
        window = "(0, 1)" if which == "creep" else "(0, inf)"
        raise ParameterWindow(f"{m.code}: xi={m.xi:g} outside {window}, the {which} integral "
                              "does not exist (thermodynamically admissible sets have 0 < xi < 1)")


def _grid(grid) -> np.ndarray:
    t = np.atleast_1d(np.asarray(grid, dtype=float))
    if t.ndim != 1 or np.any(~(t > 0)) or not np.all(np.isfinite(t)):
        raise ValueError("time grid must be finite and strictly positive")
    return t


# --- scalar evaluators on the cut ---------------------------------------------------


class _Cut:
    """Fast scalar evaluation of K(rho) and |phi(rho e^{i pi})|^2."""

    def __init__(self, m: ModelSpec, den: PowerSeries):
        self.k_terms = []
        for ai, pi in m.phi_sigma.terms:
            for bj, qj in m.phi_epsilon.terms:
                self.k_terms.append((ai * bj * math.sin((m.xi + qj - pi) * math.pi), pi + qj))
        self.den = [(c, p, math.cos(p * math.pi), math.sin(p * math.pi)) for c, p in den.terms]

    def K(self, rho: float) -> float:
        return math.fsum(c * rho**e for c, e in self.k_terms)

    def D(self, rho: float) -> float:
        re = im = 0.0
        for c, p, cp, sp in self.den:
            v = c * rho**p
            re += v * cp
            im += v * sp
        return re * re + im * im


def _near_zeros(f: PowerSeries, extra=()) -> tuple[float, ...]:
    """Panel edges clustered around the local minima of |f| along the cut.

    Close to a tangency |f|^2 has a dip of relative width w = |f|/|f'| at its
    minimum; edges at rho* +- w 4^k let the integrator resolve the peak this
    produces in the integrand.
    """
    pts = [p for p in extra if p and p > 0]
    if len(f.terms) < 2 or f.top_exponent <= 0.5:
        return tuple(sorted(pts))
    df = power_sum_derivative(f)

    def rel2(x):
        r = 10.0**x
        return abs(f.on_cut(r)) ** 2 / sum(c * r**p for c, p in f.terms) ** 2

    lr = np.linspace(-12.0, 12.0, 481)
    vals = np.array([rel2(x) for x in lr])
    for i in range(1, len(lr) - 1):
        if vals[i] < vals[i - 1] and vals[i] <= vals[i + 1] and vals[i] < 0.25:
            res = minimize_scalar(rel2, bounds=(lr[i - 1], lr[i + 1]), method="bounded",
                                  options={"xatol": 1e-14})
            r0 = 10.0 ** float(res.x)
            pts.append(r0)
            w = abs(f.on_cut(r0)) / max(abs(df.on_cut(r0)), 1e-300)
            while w < 0.5 * r0:
                pts += [r0 - w, r0 + w]
                w *= 4.0
    return tuple(sorted(pts))


# --- closed-form ends of the cut ----------------------------------------------------


@dataclass(frozen=True)
class EndSeries:
    """main(rho) = sum d_k rho^g_k on the outer side of ``cut`` (below it at the small end)."""

    cut: float
    terms: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class CutEnds:
    small: EndSeries | None
    large: EndSeries | None


def power_expansion(num: PowerSeries, den: PowerSeries, end: str, ln_cut: float,
                    rel: float = END_REL, max_terms: int = END_MAX_TERMS) -> list[tuple[float, float]]:
    """Terms c_k s^e_k of num/den as s -> 0 (``end="small"``) or s -> inf (``"large"``).

    num/den = num/lead * sum_n (-u)^n with u = den/lead - 1. Products num*u^n are
    accumulated per exponent and entries whose size at s = e^ln_cut falls below
    ``rel`` times the largest numerator term are dropped.
    """
    small = end == "small"
    lead_c, lead_p = den.terms[0] if small else den.terms[-1]
    u = [(c / lead_c, p - lead_p) for c, p in den.terms if p != lead_p]

    def key(e):
        return round(e, 11)

    def size(c, e):
        return math.log(abs(c)) + e * ln_cut

    power: dict[float, float] = {}
    for c, p in num.terms:
        power[key(p - lead_p)] = power.get(key(p - lead_p), 0.0) + c / lead_c
    power = {e: c for e, c in power.items() if c != 0.0}
    if not power:
        return []
    floor = max(size(c, e) for e, c in power.items()) + math.log(rel)
    total = dict(power)
    while power:
        nxt: dict[float, float] = {}
        for e, c in power.items():
            for uc, ue in u:
                k = key(e + ue)
                nxt[k] = nxt.get(k, 0.0) - c * uc
        # 1e-3 slack so that many dropped entries cannot add up to rel
        power = {e: c for e, c in nxt.items() if c != 0.0 and size(c, e) > floor + math.log(1e-3)}
        for e, c in power.items():
            total[e] = total.get(e, 0.0) + c
        if len(total) > max_terms:
            raise NotConverged(f"power expansion needs more than {max_terms} terms")
    return sorted(((c, e) for e, c in total.items() if c != 0.0), key=lambda ce: ce[1], reverse=not small)


def end_series(num: PowerSeries, den: PowerSeries, shift: float, end: str) -> EndSeries | None:
    """Expansion of main(rho) = -Im[s^shift num(s)/den(s)] at s = rho e^{i pi} near one end.

    The cut is placed where every lower (upper) term of den is at most END_RATIO/n of
    the lowest (highest) one, so the series in u = den/lead - 1 converges at least
    like END_RATIO^n there. None when that point lies outside e^(+-LN_LIMIT).
    """
    small = end == "small"
    lead_c, lead_p = den.terms[0] if small else den.terms[-1]
    others = den.terms[1:] if small else den.terms[:-1]
    n = len(others)
    if n == 0:
        ln_cut = 0.0
    else:
        lns = [math.log(END_RATIO * lead_c / (n * c)) / abs(lead_p - p) for c, p in others]
        ln_cut = min(lns) if small else -min(lns)
        if abs(ln_cut) > LN_LIMIT:
            return None
    terms = power_expansion(num, den, end, ln_cut)
    return EndSeries(math.exp(ln_cut), tuple((-c * math.sin((shift + e) * math.pi), shift + e)
                                             for c, e in terms))


def _lower_scaled(a: float, x: np.ndarray) -> np.ndarray:
    """gamma(a, x) / x^a = int_0^1 v^(a-1) e^{-x v} dv for a > 0, without overflow."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    lo = x < a + 1.0
    if np.any(lo):
        # e^{-x} sum_n x^n / (a (a+1) ... (a+n)): positive terms, ratio x/(a+n+1) < 1
        xs = x[lo]
        term = np.full(xs.shape, 1.0 / a)
        acc = term.copy()
        for n in range(1, 2000):
            term = term * xs / (a + n)
            acc = acc + term
            if np.all(term <= 1e-17 * acc):
                break
        out[lo] = np.exp(-xs) * acc
    hi = ~lo
    if np.any(hi):
        xs = x[hi]
        out[hi] = np.exp(gammaln(a) - a * np.log(xs)) * gammainc(a, xs)
    return out


def _scaled_term(d: float, g: float, cut: float, factor: np.ndarray) -> np.ndarray:
    """d cut^g factor, evaluated through logs (d cut^g alone may over- or underflow)."""
    with np.errstate(divide="ignore"):
        return math.copysign(1.0, d) * np.exp(math.log(abs(d)) + g * math.log(cut) + np.log(factor))


def _small_damped(es: EndSeries, t, extra: float = 0.0):
    """sum_k d_k int_0^cut rho^(g_k + extra) e^{-rho t} d rho."""
    t = np.asarray(t, dtype=float)
    x = es.cut * t
    out = np.zeros(t.shape)
    for d, g in es.terms:
        a = g + extra + 1.0
        if not a > 0:
            raise WrongModelShape(f"the cut integrand is not integrable at 0 (rho^{a - 1:g})")
        out = out + _scaled_term(d, a, es.cut, _lower_scaled(a, x))
    return out


def _J_scaled(g: float, x: np.ndarray) -> np.ndarray:
    """x^-g int_0^x u^(g-1) (1 - e^{-u}) du = int_0^1 v^(g-1) (1 - e^{-x v}) dv, g > -1."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    lo = x <= 2.0
    if np.any(lo):
        xs = x[lo]
        acc, term = np.zeros(xs.shape), np.ones(xs.shape)
        for k in range(1, 45):
            term = term * -xs / k
            acc = acc - term / (k + g)
        out[lo] = acc
    hi = ~lo
    if np.any(hi):
        xs = x[hi]
        if abs(g) >= 1e-3:
            # by parts: [(1 - e^{-x}) - x gamma(g+1, x)/x^(g+1)] / g
            out[hi] = (-np.expm1(-xs) - xs * _lower_scaled(g + 1.0, xs)) / g
        else:
            # near g = 0 that cancels; split the unscaled integral at u = 2 instead
            base = 2.0**g * _J_scaled(g, np.array([2.0]))[0]
            grow = np.log(xs / 2.0) if g == 0 else 2.0**g * np.expm1(g * np.log(xs / 2.0)) / g
            damp = np.array([integrate.quad(lambda u: u ** (g - 1.0) * math.exp(-u), 2.0, v,
                                            epsabs=0.0, epsrel=1e-13, limit=200)[0] for v in xs])
            out[hi] = (base + grow - damp) * xs**-g
    return out


def _J(g: float, x: np.ndarray) -> np.ndarray:
    """int_0^x u^(g-1) (1 - e^{-u}) du for g > -1."""
    x = np.asarray(x, dtype=float)
    return x**g * _J_scaled(g, x)


def _small_saturating(es: EndSeries, t):
    """sum_k d_k int_0^cut rho^(g_k - 1) (1 - e^{-rho t}) d rho."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    for d, g in es.terms:
        if not g > -1.0:
            raise WrongModelShape(f"the cut integrand is not integrable at 0 (rho^{g - 1:g})")
        out = out + _scaled_term(d, g, es.cut, _J_scaled(g, es.cut * t))
    return out


def _large_saturating(es: EndSeries, upper: float) -> float:
    """sum_k d_k int_upper^inf rho^(g_k - 1) d rho; e^{-rho t} is negligible past ``upper``."""
    total = 0.0
    for d, g in es.terms:
        if not g < 0:
            raise WrongModelShape(f"nonzero glass compliance (rho^{g - 1:g} tail on the cut)")
        total += float(_scaled_term(d, g, upper, np.array(-1.0 / g)))
    return total


def _limits(ends: CutEnds, t_min: float | None, spec: QuadSpec) -> tuple[float, float | None]:
    """Numeric range [lower, upper] between the closed-form ends; upper None for damped kernels."""
    lower = ends.small.cut if ends.small else 0.0
    if t_min is None:
        return lower, None
    if ends.large is None:
        return lower, None
    upper = max(ends.large.cut, spec.tail_exponent / t_min)
    return min(lower, upper), upper


def relaxation_ends(m: ModelSpec) -> CutEnds:
    """Ends of rho^(xi-1) K/|phi_sigma|^2 = -Im[s^(xi-1) phi_eps/phi_sigma]."""
    return CutEnds(end_series(m.phi_epsilon, m.phi_sigma, m.xi - 1.0, "small"),
                   end_series(m.phi_epsilon, m.phi_sigma, m.xi - 1.0, "large"))


def creep_ends(m: ModelSpec) -> CutEnds:
    """Ends of rho^(-xi) K/|phi_eps|^2 = -Im[s^(-xi) phi_sigma/phi_eps]."""
    return CutEnds(end_series(m.phi_sigma, m.phi_epsilon, -m.xi, "small"),
                   end_series(m.phi_sigma, m.phi_epsilon, -m.xi, "large"))


def _pole_s(cls: PoleClassification) -> complex:
    if cls.kind == REAL_POLE:
        return complex(-cls.rho, 0.0)
    return cmath.rect(cls.rho, cls.phi)


# --- relaxation ---------------------------------------------------------------------


def classify_relaxation(m: ModelSpec, rp_tol: float = RP_TOL) -> PoleClassification:
    """Zeros of phi_sigma as used for evaluation (band-only real poles reclassified)."""
    return strict(m.phi_sigma, rp_tol)


def classify_creep(m: ModelSpec, rp_tol: float = RP_TOL) -> PoleClassification:
    return strict(m.phi_epsilon, rp_tol)


def _relax_breakpoints(m: ModelSpec, cls: PoleClassification):
    extra = (cls.rho,) if cls.kind == COMPLEX_PAIR else ()
    return tuple(p for p in _near_zeros(m.phi_sigma, extra)
                 if not (cls.kind == REAL_POLE and abs(p - cls.rho) < 0.5 * cls.rho))


def relaxation_np(m: ModelSpec, t: float, cls: PoleClassification | None = None, *,
                  k: int = 0, form: str = "K", spec: QuadSpec = DEFAULT_SPEC,
                  breakpoints=None, ends: CutEnds | None = None) -> float:
    """Branch-cut part of the relaxation modulus (or its k-th derivative).

    ``form="K"`` integrates rho^(xi-1) K/|phi_sigma|^2; ``form="arg"`` integrates
    rho^(xi-1) |phi_eps|/|phi_sigma| sin(xi pi + arg phi_eps - arg phi_sigma).
    With a real pole on the cut the integral is a principal value. Below the
    small-rho cut point of ``ends`` the integrand is summed in closed form.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    _require_xi(m, "relaxation")
    cls = cls or classify_relaxation(m)
    ends = ends or relaxation_ends(m)
    lower, _ = _limits(ends, None, spec)
    xi = m.xi
    sign = (-1.0) ** k
    if form == "K":
        cut = _Cut(m, m.phi_sigma)

        def f(rho):
            if rho == 0.0:
                return 0.0
            return sign * rho ** (xi - 1.0 + k) * cut.K(rho) / cut.D(rho) * math.exp(-rho * t)
    elif form == "arg":
        ps, pe = m.phi_sigma, m.phi_epsilon

        def f(rho):
            if rho == 0.0:
                return 0.0
            zs, ze = ps.on_cut(rho), pe.on_cut(rho)
            ang = xi * math.pi + cmath.phase(ze) - cmath.phase(zs)
            return sign * rho ** (xi - 1.0 + k) * abs(ze) / abs(zs) * math.sin(ang) * math.exp(-rho * t)
    else:
        raise ValueError(f"unknown form {form!r}")
    bps = _relax_breakpoints(m, cls) if breakpoints is None else breakpoints
    if cls.kind == REAL_POLE:
        res = integrate_principal_value(f, cls.rho, t, spec, breakpoints=bps, lower=lower)
    else:
        res = integrate_semi_infinite(f, t, spec, breakpoints=bps, lower=lower)
    closed = sign * float(_small_damped(ends.small, t, k)) if ends.small else 0.0
    return (res.value + closed) / math.pi


def _relax_residue(m: ModelSpec, cls: PoleClassification) -> tuple[complex, complex]:
    phi = math.pi if cls.kind == REAL_POLE else cls.phi
    num = complex(m.phi_epsilon.polar(cls.rho, phi))
    d = complex(power_sum_derivative(m.phi_sigma).polar(cls.rho, phi))
    if abs(d) < DERIV_TOL * m.phi_sigma.scale():
        raise DerivativeVanishes(f"phi_sigma' vanishes at the pole s={_pole_s(cls)}")
    c = cls.rho ** (m.xi - 1.0) * cmath.exp(1j * (m.xi - 1.0) * phi) * num / d
    return c, _pole_s(cls)


def relaxation_rp(m: ModelSpec, cls: PoleClassification, t, k: int = 0):
    """Real-pole term Re[s0^(xi-1) phi_eps(s0)/phi_sigma'(s0)] s0^k e^{s0 t}, s0 = -rho."""
    if cls.kind != REAL_POLE:
        raise ValueError("relaxation_rp needs a real pole")
    c, _ = _relax_residue(m, cls)
    t = np.asarray(t, dtype=float)
    out = c.real * (-cls.rho) ** k * np.exp(-cls.rho * t)
    return float(out) if out.ndim == 0 else out


def relaxation_ccp(m: ModelSpec, cls: PoleClassification, t, k: int = 0):
    """Complex-pair term 2 Re[s0^(xi-1) phi_eps(s0)/phi_sigma'(s0) s0^k e^{s0 t}]."""
    if cls.kind != COMPLEX_PAIR:
        raise ValueError("relaxation_ccp needs a complex pair")
    c, s0 = _relax_residue(m, cls)
    t = np.asarray(t, dtype=float)
    out = 2.0 * np.real(c * s0**k * np.exp(s0 * t))
    return float(out) if out.ndim == 0 else out


def _relax_branch(m, cls, t, k=0):
    if cls.kind == REAL_POLE:
        return relaxation_rp(m, cls, t, k)
    if cls.kind == COMPLEX_PAIR:
        return relaxation_ccp(m, cls, t, k)
    return np.zeros(np.shape(t)) if np.ndim(t) else 0.0


def relaxation(m: ModelSpec, grid, *, method: str = "auto", rp_tol: float = RP_TOL,
               spec: QuadSpec = DEFAULT_SPEC) -> ResponseCurve:
    """Relaxation modulus sigma_sr on a positive time grid."""
    t = _grid(grid)
    cls = classify_relaxation(m, rp_tol)
    if method == MITTAG_LEFFLER:
        vals = relaxation_ml(m, t)
        return ResponseCurve(t, vals, None, cls, MITTAG_LEFFLER)
    if method not in ("auto", INTEGRAL):
        raise ValueError(f"method {method!r} is not available for relaxation")
    bps, ends = _relax_breakpoints(m, cls), relaxation_ends(m)
    npv = np.array([relaxation_np(m, tt, cls, spec=spec, breakpoints=bps, ends=ends) for tt in t])
    br = np.asarray(_relax_branch(m, cls, t), dtype=float)
    return ResponseCurve(t, npv + br, {"np": npv, "branch": br}, cls, INTEGRAL)


def relaxation_value(m: ModelSpec, t: float, **kw) -> float:
    return float(relaxation(m, [t], **kw).values[0])


def relaxation_derivatives(m: ModelSpec, t, k: int = 1, *, rp_tol: float = RP_TOL,
                           spec: QuadSpec = DEFAULT_SPEC):
    """k-th time derivative of the relaxation modulus, k in {1, 2}."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    tt = _grid(t)
    cls = classify_relaxation(m, rp_tol)
    bps = _relax_breakpoints(m, cls)
    ends = relaxation_ends(m)
    out = np.array([relaxation_np(m, x, cls, k=k, spec=spec, breakpoints=bps, ends=ends) for x in tt])
    out = out + np.asarray(_relax_branch(m, cls, tt, k), dtype=float)
    return float(out[0]) if np.ndim(t) == 0 else out


def _require(m: ModelSpec, allowed, which: str, f: PowerSeries):
    if m.code not in allowed or len(f.terms) != 2:
        raise WrongModelShape(f"{m.code}: the Mittag-Leffler form needs a two-term {which}")


def relaxation_ml(m: ModelSpec, t):
    """sum_j (b_j/a_2) e_{p, 1-xi+p-q_j, a_1/a_2}(t) for phi_sigma = a_1 + a_2 s^p."""
    _require(m, RELAXATION_ML_MODELS, "phi_sigma", m.phi_sigma)
    tt = _grid(t)
    (a1, _), (a2, p) = m.phi_sigma.terms
    lam = a1 / a2
    out = np.zeros(tt.shape)
    for bj, qj in m.phi_epsilon.terms:
        out = out + bj / a2 * ml_e(p, 1.0 - m.xi + p - qj, lam, tt)
    return float(out[0]) if np.ndim(t) == 0 else out


# --- creep --------------------------------------------------------------------------


def _check_glass(m: ModelSpec) -> None:
    """A creep compliance needs phi_sigma/phi_eps = o(s^xi) as s -> infinity."""
    top_num = m.phi_sigma.terms[-1][1] if m.phi_sigma.terms else -math.inf
    e = top_num - m.phi_epsilon.terms[-1][1]
    if not m.xi - e > 0:
        raise WrongModelShape(f"{m.code}: nonzero glass compliance (s^{e - m.xi - 1:g} term)")


def _creep_breakpoints(m: ModelSpec, cls: PoleClassification):
    extra = (cls.rho,) if cls.kind == COMPLEX_PAIR else ()
    return tuple(p for p in _near_zeros(m.phi_epsilon, extra)
                 if not (cls.kind == REAL_POLE and abs(p - cls.rho) < 0.5 * cls.rho))


def creep_np(m: ModelSpec, t: float, cls: PoleClassification | None = None, *,
             spec: QuadSpec = DEFAULT_SPEC, breakpoints=None, ends: CutEnds | None = None) -> float:
    """Branch-cut part of the creep compliance.

    Both ends of the cut are summed in closed form from the power expansions
    of phi_sigma/phi_eps; QUADPACK covers the range between the cut points.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    _require_xi(m, "creep")
    cls = cls or classify_creep(m)
    ends = ends or creep_ends(m)
    _check_glass(m)
    xi = m.xi
    cut = _Cut(m, m.phi_epsilon)
    lower, upper = _limits(ends, t, spec)

    def f(rho):
        if rho == 0.0:
            return 0.0
        w = -math.expm1(-rho * t) / rho
        return rho ** (-xi) * cut.K(rho) / cut.D(rho) * w

    bps = _creep_breakpoints(m, cls) if breakpoints is None else breakpoints
    kw = dict(damped=False, breakpoints=bps, lower=lower, upper=upper)
    if cls.kind == REAL_POLE:
        res = integrate_principal_value(f, cls.rho, t, spec, **kw)
    else:
        res = integrate_semi_infinite(f, t, spec, **kw)
    closed = float(_small_saturating(ends.small, t)) if ends.small else 0.0
    if upper is not None:
        closed += _large_saturating(ends.large, upper)
    return (res.value + closed) / math.pi


def _creep_residue(m: ModelSpec, cls: PoleClassification) -> tuple[complex, complex]:
    phi = math.pi if cls.kind == REAL_POLE else cls.phi
    num = complex(m.phi_sigma.polar(cls.rho, phi))
    d = complex(power_sum_derivative(m.phi_epsilon).polar(cls.rho, phi))
    if abs(d) < DERIV_TOL * m.phi_epsilon.scale():
        raise DerivativeVanishes("phi_eps' vanishes at the pole")
    c = cls.rho ** (-1.0 - m.xi) * cmath.exp(-1j * (1.0 + m.xi) * phi) * num / d
    return c, _pole_s(cls)


def creep_rp(m: ModelSpec, cls: PoleClassification, t):
    """Real-pole term Re[s0^(-1-xi) phi_sigma(s0)/phi_eps'(s0)] (e^{-rho t} - 1)."""
    if cls.kind != REAL_POLE:
        raise ValueError("creep_rp needs a real pole")
    c, _ = _creep_residue(m, cls)
    t = np.asarray(t, dtype=float)
    out = c.real * np.expm1(-cls.rho * t)
    return float(out) if out.ndim == 0 else out


def creep_ccp(m: ModelSpec, cls: PoleClassification, t):
    """Complex-pair term 2 Re[s0^(-1-xi) phi_sigma(s0)/phi_eps'(s0) (e^{s0 t} - 1)]."""
    if cls.kind != COMPLEX_PAIR:
        raise ValueError("creep_ccp needs a complex pair")
    c, s0 = _creep_residue(m, cls)
    t = np.asarray(t, dtype=float)
    out = 2.0 * np.real(c * (np.exp(s0 * t) - 1.0))
    return float(out) if out.ndim == 0 else out


def _creep_branch(m, cls, t):
    if cls.kind == REAL_POLE:
        return creep_rp(m, cls, t)
    if cls.kind == COMPLEX_PAIR:
        return creep_ccp(m, cls, t)
    return np.zeros(np.shape(t))


def creep(m: ModelSpec, grid, *, method: str = "auto", rp_tol: float = RP_TOL,
          spec: QuadSpec = DEFAULT_SPEC) -> ResponseCurve:
    """Creep compliance eps_cr on a positive time grid."""
    t = _grid(grid)
    cls = classify_creep(m, rp_tol)
    if method == "auto":
        method = STABLE_SPLIT if m.code == "I+ID.ID" else INTEGRAL
    if method == MITTAG_LEFFLER:
        return ResponseCurve(t, creep_ml(m, t), None, cls, MITTAG_LEFFLER)
    if method == STABLE_SPLIT:
        return creep_stable(m, t, spec=spec)
    if method != INTEGRAL:
        raise ValueError(f"unknown method {method!r}")
    bps, ends = _creep_breakpoints(m, cls), creep_ends(m)
    npv = np.array([creep_np(m, tt, cls, spec=spec, breakpoints=bps, ends=ends) for tt in t])
    br = np.asarray(_creep_branch(m, cls, t), dtype=float)
    return ResponseCurve(t, npv + br, {"np": npv, "branch": br}, cls, INTEGRAL)


def creep_ml(m: ModelSpec, t):
    """sum_i (a_i/b_2) e_{p, 1+xi+p-p_i, b_1/b_2}(t) for phi_eps = b_1 + b_2 s^p."""
    _require(m, CREEP_ML_MODELS, "phi_eps", m.phi_epsilon)
    tt = _grid(t)
    (b1, _), (b2, p) = m.phi_epsilon.terms
    lam = b1 / b2
    out = np.zeros(tt.shape)
    for ai, pi in m.phi_sigma.terms:
        out = out + ai / b2 * ml_e(p, 1.0 + m.xi + p - pi, lam, tt)
    return float(out[0]) if np.ndim(t) == 0 else out


def creep_stable(m: ModelSpec, grid, *, spec: QuadSpec = DEFAULT_SPEC) -> ResponseCurve:
    """Creep compliance of I+ID.ID with the growing part split off analytically.

    phi_sigma/phi_eps = (a3/b2) s^r + (a3/b2)(a2/a3 - lam) s^r/(s^r + lam) + (a1/b2)/(s^r + lam)
    with r = alpha + beta and lam = b1/b2; the first piece inverts to a power of t and
    the other two give integrands decaying like rho^(-1-beta-nu) and rho^(-1-2 alpha-3 beta-nu).
    """
    if m.code != "I+ID.ID":
        raise WrongModelShape("the split creep form exists for I+ID.ID only")
    t = _grid(grid)
    o = m.orders
    al, be, nu = o.alpha, o.beta, o.nu
    (a1, a2, a3), (b1, b2) = m.a, m.b
    r, lam = al + be, b1 / b2
    sr, cr = math.sin(r * math.pi), math.cos(r * math.pi)
    s_bn = math.sin((be + nu) * math.pi)
    s_na = math.sin((nu - al) * math.pi)
    s_a2bn = math.sin((al + 2 * be + nu) * math.pi)
    c2 = a3 / b2 * (a2 / a3 - lam)
    c3 = a1 / b2

    def den(rho):
        x = rho**r
        return (x * cr + lam) ** 2 + (x * sr) ** 2

    def g2(rho):
        x = rho**r
        return rho ** (-1.0 - nu + al) * (x * s_bn + lam * s_na) / den(rho)

    def g3(rho):
        x = rho**r
        return rho ** (-1.0 - be - nu) * (x * s_a2bn + lam * s_bn) / den(rho)

    bps = (lam ** (1.0 / r),)
    vals, part2, part3 = [], [], []
    for tt in t:
        def f(rho, tt=tt):
            if rho == 0.0:
                return 0.0
            return (c2 * g2(rho) + c3 * g3(rho)) * -math.expm1(-rho * tt)

        lead = a3 / b2 * tt ** (nu - al) * float(rgamma(1.0 + nu - al))
        integral = integrate_semi_infinite(f, tt, spec, damped=False, breakpoints=bps).value / math.pi
        vals.append(lead + integral)
    vals = np.array(vals)
    cls = PoleClassification(NO_POLES)
    return ResponseCurve(t, vals, {"np": vals.copy(), "branch": np.zeros(t.shape)}, cls, STABLE_SPLIT)


def creep_rate(m: ModelSpec, t, *, form: str = "generic", rp_tol: float = RP_TOL,
               spec: QuadSpec = DEFAULT_SPEC):
    """Time derivative of the creep compliance.

    ``form="generic"`` integrates rho^(-xi) K/|phi_eps|^2 e^{-rho t} plus the pole terms;
    ``form="ml"`` (two-term phi_eps only) sums the integral representations of the
    kernels e_{p, xi+p-p_i, b1/b2}.
    """
    tt = _grid(t)
    if form == "ml":
        if len(m.phi_epsilon.terms) != 2:
            raise WrongModelShape("the kernel form needs a two-term phi_eps")
        (b1, _), (b2, p) = m.phi_epsilon.terms
        lam = b1 / b2
        cp, sp = math.cos(p * math.pi), math.sin(p * math.pi)
        parts = []
        for ai, pi in m.phi_sigma.terms:
            zeta = m.xi + p - pi
            parts.append((ai / b2, math.sin((zeta - p) * math.pi), math.sin(zeta * math.pi), p - zeta))
        out = []
        for x in tt:
            def f(rho, x=x):
                if rho == 0.0:
                    return 0.0
                rp_ = rho**p
                d = (rp_ * cp + lam) ** 2 + (rp_ * sp) ** 2
                return math.fsum(w * (lam * s1 + rp_ * s2) * rho**e for w, s1, s2, e in parts) \
                    / d * math.exp(-rho * x)
            out.append(integrate_semi_infinite(f, x, spec, breakpoints=(lam ** (1.0 / p),)).value / math.pi)
        out = np.array(out)
    elif form == "generic":
        _require_xi(m, "creep")
        cls = classify_creep(m, rp_tol)
        cut = _Cut(m, m.phi_epsilon)
        xi = m.xi
        bps = _creep_breakpoints(m, cls)
        ends = creep_ends(m)
        lower, _ = _limits(ends, None, spec)
        out = []
        for x in tt:
            def f(rho, x=x):
                if rho == 0.0:
                    return 0.0
                return rho ** (-xi) * cut.K(rho) / cut.D(rho) * math.exp(-rho * x)
            if cls.kind == REAL_POLE:
                res = integrate_principal_value(f, cls.rho, x, spec, breakpoints=bps, lower=lower)
            else:
                res = integrate_semi_infinite(f, x, spec, breakpoints=bps, lower=lower)
            closed = float(_small_damped(ends.small, x)) if ends.small else 0.0
            out.append((res.value + closed) / math.pi)
        out = np.array(out)
        if cls.kind != NO_POLES:
            c, s0 = _creep_residue(m, cls)
            mult = 1.0 if cls.kind == REAL_POLE else 2.0
            out = out + mult * np.real(c * s0 * np.exp(s0 * tt))
    else:
        raise ValueError(f"unknown form {form!r}")
    return float(out[0]) if np.ndim(t) == 0 else out


# --- kernel families on many time points ----------------------------------------------


def _decade_groups(t: np.ndarray):
    """Index groups of t whose values span at most a factor of 10."""
    order = np.argsort(t, kind="stable")
    groups, start = [], 0
    for i in range(1, len(order) + 1):
        if i == len(order) or t[order[i]] > 10.0 * t[order[start]]:
            groups.append(order[start:i])
            start = i
    return groups


def _h(s0: complex, t: np.ndarray, k: int) -> np.ndarray:
    """k-th derivative (k >= 0) or primitive from 0 (k = -1) of e^{s0 t}."""
    if k == -1:
        return np.expm1(s0 * t) / s0
    return s0**k * np.exp(s0 * t)


def _family(m: ModelSpec, t, which: str, k: int, rp_tol: float, spec: QuadSpec) -> np.ndarray:
    t = _grid(t)
    xi = m.xi
    _require_xi(m, "relaxation" if which == "relax" else "creep")
    if which == "relax":
        cls = classify_relaxation(m, rp_tol)
        cut = _Cut(m, m.phi_sigma)
        bps = _relax_breakpoints(m, cls)
        ends = relaxation_ends(m)
        shift = xi - 1.0
        saturating = k == -1
        extra = 0.0 if saturating else float(k)
        sign = 1.0 if saturating else (-1.0) ** k
    else:
        cls = classify_creep(m, rp_tol)
        cut = _Cut(m, m.phi_epsilon)
        bps = _creep_breakpoints(m, cls)
        ends = creep_ends(m)
        _check_glass(m)
        shift = -xi
        saturating = k == 0
        extra = 0.0 if saturating else float(k - 1)
        sign = 1.0 if saturating else (-1.0) ** (k - 1)
    out = np.empty(t.shape)
    for idx in _decade_groups(t):
        tg = t[idx]

        def f(rho, tg=tg):
            if rho == 0.0:
                return np.zeros(tg.shape)
            main = rho**shift * cut.K(rho) / cut.D(rho)
            if saturating:
                return main * (-np.expm1(-rho * tg) / rho)
            return sign * rho**extra * main * np.exp(-rho * tg)

        t_ref = float(tg.min())
        lower, upper = _limits(ends, t_ref if saturating else None, spec)
        kw = dict(damped=not saturating, breakpoints=bps, vector=True, lower=lower, upper=upper)
        if cls.kind == REAL_POLE:
            res = integrate_principal_value(f, cls.rho, t_ref, spec, **kw)
        else:
            res = integrate_semi_infinite(f, t_ref, spec, **kw)
        closed = np.zeros(tg.shape)
        if ends.small:
            closed += _small_saturating(ends.small, tg) if saturating \
                else sign * _small_damped(ends.small, tg, extra)
        if upper is not None:
            closed += _large_saturating(ends.large, upper)
        out[idx] = (res.value + closed) / math.pi
    if cls.kind != NO_POLES:
        mult = 1.0 if cls.kind == REAL_POLE else 2.0
        if which == "relax":
            c, s0 = _relax_residue(m, cls)
            out += mult * np.real(c * _h(s0, t, k))
        else:
            c, s0 = _creep_residue(m, cls)
            out += mult * np.real(c * s0 * _h(s0, t, k - 1))
    return out


def relaxation_family(m: ModelSpec, t, k: int = 0, *, rp_tol: float = RP_TOL,
                      spec: QuadSpec = DEFAULT_SPEC) -> np.ndarray:
    """sigma_sr^(k) on many time points in one vectorised pass.

    k = -1 returns the primitive int_0^t sigma_sr, k = 0, 1, 2 the modulus and its
    first two derivatives.
    """
    if k not in (-1, 0, 1, 2):
        raise ValueError("k must be -1, 0, 1 or 2")
    return _family(m, t, "relax", k, rp_tol, spec)


def creep_family(m: ModelSpec, t, k: int = 0, *, rp_tol: float = RP_TOL,
                 spec: QuadSpec = DEFAULT_SPEC) -> np.ndarray:
    """eps_cr^(k), k in {0, 1, 2}, on many time points in one vectorised pass."""
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    return _family(m, t, "creep", k, rp_tol, spec)
