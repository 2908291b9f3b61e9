"""Command-line entry point.

    fraczener validate --model m.json
    fraczener poles    --preset case-ccp
    fraczener relax    --model m.json --tmin 1e-2 --tmax 1e2 --points 100 --out r.csv
    fraczener creep    --preset case-np --method stable
    fraczener asympt   --preset case-np --format csv
    fraczener energy   --model m.json --history eps.csv
    fraczener ml       --xi 0.5 --zeta 1 --lam 2
    fraczener fixtures --out fixtures/

Exit codes: 0 success, 2 the model failed validation (the constraint report
is still written), 1 usage or evaluation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics, constraints, energy, response
from .errors import FracZenerError
from .mittag_leffler import ml_E, ml_e
from .model_catalog import ModelSpec, model_from_descriptor
from .pole_finder import RP_TOL, classify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2

RESPONSE_HEADER = ("t", "value", "np", "branch", "method")
ENERGY_HEADER = ("t", "P", "W", "Pdiss", "residual")

_IIDID = dict(alpha=0.35, beta=0.55, nu=0.4)

# parameter rows of the numerical examples, plus a two-term fixture
PRESETS: dict[str, dict] = {
    "case-np": {"code": "I+ID.ID", "orders": _IIDID, "a": [0.05, 1.5, 0.45], "b": [0.7, 0.95]},
    "case-rp": {"code": "I+ID.ID", "orders": _IIDID, "a": [11.0, 28.4029, 20.27], "b": [7.0, 9.5]},
    "case-ccp": {"code": "I+ID.ID", "orders": _IIDID, "a": [11.0, 15.0, 20.27], "b": [7.0, 9.5]},
    "case-rp-exact": {"code": "I+ID.ID", "orders": _IIDID,
                        "a": [11.0, 28.402694211492754, 20.27], "b": [7.0, 9.5]},
    "id-id": {"code": "ID.ID", "orders": dict(alpha=0.3, beta=0.4, mu=0.2),
              "a": [1.0, 2.0], "b": [3.0, 4.0]},
}
EXAMPLE_ROWS = ("case-np", "case-rp", "case-ccp")

FIXTURE_GRID = dict(t_min=1e-3, t_max=1e3, points=200, spacing="log")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- formatting ---------------------------------------------------------------------


def fmt(x) -> str:
    """17 significant digits; nan/inf spelled out."""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def to_json(obj) -> str:
    """JSON text with floats written like the CSV files (non-finite floats become null)."""
    def enc(o):
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, (float, np.floating)):
            return fmt(o) if math.isfinite(o) else "null"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, dict):
            return "{" + ", ".join(f"{json.dumps(str(k))}: {enc(v)}" for k, v in o.items()) + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            return "[" + ", ".join(enc(v) for v in o) + "]"
        raise TypeError(f"cannot encode {type(o).__name__}")
    return enc(obj) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def table(header, rows, form: str) -> str:
    if form == "json":
        return to_json({"columns": list(header), "rows": [list(r) for r in rows]})
    return to_csv(header, rows)


# --- configuration ------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    t_min: float = 1e-3
    t_max: float = 1e3
    points: int = 200
    spacing: str = "log"

    def __post_init__(self):
        if self.points < 2:
            raise UsageError("--points must be at least 2")
        if self.spacing not in ("log", "linear"):
            raise UsageError("--spacing must be log or linear")
        if not self.t_max > self.t_min:
            raise UsageError("--tmax must exceed --tmin")

    def times(self) -> np.ndarray:
        if self.spacing == "log":
            if self.t_min <= 0:
                raise UsageError("a log grid needs --tmin > 0")
            return np.logspace(math.log10(self.t_min), math.log10(self.t_max), self.points)
        return np.linspace(self.t_min, self.t_max, self.points)


@dataclass
class RunConfig:
    command: str
    model: dict | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    method: str = "auto"
    out: str | None = None
    format: str = "csv"
    rp_tol: float = RP_TOL
    jobs: int = 1
    extra: dict = field(default_factory=dict)


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# --- grid evaluation ----------------------------------------------------------------


def _response_point(args) -> tuple:
    """One row; every time point is evaluated on its own so the job count cannot change it."""
    which, desc, t, method, rp_tol = args
    m = model_from_descriptor(desc)
    f = response.relaxation if which == "relax" else response.creep
    r = f(m, [t], method=method, rp_tol=rp_tol)
    return r.as_rows()[0]


def response_rows(which: str, desc: dict, t: np.ndarray, method: str, rp_tol: float,
                  jobs: int = 1) -> list[tuple]:
    tasks = [(which, desc, float(tt), method, rp_tol) for tt in t]
    if jobs <= 1:
        return [_response_point(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(_response_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


# --- commands -----------------------------------------------------------------------


def _model(cfg: RunConfig) -> ModelSpec:
    return model_from_descriptor(cfg.model)


def _gate(m: ModelSpec) -> int | None:
    """Refuse thermodynamically inadmissible parameters; the report goes to stderr."""
    rep = constraints.check_narrowed(m)
    if rep.overall == constraints.THERMO_FAIL:
        sys.stderr.write(to_json(rep.as_dict()))
        return EXIT_INVALID
    return None


def cmd_validate(cfg: RunConfig) -> int:
    m = _model(cfg)
    rep = constraints.check_narrowed(m)
    scan = constraints.K_nonneg_scan(m)
    body = rep.as_dict()
    body["K_scan"] = {"nonnegative": scan.nonnegative, "first_violation": scan.first_violation}
    _emit(to_json(body), cfg.out)
    return EXIT_INVALID if rep.overall == constraints.THERMO_FAIL else EXIT_OK


def cmd_poles(cfg: RunConfig) -> int:
    m = _model(cfg)
    body = {"code": m.code,
            "phi_sigma": classify(m.phi_sigma, cfg.rp_tol).as_dict(),
            "phi_epsilon": classify(m.phi_epsilon, cfg.rp_tol).as_dict()}
    _emit(to_json(body), cfg.out)
    return EXIT_OK


def cmd_response(cfg: RunConfig) -> int:
    m = _model(cfg)
    if (rc := _gate(m)) is not None:
        return rc
    rows = response_rows(cfg.command, m.to_descriptor(), cfg.grid.times(), cfg.method,
                         cfg.rp_tol, cfg.jobs)
    _emit(table(RESPONSE_HEADER, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_asympt(cfg: RunConfig) -> int:
    m = _model(cfg)
    if (rc := _gate(m)) is not None:
        return rc
    series = {k: asymptotics.series(m, k) for k in asymptotics.SERIES}
    if cfg.format == "json":
        _emit(to_json({k: s.as_dict() for k, s in series.items()}), cfg.out)
        return EXIT_OK
    t = cfg.grid.times()
    cols = [s(t) for s in series.values()]
    _emit(to_csv(("t", *series), zip(t, *cols)), cfg.out)
    return EXIT_OK


def read_history(path: str) -> energy.History:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"t", "value", "kind"} <= set(rows[0]):
        raise UsageError("history CSV needs the columns t,value,kind")
    kinds = {r["kind"].strip() for r in rows}
    if len(kinds) != 1:
        raise UsageError("history CSV mixes kinds")
    t = np.array([float(r["t"]) for r in rows])
    v = np.array([float(r["value"]) for r in rows])
    return energy.History(t, v, kinds.pop())


def cmd_energy(cfg: RunConfig) -> int:
    m = _model(cfg)
    if (rc := _gate(m)) is not None:
        return rc
    path = cfg.extra.get("history")
    if not path:
        raise UsageError("energy needs --history")
    try:
        h = read_history(path)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    f = energy.energy_from_strain if h.kind == energy.STRAIN else energy.energy_from_stress
    _emit(table(ENERGY_HEADER, f(m, h).as_rows(), cfg.format), cfg.out)
    return EXIT_OK


def cmd_ml(cfg: RunConfig) -> int:
    xi, zeta = cfg.extra["xi"], cfg.extra["zeta"]
    if xi is None or zeta is None:
        raise UsageError("ml needs --xi and --zeta")
    z = cfg.extra.get("z")
    if z:
        rows = [(zz, ml_E(xi, zeta, zz)) for zz in z]
        _emit(table(("z", "value"), rows, cfg.format), cfg.out)
        return EXIT_OK
    t = cfg.grid.times()
    vals = ml_e(xi, zeta, cfg.extra["lam"], t)
    _emit(table(("t", "value"), zip(t, vals), cfg.format), cfg.out)
    return EXIT_OK


def fixtures(out_dir: str, jobs: int = 1) -> list[str]:
    """Write the example curves: relaxation for the three parameter rows, creep for the
    no-pole and complex-pair rows (integral, stable split and Mittag-Leffler columns),
    the asymptotic overlays of the no-pole row and the parameter rows themselves."""
    os.makedirs(out_dir, exist_ok=True)
    t = GridSpec(**FIXTURE_GRID).times()
    written = []

    def put(name, text):
        p = os.path.join(out_dir, name)
        with open(p, "w", newline="") as fh:
            fh.write(text)
        written.append(p)

    put("parameters.json", to_json({k: PRESETS[k] for k in EXAMPLE_ROWS}))
    for key in EXAMPLE_ROWS:
        rows = response_rows("relax", PRESETS[key], t, "integral", RP_TOL, jobs)
        put(f"relax_{key}.csv", to_csv(RESPONSE_HEADER, rows))
    for key in ("case-np", "case-ccp"):
        cols = {meth: [r[1] for r in response_rows("creep", PRESETS[key], t, meth, RP_TOL, jobs)]
                for meth in ("integral", "stable", "ml")}
        put(f"creep_{key}.csv", to_csv(("t", *cols), zip(t, *cols.values())))
    m = model_from_descriptor(PRESETS["case-np"])
    series = {k: asymptotics.series(m, k) for k in asymptotics.SERIES}
    put("asymptotics_case-np.csv",
        to_csv(("t", *series), zip(t, *(s(t) for s in series.values()))))
    put("asymptotics_case-np.json", to_json({k: s.as_dict() for k, s in series.items()}))
    return written


def cmd_fixtures(cfg: RunConfig) -> int:
    for p in fixtures(cfg.out or "fixtures", cfg.jobs):
        sys.stdout.write(p + "\n")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "poles": cmd_poles, "relax": cmd_response,
            "creep": cmd_response, "asympt": cmd_asympt, "energy": cmd_energy,
            "ml": cmd_ml, "fixtures": cmd_fixtures}
MODEL_COMMANDS = ("validate", "poles", "relax", "creep", "asympt", "energy")


# --- argument parsing ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fraczener", description="Fractional anti-Zener and Zener models.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, model=True, grid=True):
        if model:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--model", help="model descriptor JSON file")
            g.add_argument("--preset", choices=sorted(PRESETS), help="built-in parameter row")
        if grid:
            sp.add_argument("--tmin", type=float, default=1e-3)
            sp.add_argument("--tmax", type=float, default=1e3)
            sp.add_argument("--points", type=int, default=200)
            sp.add_argument("--spacing", choices=("log", "linear"), default="log")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--rp-tol", type=float, default=RP_TOL,
                        help="relative band that counts as a zero on the cut")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes")

    common(sub.add_parser("validate", help="constraint report"), grid=False)
    common(sub.add_parser("poles", help="zeros of phi_sigma and phi_epsilon"), grid=False)
    for name, meths in (("relax", ("auto", "integral", "ml")),
                        ("creep", ("auto", "integral", "ml", "stable"))):
        sp = sub.add_parser(name, help=f"{'relaxation modulus' if name == 'relax' else 'creep compliance'}")
        common(sp)
        sp.add_argument("--method", choices=meths, default="auto")
    common(sub.add_parser("asympt", help="short/long-time series (I+ID.ID)"))
    sp = sub.add_parser("energy", help="power, stored energy and dissipation")
    common(sp, grid=False)
    sp.add_argument("--history", help="CSV with columns t,value,kind")
    sp = sub.add_parser("ml", help="Mittag-Leffler function")
    common(sp, model=False)
    sp.add_argument("--xi", type=float)
    sp.add_argument("--zeta", type=float)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--z", type=float, nargs="+", help="evaluate E_{xi,zeta}(z) instead")
    sp = sub.add_parser("fixtures", help="regenerate the example curves")
    sp.add_argument("--out", default="fixtures", help="output directory")
    sp.add_argument("--jobs", type=int, default=1)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.command is None:
        raise UsageError("a command is required")
    model = None
    if ns.command in MODEL_COMMANDS:
        if ns.preset:
            model = PRESETS[ns.preset]
        elif ns.model:
            try:
                with open(ns.model) as fh:
                    model = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read model {ns.model}: {exc}") from exc
        else:
            raise UsageError("--model or --preset is required")
    grid = GridSpec()
    if hasattr(ns, "tmin"):
        grid = GridSpec(ns.tmin, ns.tmax, ns.points, ns.spacing)
        if ns.command in ("relax", "creep") and grid.t_min <= 0:
            raise UsageError("--tmin must be positive")
    if getattr(ns, "jobs", 1) < 1:
        raise UsageError("--jobs must be at least 1")
    extra = {k: getattr(ns, k) for k in ("history", "xi", "zeta", "lam", "z") if hasattr(ns, k)}
    return RunConfig(command=ns.command, model=model, grid=grid,
                     method=getattr(ns, "method", "auto"), out=ns.out,
                     format=getattr(ns, "format", "csv"),
                     rp_tol=getattr(ns, "rp_tol", RP_TOL), jobs=ns.jobs, extra=extra)


def run(cfg: RunConfig) -> int:
    if cfg.command in MODEL_COMMANDS:
        try:
            _model(cfg)
        except (FracZenerError, KeyError, TypeError) as exc:
            sys.stderr.write(f"invalid model: {exc}\n")
            return EXIT_INVALID
    return COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(build_parser().parse_args(argv))
        return run(cfg)
    except UsageError as exc:
        sys.stderr.write(f"fraczener: {exc}\n")
        return EXIT_USAGE
    except (FracZenerError, ValueError, OSError) as exc:
        sys.stderr.write(f"fraczener: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
