import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fraczener.cli import (
    ENERGY_HEADER,
    EXAMPLE_ROWS,
    EXIT_INVALID,
    EXIT_OK,
    EXIT_USAGE,
    PRESETS,
    RESPONSE_HEADER,
    fixtures,
    fmt,
    main,
)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_validate_case1(capsys):
    code, out, _ = _run(capsys, "validate", "--preset", "case-np")
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["overall"] == "NarrowedOK"
    assert body["K_scan"]["nonnegative"] is True


def test_validate_failure_writes_report(capsys, tmp_path):
    desc = {"code": "ID.ID", "orders": {"alpha": 0.2, "beta": 0.3, "mu": 0.3}, "a": [1, 1], "b": [1, 1]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(desc))
    report = tmp_path / "r.json"
    code, _, _ = _run(capsys, "validate", "--model", str(path), "--out", str(report))
    assert code == EXIT_INVALID
    assert json.loads(report.read_text())["overall"] == "ThermoFail"
    code, out, err = _run(capsys, "relax", "--model", str(path), "--points", "3")
    assert code == EXIT_INVALID and out == "" and "ThermoFail" in err


def test_relax_ccp_sign_changes(capsys):
    code, out, _ = _run(capsys, "relax", "--preset", "case-ccp", "--tmin", "1e-2", "--tmax", "1e2",
                        "--points", "120")
    assert code == EXIT_OK
    rows = _rows(out)
    assert tuple(rows[0]) == RESPONSE_HEADER
    v = np.array([float(r[1]) for r in rows[1:]])
    assert np.count_nonzero(np.diff(np.sign(v))) >= 1
    assert all(r[4] == "integral" for r in rows[1:])


def test_poles(capsys):
    code, out, _ = _run(capsys, "poles", "--preset", "case-rp", "--rp-tol", "1e-3")
    assert code == EXIT_OK
    body = json.loads(out)["phi_sigma"]
    assert body["kind"] == "rp"
    assert body["rho"] == pytest.approx(0.712, abs=1e-3)
    code, out, _ = _run(capsys, "poles", "--preset", "case-rp-exact")
    assert json.loads(out)["phi_sigma"]["kind"] == "rp"


def test_creep_methods(capsys):
    vals = {}
    for meth in ("integral", "stable", "ml"):
        code, out, _ = _run(capsys, "creep", "--preset", "case-np", "--method", meth,
                            "--tmin", "0.1", "--tmax", "10", "--points", "3")
        assert code == EXIT_OK
        vals[meth] = [float(r[1]) for r in _rows(out)[1:]]
    assert vals["stable"] == pytest.approx(vals["integral"], rel=1e-6)
    assert vals["ml"] == pytest.approx(vals["integral"], rel=1e-6)


def test_json_format(capsys):
    code, out, _ = _run(capsys, "relax", "--preset", "case-np", "--points", "2", "--format", "json")
    body = json.loads(out)
    assert body["columns"] == list(RESPONSE_HEADER) and len(body["rows"]) == 2


def test_asympt(capsys):
    code, out, _ = _run(capsys, "asympt", "--preset", "case-np", "--format", "json")
    assert code == EXIT_OK
    body = json.loads(out)
    assert body["relax_long"]["terms"][0]["coefficient"] == pytest.approx(0.7191, abs=1e-4)


def test_asympt_wrong_shape(capsys, tmp_path):
    desc = {"code": "ID.ID", "orders": {"alpha": 0.4, "beta": 0.5, "mu": 0.1}, "a": [1.5, 0.7],
            "b": [1.5, 0.7]}
    path = tmp_path / "m.json"
    path.write_text(json.dumps(desc))
    code, _, err = _run(capsys, "asympt", "--model", str(path))
    assert code == EXIT_USAGE and "WrongModelShape" in err


def test_two_term_fixture_is_refused(capsys):
    # b1/b2 = 0.75 breaks the coefficient bound of ID.ID: reported and gated
    code, out, _ = _run(capsys, "validate", "--preset", "id-id")
    assert code == EXIT_INVALID and json.loads(out)["overall"] == "ThermoFail"
    code, _, _ = _run(capsys, "relax", "--preset", "id-id", "--points", "2")
    assert code == EXIT_INVALID


def test_energy_command(capsys, tmp_path):
    t = np.linspace(0, 2, 401)
    hist = tmp_path / "h.csv"
    hist.write_text("t,value,kind\n" + "".join(f"{fmt(x)},{fmt(1 - math.exp(-x))},strain\n" for x in t))
    code, out, _ = _run(capsys, "energy", "--preset", "case-np", "--history", str(hist))
    assert code == EXIT_OK
    rows = _rows(out)
    assert tuple(rows[0]) == ENERGY_HEADER and len(rows) == 402
    code, _, err = _run(capsys, "energy", "--preset", "case-np")
    assert code == EXIT_USAGE and "--history" in err


def test_ml_command(capsys):
    code, out, _ = _run(capsys, "ml", "--xi", "0.5", "--zeta", "1", "--z", "-1")
    assert code == EXIT_OK
    assert float(_rows(out)[1][1]) == pytest.approx(0.427583576155807, rel=1e-12)
    code, _, _ = _run(capsys, "ml", "--zeta", "1")
    assert code == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    [],
    ["relax"],
    ["relax", "--preset", "case-np", "--tmin", "0"],
    ["relax", "--preset", "case-np", "--points", "1"],
    ["relax", "--preset", "case-np", "--method", "nope"],
    ["relax", "--model", "/nonexistent.json"],
    ["fly"],
])
def test_usage_errors(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == EXIT_USAGE
    assert err


def test_bad_descriptor(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"code": "XX.YY", "orders": {}, "a": [1], "b": [1]}))
    code, _, err = _run(capsys, "poles", "--model", str(path))
    assert code == EXIT_INVALID and "invalid model" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fraczener", "validate", "--preset", "case-ccp"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["overall"] == "ThermoOnly"


def test_fmt_round_trip():
    for x in (0.1, 1 / 3, 2.0**-1074, 1e308, -0.0):
        assert float(fmt(x)) == x
    assert fmt(math.inf) == "inf" and fmt(math.nan) == "nan"


@pytest.fixture(scope="module")
def fixture_dirs(tmp_path_factory):
    a, b, c = (tmp_path_factory.mktemp(n) for n in ("a", "b", "c"))
    return fixtures(str(a)), fixtures(str(b)), fixtures(str(c), jobs=2)


def test_fixture_contents(fixture_dirs):
    files = fixture_dirs[0]
    names = sorted(p.rsplit("/", 1)[1] for p in files)
    assert names == sorted(["parameters.json", "relax_case-np.csv", "relax_case-rp.csv",
                            "relax_case-ccp.csv", "creep_case-np.csv", "creep_case-ccp.csv",
                            "asymptotics_case-np.csv", "asymptotics_case-np.json"])
    params = json.loads(open(next(p for p in files if p.endswith("parameters.json"))).read())
    assert params == {k: PRESETS[k] for k in EXAMPLE_ROWS}
    creep_file = next(p for p in files if p.endswith("creep_case-np.csv"))
    rows = _rows(open(creep_file).read())
    assert rows[0] == ["t", "integral", "stable", "ml"] and len(rows) == 201


def test_fixtures_deterministic(fixture_dirs):
    a, b, c = fixture_dirs
    for pa, pb, pc in zip(a, b, c):
        ba = open(pa, "rb").read()
        assert ba == open(pb, "rb").read() == open(pc, "rb").read()
