import csv
import json

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from conftest import SEED
from sdlab import cli
from sdlab.certificates import suff_m2
from sdlab.validation import ConfigError

BASE = {"command": "certify",
        "problem": {"domain": {"a": 0, "b": 1}, "K": {"kind": "const", "c": 1},
                    "M": {"kind": "const", "c": 0.1}, "alpha": 0.25, "gamma": 0.25}}


def _cfg(**over):
    d = json.loads(json.dumps(BASE))
    for k, v in over.items():
        d[k] = v
    return d


def _write(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_defaults():
    cfg = cli.config_from_dict(_cfg())
    assert cfg.problem.n == 400 and cfg.problem.grading is None
    assert cfg.tol == 1e-10 and cfg.max_iter == 500 and cfg.relaxation == 1.0
    assert cfg.problem.lam == 1.0 and cfg.problem.p == 2.0
    assert cfg.to_dict()["numerics"]["grading"] == "auto"


def test_every_violation_is_listed():
    bad = _cfg(problem={"domain": {"a": 1, "b": 0}, "K": {"kind": "const", "c": -1},
                        "M": {"kind": "const", "c": 1}, "alpha": -1, "gamma": 0.3})
    with pytest.raises(ConfigError) as exc:
        cli.config_from_dict(bad)
    msgs = exc.value.violations
    assert len(msgs) >= 2
    assert any("alpha" in m for m in msgs)


def test_negative_coefficient_rejected():
    bad = _cfg()
    bad["problem"]["K"] = {"kind": "sinesign", "frequency": 1, "offset": 0.0}
    with pytest.raises(ConfigError, match="K must be nonnegative"):
        cli.config_from_dict(bad)


def test_ball_with_interval_command():
    bad = _cfg(command="solve")
    bad["problem"]["domain"] = {"ball": {"R": 1, "N": 2}}
    with pytest.raises(ConfigError, match="radial-certify and radial-solve"):
        cli.config_from_dict(bad)


def test_radial_command_needs_ball():
    with pytest.raises(ConfigError, match="ball domain"):
        cli.config_from_dict(_cfg(command="radial-solve"))


def test_unknown_command_and_invalid_json():
    with pytest.raises(ConfigError, match="command must be one of"):
        cli.config_from_dict(_cfg(command="plot"))
    with pytest.raises(ConfigError, match="not valid JSON"):
        cli.parse_config("{")


def test_certify_margin_matches_library():
    cfg = cli.config_from_dict(_cfg())
    report = cli.run(cfg)
    assert report.exit_code == cli.EXIT_OK
    m2 = next(c for c in report.data["certificates"] if c["certificate_id"] == "M2")
    assert m2["holds"]
    assert m2["margin"] == pytest.approx(suff_m2(cfg.problem).margin, rel=1e-14)


def test_certify_fails_for_heavy_M():
    d = _cfg()
    d["problem"]["M"] = {"kind": "const", "c": 50.0}
    assert cli.run(cli.config_from_dict(d)).exit_code == cli.EXIT_CERT_FAILS


def test_solve_reports_converged_solution(tmp_path):
    d = _cfg(command="solve", numerics={"n": 200})
    d["problem"]["K"] = {"kind": "power", "s": 0.5, "t": 0.5, "c": 3}
    d["problem"]["M"] = {"kind": "power", "s": 0.5, "t": 0.5, "c": 1}
    d["problem"]["alpha"] = d["problem"]["gamma"] = 0.5
    report = cli.run(cli.config_from_dict(d))
    assert report.exit_code == cli.EXIT_OK
    assert report.data["solve"]["status"] == "converged"
    assert report.data["solve"]["weak_residual"] <= 1e-6
    header, rows = report.tables["solution.csv"]
    assert header == ("x", "u", "delta", "pointwise_residual")
    assert len(rows) == 201
    assert rows[0][1] == 0.0 and rows[-1][1] == 0.0


def test_invalid_bracket_is_numerical_failure():
    d = _cfg(command="threshold", threshold={"bracket": [1.5, 2.0], "tol": 0.01})
    d["problem"]["M"] = {"kind": "const", "c": 1}
    d["problem"]["alpha"] = d["problem"]["gamma"] = 1
    report = cli.run(cli.config_from_dict(d))
    assert report.exit_code == cli.EXIT_NUMERICAL
    assert "not solvable" in report.data["error"]


def test_hypothesis_violation_exit_code():
    d = _cfg(command="solve", solver={"method": "M2"})
    d["problem"]["gamma"] = 0.3
    report = cli.run(cli.config_from_dict(d))
    assert report.exit_code == cli.EXIT_CERT_FAILS
    assert "HypothesisViolation" in report.data["error"]


def test_tables_and_headers(tmp_path):
    sweep = _cfg(command="sweep", sweep={"axis": "lambda", "values": [0.5, 1.5]}, numerics={"n": 100})
    sweep["problem"]["M"] = {"kind": "const", "c": 1}
    sweep["problem"]["alpha"] = sweep["problem"]["gamma"] = 1
    radial = _cfg(command="radial-solve", numerics={"n": 100, "relaxation": 0.8})
    radial["problem"]["domain"] = {"ball": {"R": 1, "N": 3}}
    for d, name, header in ((sweep, "sweep.csv", ["value", "status", "positivity_margin", "residual"]),
                            (radial, "radial.csv", ["r", "u", "delta"])):
        out = tmp_path / d["command"]
        code = cli.main([d["command"], "--config", _write(tmp_path, d, d["command"] + ".json"),
                         "--out", str(out)])
        assert code == cli.EXIT_OK
        with open(out / name, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == header and len(rows) > 2
        assert json.loads((out / "report.json").read_text())["exit_code"] == 0


def test_sweep_rows_follow_lambda(tmp_path):
    d = _cfg(command="sweep", sweep={"axis": "lambda", "values": [0.5, 1.5]}, numerics={"n": 100})
    d["problem"]["M"] = {"kind": "const", "c": 1}
    d["problem"]["alpha"] = d["problem"]["gamma"] = 1
    rows = cli.run(cli.config_from_dict(d)).data["sweep"]["rows"]
    assert [r[1] for r in rows] == ["converged_positive", "no_solution_evidence"]


def test_emit_is_byte_deterministic(tmp_path):
    cfg = cli.config_from_dict(_cfg())
    cli.emit(cli.run(cfg), str(tmp_path / "a" / "r.json"))
    cli.emit(cli.run(cfg), str(tmp_path / "b" / "r.json"))
    assert (tmp_path / "a" / "r.json").read_bytes() == (tmp_path / "b" / "r.json").read_bytes()


def test_config_echo_round_trip():
    d = _cfg(command="threshold", threshold={"bracket": [0.01, 2.0], "tol": 0.01},
             numerics={"n": 123, "grading": 3, "tol": 1e-9, "max_iter": 77, "relaxation": 0.5})
    cfg = cli.config_from_dict(d)
    echo = cfg.to_dict()
    assert cli.config_from_dict(echo) == cfg
    assert echo["numerics"] == {"n": 123, "grading": 3.0, "tol": 1e-9, "max_iter": 77, "relaxation": 0.5}


def test_command_line_overrides(tmp_path):
    path = _write(tmp_path, _cfg())
    assert cli.main(["certify", "--config", path, "--out", str(tmp_path / "o"), "--n", "64",
                     "--tol", "1e-8"]) == 0
    data = json.loads((tmp_path / "o" / "report.json").read_text())
    assert data["config"]["numerics"]["n"] == 64 and data["config"]["numerics"]["tol"] == 1e-8
    assert data["grid"]["n"] == 64
    with pytest.raises(ConfigError):
        cli.with_overrides(cli.config_from_dict(_cfg()), n=4)


def test_unreadable_or_mismatched_config(tmp_path, capsys):
    assert cli.main(["certify", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    path = _write(tmp_path, _cfg(command="solve"))
    assert cli.main(["certify", "--config", path, "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert "does not match" in capsys.readouterr().err


def test_sign_changing_coefficient():
    d = _cfg()
    d["problem"] = {"domain": {"a": 0, "b": 1}, "m": {"kind": "sinesign", "frequency": 2, "offset": 0.5},
                    "alpha": 0.1, "gamma": 0.1}
    cfg = cli.config_from_dict(d)
    assert cfg.m is not None and cfg.to_dict()["problem"]["m"]["kind"] == "sinesign"
    ids = {c["certificate_id"] for c in cli.run(cfg).data["certificates"]}
    assert "SIGN_CHANGING_NEC" in ids


@seed(SEED)
@settings(max_examples=25)
@given(x=st.one_of(st.floats(allow_nan=True, allow_infinity=True), st.integers(-10**6, 10**6)))
def test_fmt_is_json_safe(x):
    out = cli._fmt(x)
    assert json.loads(json.dumps(out, allow_nan=False)) == out
