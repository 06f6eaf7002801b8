"""Command-line front end: JSON config in, JSON report (and CSV tables) out.

    sdlab certify --config run.json --out results/

Exit codes: 0 success, 1 invalid configuration, 2 the certificates were
computed but do not establish existence (or a necessary condition fails),
3 numerical failure (iteration did not converge, invalid bracket, ...).
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .certificates import ProblemSpec, certify, certify_sign_changing, sign_changing_problem
from .grid import BallDomain, Domain1D, FunctionSpec
from .radial import estimate_morel_constants, radial_certify, sign_changing_screen
from .solver import constructive_cone, fixed_point_iterate, hat_residuals, nonlinearity
from .threshold import estimate_lambda0, sweep
from .validation import ConfigError, HypothesisViolation, SDLError

logger = logging.getLogger(__name__)

COMMANDS = ("certify", "solve", "threshold", "sweep", "radial-certify", "radial-solve")
RADIAL_COMMANDS = ("radial-certify", "radial-solve")
SUFFICIENT = ("M2", "HIP", "ALGO_LOWER", "SIGN_CHANGING_I", "SIGN_CHANGING_II", "BOLA",
              "ALGO_LOWER_RADIAL")
NECESSARY = ("NECESSARY_UPPER", "SIGN_CHANGING_NEC", "NECESSARY_UPPER_RADIAL")

EXIT_OK, EXIT_CONFIG, EXIT_CERT_FAILS, EXIT_NUMERICAL = 0, 1, 2, 3

DEFAULT_NUMERICS = {"n": 400, "grading": "auto", "tol": 1e-10, "max_iter": 500, "relaxation": 1.0}


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: ProblemSpec
    m: FunctionSpec = None  # sign-changing coefficient, when given instead of K and M
    tol: float = 1e-10
    max_iter: int = 500
    relaxation: float = 1.0
    method: str = "picard"
    bracket: tuple = None
    threshold_tol: float = 1e-3
    sweep_axis: str = None
    sweep_values: tuple = None
    morel: tuple = ()  # sorted (key, value) pairs
    output_path: str = "report.json"

    def to_dict(self):
        prob = self.problem
        pdict = {"domain": prob.domain.to_dict(), "alpha": prob.alpha, "gamma": prob.gamma,
                 "lambda": prob.lam, "p": "inf" if math.isinf(prob.p) else prob.p}
        if self.m is not None:
            pdict["m"] = self.m.to_dict()
        else:
            pdict["K"], pdict["M"] = prob.K.to_dict(), prob.M.to_dict()
        out = {
            "command": self.command,
            "problem": pdict,
            "numerics": {"n": prob.n, "grading": "auto" if prob.grading is None else prob.grading,
                         "tol": self.tol, "max_iter": self.max_iter,
                         "relaxation": self.relaxation},
            "solver": {"method": self.method},
            "output_path": self.output_path,
        }
        if self.bracket is not None:
            out["threshold"] = {"bracket": list(self.bracket), "tol": self.threshold_tol}
        if self.sweep_axis is not None:
            out["sweep"] = {"axis": self.sweep_axis, "values": list(self.sweep_values)}
        if self.morel:
            out["morel"] = dict(self.morel)
        return out


# ---------------------------------------------------------------------------
# parsing


def _number(section, key, errors, default=None, positive=False, allow_inf=False, integer=False):
    if key not in section:
        if default is None:
            errors.append(f"missing field {key!r}")
        return default
    v = section[key]
    if allow_inf and v in ("inf", "infinity", "Infinity"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{key} must be a number, got {v!r}")
        return default
    if integer and int(v) != v:
        errors.append(f"{key} must be an integer, got {v!r}")
        return default
    if positive and not v > 0:
        errors.append(f"{key} must be positive, got {v!r}")
        return default
    return int(v) if integer else float(v)


def _domain(d, errors):
    if not isinstance(d, dict):
        errors.append("problem.domain must be an object")
        return None
    try:
        if "ball" in d:
            ball = d["ball"]
            return BallDomain(float(ball["R"]), int(ball["N"]))
        return Domain1D(float(d["a"]), float(d["b"]))
    except KeyError as exc:
        errors.append(f"problem.domain is missing {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        errors.append(f"invalid domain: {exc}")
    return None


def _function(name, d, domain, errors, nonnegative=True):
    if not isinstance(d, dict):
        errors.append(f"{name} must be an object with a 'kind'")
        return None
    try:
        f = FunctionSpec.from_dict(d)
    except SDLError as exc:
        errors.append(f"{name}: {exc}")
        return None
    if domain is not None:
        try:
            xs = np.linspace(domain.a, domain.b, 2001)
            vals = f(xs, domain)
        except SDLError as exc:
            errors.append(f"{name}: {exc}")
            return f
        if nonnegative and np.any(vals < 0):
            errors.append(f"{name} must be nonnegative")
    return f


def parse_config(text):
    """RunConfig from JSON text; every violation is collected into one ConfigError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError(["config must be a JSON object"])
    return config_from_dict(data)


def config_from_dict(data):
    errors = []
    command = data.get("command")
    if command not in COMMANDS:
        errors.append(f"command must be one of {list(COMMANDS)}, got {command!r}")
    pd = data.get("problem")
    if not isinstance(pd, dict):
        raise ConfigError(errors + ["missing object 'problem'"])
    domain = _domain(pd.get("domain"), errors) if "domain" in pd else None
    if "domain" not in pd:
        errors.append("missing field 'domain'")
    if isinstance(domain, BallDomain) and command in ("solve", "certify", "threshold", "sweep"):
        errors.append(f"command {command!r} is one-dimensional; ball domains are supported only "
                      f"through radial-certify and radial-solve with radial data")
    if isinstance(domain, Domain1D) and command in RADIAL_COMMANDS:
        errors.append(f"command {command!r} needs a ball domain {{'ball': {{'R': .., 'N': ..}}}}")

    alpha = _number(pd, "alpha", errors, positive=True)
    gamma = _number(pd, "gamma", errors, positive=True)
    lam = _number(pd, "lambda", errors, default=1.0, positive=True)
    p = _number(pd, "p", errors, default=2.0, allow_inf=True)
    if p is not None and not p >= 2:
        errors.append(f"p must be >= 2 (or \"inf\"), got {p!r}")

    m = K = M = None
    if "m" in pd:
        if "K" in pd or "M" in pd:
            errors.append("give either m or the pair K, M, not both")
        m = _function("m", pd["m"], domain, errors, nonnegative=False)
        if alpha is not None and gamma is not None and alpha != gamma:
            errors.append("a sign-changing m needs alpha == gamma")
    else:
        for key in ("K", "M"):
            if key not in pd:
                errors.append(f"missing field {key!r}")
        K = _function("K", pd["K"], domain, errors) if "K" in pd else None
        M = _function("M", pd["M"], domain, errors) if "M" in pd else None

    num = dict(DEFAULT_NUMERICS)
    num.update(data.get("numerics", {}) or {})
    n = _number(num, "n", errors, integer=True, positive=True)
    if n is not None and n < 8:
        errors.append(f"n must be at least 8, got {n}")
    grading = num["grading"]
    if grading == "auto":
        grading = None
    else:
        grading = _number(num, "grading", errors, positive=True)
        if grading is not None and grading < 1:
            errors.append(f"grading must be >= 1 or \"auto\", got {grading}")
    tol = _number(num, "tol", errors, positive=True)
    max_iter = _number(num, "max_iter", errors, integer=True, positive=True)
    relaxation = _number(num, "relaxation", errors, positive=True)
    if relaxation is not None and relaxation > 1:
        errors.append(f"relaxation must lie in (0, 1], got {relaxation}")
    method = (data.get("solver") or {}).get("method", "picard")
    if method not in ("picard", "M2", "HIP"):
        errors.append(f"solver.method must be picard, M2 or HIP, got {method!r}")

    bracket, ttol = None, 1e-3
    if "threshold" in data or command == "threshold":
        th = data.get("threshold") or {}
        br = th.get("bracket")
        if (not isinstance(br, (list, tuple)) or len(br) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in br)):
            errors.append("threshold.bracket must be a pair of numbers")
        else:
            bracket = (float(br[0]), float(br[1]))
        ttol = _number(th, "tol", errors, default=1e-3, positive=True)

    axis = values = None
    if "sweep" in data or command == "sweep":
        sw = data.get("sweep") or {}
        axis = sw.get("axis")
        if axis not in ("lambda", "gamma"):
            errors.append(f"sweep.axis must be lambda or gamma, got {axis!r}")
        vals = sw.get("values")
        if not isinstance(vals, list) or not vals:
            errors.append("sweep.values must be a nonempty list")
        elif not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in vals):
            errors.append("sweep.values must be positive numbers")
        elif any(b < a for a, b in zip(vals, vals[1:])):
            errors.append("sweep.values must be sorted")
        else:
            values = tuple(float(v) for v in vals)

    morel = data.get("morel") or {}
    if not isinstance(morel, dict):
        errors.append("morel must be an object")
        morel = {}
    unknown = set(morel) - {"q", "c_lower", "c_upper"}
    if unknown:
        errors.append(f"morel has unknown fields {sorted(unknown)}")
    for key in morel:
        _number(morel, key, errors, positive=True)
    if ("c_lower" in morel) != ("c_upper" in morel):
        errors.append("morel: give both c_lower and c_upper, or neither")

    output_path = data.get("output_path", "report.json")
    if not isinstance(output_path, str) or not output_path:
        errors.append("output_path must be a nonempty string")

    if errors:
        raise ConfigError(errors)
    try:
        if m is not None:
            prob = sign_changing_problem(m, gamma, p, domain, n, grading).with_(lam=lam)
        else:
            prob = ProblemSpec(domain, K, M, alpha, gamma, lam, p, n, grading)
    except SDLError as exc:
        raise ConfigError([str(exc)]) from None
    return RunConfig(command, prob, m, tol, max_iter, relaxation, method, bracket, ttol, axis,
                     values, tuple(sorted((k, float(v)) for k, v in morel.items())), output_path)


def with_overrides(cfg, n=None, tol=None):
    """Command-line flags win over file values."""
    if n is not None:
        if n < 8:
            raise ConfigError([f"n must be at least 8, got {n}"])
        cfg = replace(cfg, problem=cfg.problem.with_(n=int(n)))
    if tol is not None:
        if not tol > 0:
            raise ConfigError([f"tol must be positive, got {tol}"])
        cfg = replace(cfg, tol=float(tol))
    return cfg


# ---------------------------------------------------------------------------
# running


@dataclass
class Report:
    data: dict
    tables: dict = field(default_factory=dict)  # file name -> (header, rows)
    exit_code: int = EXIT_OK


def _grid_meta(prob):
    g = prob.grid()
    return {"kind": "radial" if isinstance(prob.domain, BallDomain) else "interval",
            "n": g.n, "grading": g.grading, "order": g.order, "points": int(g.size),
            "min_cell": float(g.h.min())}


def _cert_exit(reports):
    by_id = {r.certificate_id: r for r in reports}
    if any(by_id[c].holds is False and not by_id[c].notes.startswith("not applicable")
           and not math.isnan(by_id[c].rhs) for c in NECESSARY if c in by_id):
        return EXIT_CERT_FAILS
    if not any(by_id[c].holds for c in SUFFICIENT if c in by_id):
        return EXIT_CERT_FAILS
    return EXIT_OK


def _morel(cfg):
    m = dict(cfg.morel)
    q = m.get("q", cfg.problem.domain.N + 1.0)
    return estimate_morel_constants(cfg.problem.domain, q, cfg.problem.n, m.get("c_lower"),
                                    m.get("c_upper"))


def _solution_rows(out, prob, radial=False):
    u = out.u
    grid = u.grid
    if radial:
        return [(r, v, d) for r, v, d in zip(grid.x, u.values, grid.delta)]
    # residual of the equation in weak form at each node hat, ends set to 0
    try:
        K, M = prob.sampled()
        res = hat_residuals(u, nonlinearity(u, K, M, prob.alpha, prob.gamma, prob.lam))
        res = np.concatenate([[0.0], res, [0.0]])
    except SDLError:
        res = np.full(grid.nodes.size, math.nan)
    vals = u.node_values if u.node_values is not None else np.interp(grid.nodes, grid.x, u.values)
    return [(x, v, d, r) for x, v, d, r in zip(grid.nodes, vals, grid.node_delta, res)]


def _run_solve(cfg, data):
    prob = cfg.problem
    params = None
    if cfg.method in ("M2", "HIP"):
        params = constructive_cone(prob, cfg.method)
        data["cone"] = params.summary()
    out = fixed_point_iterate(prob, params, tol=cfg.tol, max_iter=cfg.max_iter,
                              relaxation=cfg.relaxation)
    data["solve"] = out.summary()
    return out


def run(cfg):
    """Dispatch one configured run; module errors are reported, not raised."""
    data = {"version": __version__, "command": cfg.command, "config": cfg.to_dict()}
    report = Report(data)
    prob = cfg.problem
    try:
        data["grid"] = _grid_meta(prob)
        if cfg.command == "certify":
            if cfg.m is not None:
                reports = certify_sign_changing(cfg.m, prob.gamma, prob.p, prob.domain, prob.n,
                                                prob.grading)
            else:
                reports = certify(prob)
            data["certificates"] = [r.to_dict() for r in reports]
            report.exit_code = _cert_exit(reports)
        elif cfg.command == "radial-certify":
            consts = _morel(cfg)
            data["morel"] = consts.to_dict()
            if cfg.m is not None:
                ok, margin = sign_changing_screen(cfg.m, prob.domain, prob.n)
                data["sign_changing_screen"] = {"passes": ok, "min_ratio": margin}
                if not ok:
                    report.exit_code = EXIT_CERT_FAILS
            reports = radial_certify(prob, consts)
            data["certificates"] = [r.to_dict() for r in reports]
            report.exit_code = max(report.exit_code, _cert_exit(reports))
        elif cfg.command in ("solve", "radial-solve"):
            out = _run_solve(cfg, data)
            radial = cfg.command == "radial-solve"
            rows = _solution_rows(out, prob, radial)
            if radial:
                report.tables["radial.csv"] = (("r", "u", "delta"), rows)
            else:
                report.tables["solution.csv"] = (("x", "u", "delta", "pointwise_residual"), rows)
            if not out.converged:
                report.exit_code = EXIT_NUMERICAL
        elif cfg.command == "threshold":
            res = estimate_lambda0(prob, cfg.bracket, cfg.threshold_tol, cfg.tol, cfg.max_iter)
            data["threshold"] = res.to_dict()
            if res.stopped or not res.monotone_consistent:
                report.exit_code = EXIT_NUMERICAL
        elif cfg.command == "sweep":
            rows = sweep(prob, cfg.sweep_axis, cfg.sweep_values, cfg.tol, cfg.max_iter)
            data["sweep"] = {"axis": cfg.sweep_axis, "rows": [list(r) for r in rows]}
            report.tables["sweep.csv"] = (("value", "status", "positivity_margin", "residual"), rows)
    except SDLError as exc:
        data["error"] = f"{cfg.command}: {type(exc).__name__}: {exc}"
        logger.debug("%s", data["error"])
        # a hypothesis outside its range is a certificate outcome, anything else numerical
        report.exit_code = EXIT_CERT_FAILS if isinstance(exc, HypothesisViolation) else EXIT_NUMERICAL
    data["exit_code"] = report.exit_code
    return report


# ---------------------------------------------------------------------------
# output


def _fmt(x):
    """Fixed 12-significant-digit floats; non-finite values as strings."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {str(k): _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _csv_cell(v):
    if isinstance(v, str):
        return v
    return f"{float(v):.12g}"


def dumps(report):
    return json.dumps(_fmt(report.data), sort_keys=True, indent=2) + "\n"


def emit(report, path):
    """Write the JSON report at ``path`` and any tables beside it."""
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))
    for name, (header, rows) in sorted(report.tables.items()):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(v) for v in row])
        with open(os.path.join(folder, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())


def build_parser():
    ap = argparse.ArgumentParser(prog="sdlab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (default: next to output_path)")
    ap.add_argument("--n", type=int, help="override numerics.n")
    ap.add_argument("--tol", type=float, help="override numerics.tol")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        raw = json.loads(text)
        if isinstance(raw, dict):
            raw.setdefault("command", args.command)
            if raw["command"] != args.command:
                raise ConfigError([f"config command {raw['command']!r} does not match "
                                   f"subcommand {args.command!r}"])
            text = json.dumps(raw)
        cfg = with_overrides(parse_config(text), args.n, args.tol)
    except (ConfigError, json.JSONDecodeError) as exc:
        for v in getattr(exc, "violations", [str(exc)]):
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    report = run(cfg)
    name = os.path.basename(cfg.output_path)
    path = os.path.join(args.out, name) if args.out else cfg.output_path
    try:
        emit(report, path)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if "error" in report.data:
        print(report.data["error"], file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
