"""Command-line front end: ``toepcov run | validate | sweep``.

Configurations are JSON documents (see ``configs/schema.json``). Keys in
``parameters`` ending in ``_db`` are converted to linear values with the
suffix dropped. Results are written as CSV (``param,value,metric,std_err,
method,flag`` plus ``mc_metric,mc_std_err`` in ``both`` mode) or JSON.

Exit codes: 0 ok, 1 configuration/validation error, 2 numeric failure in
at least one row.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .exceptions import ConfigError, ToepcovError
from .framework import (
    GammaGain,
    GammaLaw,
    InterfererClass,
    PatternGammaLaw,
    RadiusSpec,
    Scenario,
    ServingDistance,
    coverage_theorem1,
)
from .hetnet import TierParams, hetnet_coverage, hetnet_coverage_numeric
from .mmwave import MmWaveParams, mmwave_betas, mmwave_coverage_exact, mmwave_coverage_lb
from .montecarlo import (
    THREADS_ENV,
    mc_connection_outage,
    mc_coverage_general,
    mc_hetnet_coverage,
    mc_mmwave_coverage,
    mc_secrecy_outage,
)
from .security import SecurityParams, connection_outage, secrecy_capacity, secrecy_outage_ub

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2
DEFAULT_METRIC = {"general": "coverage", "hetnet": "coverage", "security": "secrecy_capacity",
                  "mmwave": "coverage_lb"}
METRICS = {
    "general": ("coverage",),
    "hetnet": ("coverage", "coverage_numeric"),
    "security": ("secrecy_capacity", "connection_outage", "secrecy_outage"),
    "mmwave": ("coverage_lb", "coverage_exact"),
}
REQUIRED = {
    "general": ("alpha", "gamma", "signal", "serving", "interferers"),
    "hetnet": ("alpha", "gamma", "tiers"),
    "security": ("lambda_t", "lambda_e", "Nt", "r0", "d0", "alpha"),
    "mmwave": ("lambda_t", "R", "Nt", "M", "alpha", "gamma"),
}
HEADER = ["param", "value", "metric", "std_err", "method", "flag"]
MC_HEADER = ["mc_metric", "mc_std_err"]


# --------------------------------------------------------------------------
# loading and validation


def bundled_config(name: str) -> Path:
    name = name if name.endswith(".json") else name + ".json"
    return Path(str(resources.files("toepcov") / "configs" / name))


def resolve_config_path(path: str) -> Path:
    """Existing file paths win; otherwise a bare name refers to a bundled config."""
    p = Path(path)
    if p.exists():
        return p
    b = bundled_config(p.name)
    if b.exists():
        return b
    return p


def load_schema() -> dict:
    return json.loads((resources.files("toepcov") / "configs" / "schema.json").read_text())


def parse_config_text(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, compact separators)."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canon.encode()).hexdigest()


def convert_db(params: dict) -> dict:
    """Replace ``key_db`` entries (recursively) by linear ``key`` entries."""
    out = {}
    for k, v in params.items():
        if isinstance(v, dict):
            v = convert_db(v)
        elif isinstance(v, list):
            v = [convert_db(x) if isinstance(x, dict) else x for x in v]
        if k.endswith("_db") and isinstance(v, (int, float)) and not isinstance(v, bool):
            out[k[:-3]] = 10.0 ** (v / 10.0)
        else:
            out[k] = v
    return out


def sweep_grid(config: dict) -> tuple[str | None, list[float]]:
    sw = config.get("sweep")
    if not sw:
        return None, []
    if "values" in sw:
        values = [float(v) for v in sw["values"]]
    else:
        ls = sw["linspace"]
        values = [float(v) for v in np.linspace(ls["start"], ls["stop"], ls["num"])]
    return sw["parameter"], values


def _get_path(obj, path):
    for part in path.split("."):
        if isinstance(obj, list):
            obj = obj[int(part)]
        else:
            obj = obj[part]
    return obj


def _set_path(obj, path, value):
    parts = path.split(".")
    for part in parts[:-1]:
        obj = obj[int(part)] if isinstance(obj, list) else obj[part]
    last = parts[-1]
    if isinstance(obj, list):
        obj[int(last)] = value
    else:
        obj[last] = value


def _path_exists(obj, path):
    try:
        _get_path(obj, path)
        return True
    except (KeyError, IndexError, ValueError, TypeError):
        return False


def semantic_diagnostics(config: dict) -> list[str]:
    diags = []
    model = config["model"]
    params = config["parameters"]
    linear = convert_db(params)
    for key in REQUIRED[model]:
        if key not in linear:
            diags.append(f"parameters.{key}: required for model {model!r}")
    metric = config.get("metric", DEFAULT_METRIC[model])
    if metric not in METRICS[model]:
        diags.append(f"metric: {metric!r} is not available for model {model!r}")
    alpha = linear.get("alpha")
    if isinstance(alpha, (int, float)) and not alpha > 2:
        diags.append("parameters.alpha: path-loss exponent must exceed 2")
    for key in ("mu", "eps"):
        if key in linear and not 0 < linear[key] < 1:
            diags.append(f"parameters.{key}: probability target must lie in (0, 1)")
    if model == "hetnet":
        for i, t in enumerate(linear.get("tiers", [])):
            try:
                if t["U"] > t["Mant"]:
                    diags.append(f"parameters.tiers.{i}: U must not exceed Mant")
            except (KeyError, TypeError):
                diags.append(f"parameters.tiers.{i}: needs lam, P, B, Mant, U")
    if model == "security" and metric == "connection_outage" and "gamma_l" not in linear:
        diags.append("parameters.gamma_l: required for metric 'connection_outage'")
    if model == "security" and metric == "secrecy_outage" and "gamma_e" not in linear:
        diags.append("parameters.gamma_e: required for metric 'secrecy_outage'")
    name, grid = sweep_grid(config)
    if name is not None:
        base = name[:-3] if name.endswith("_db") else name
        if not (_path_exists(params, name) or _path_exists(linear, base)):
            diags.append(f"sweep.parameter: {name!r} is not a parameter of this config")
        if not grid:
            diags.append("sweep: grid must not be empty")
        elif any(b < a for a, b in zip(grid, grid[1:])):
            diags.append("sweep: grid must be sorted ascending")
        if name == "alpha" and any(v <= 2 for v in grid):
            diags.append("sweep.values: path-loss exponent must exceed 2")
    if not diags:
        # build one model instance to surface domain errors early
        try:
            build_model(model, linear)
        except (ToepcovError, KeyError, TypeError, ValueError) as exc:
            diags.append(f"parameters: {exc}")
    return diags


def validate_config(config: Any) -> list[str]:
    """Schema and semantic diagnostics; empty list when valid."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        return [f"{'.'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors]
    return semantic_diagnostics(config)


def load_config(path: str) -> dict:
    p = resolve_config_path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", [str(exc)]) from None
    config = parse_config_text(text)
    diags = validate_config(config)
    if diags:
        raise ConfigError("invalid configuration", diags)
    return config


# --------------------------------------------------------------------------
# model construction


def _gain_law(spec):
    if "pattern" in spec:
        return PatternGammaLaw(float(spec.get("shape", 1.0)), float(spec.get("scale", 1.0)),
                               int(spec["n_antennas"]), spec["pattern"],
                               float(spec.get("d_over_lambda", 0.5)))
    return GammaLaw(float(spec.get("shape", 1.0)), float(spec.get("scale", 1.0)))


def build_model(model: str, params: dict):
    if model == "general":
        sig = params["signal"]
        classes = tuple(
            InterfererClass(float(c["density"]), RadiusSpec.parse(c.get("inner", "r0")),
                            RadiusSpec.parse(c.get("outer", "inf")), _gain_law(c.get("gain", {})))
            for c in params["interferers"])
        sv = params["serving"]
        serving = ServingDistance(sv["kind"], sv.get("r0"), sv.get("lambda_t"), sv.get("R"))
        return Scenario(GammaGain(int(sig.get("shape", 1)), float(sig.get("scale", 1.0))),
                        float(params["alpha"]), classes, serving, float(params.get("noise_power", 0.0)))
    if model == "hetnet":
        return [TierParams(float(t["lam"]), float(t["P"]), float(t["B"]), int(t["Mant"]), int(t["U"]))
                for t in params["tiers"]]
    if model == "security":
        return SecurityParams(float(params["lambda_t"]), float(params["lambda_e"]), int(params["Nt"]),
                              float(params["r0"]), float(params["d0"]), float(params["alpha"]))
    if model == "mmwave":
        return MmWaveParams(float(params["lambda_t"]), float(params["R"]), int(round(params["Nt"])),
                            int(params["M"]), float(params["alpha"]), float(params["gamma"]),
                            float(params.get("d_over_lambda", 0.5)))
    raise ConfigError(f"unknown model {model!r}", [f"model: {model!r}"])


# --------------------------------------------------------------------------
# evaluation


@dataclass
class Row:
    param: float | None
    value: float | None = None
    std_err: float | None = None
    method: str = "analytic"
    flag: str = ""
    mc_value: float | None = None
    mc_std_err: float | None = None
    failed: bool = False


@dataclass
class SweepTable:
    header: list[str]
    rows: list[Row]
    metadata: dict = field(default_factory=dict)
    param_name: str = ""
    metric: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k in sorted(self.metadata):
            buf.write(f"# {k}={self.metadata[k]}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for r in self.rows:
            # param = swept parameter name, value = grid value, metric = result
            row = [self.param_name or "-", _fmt(r.param), _fmt(r.value), _fmt(r.std_err), r.method, r.flag]
            if len(self.header) > len(HEADER):
                row += [_fmt(r.mc_value), _fmt(r.mc_std_err)]
            w.writerow(row)
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for r in self.rows:
            obj = {"param": self.param_name or "-", "value": r.param, "metric": r.value,
                   "std_err": r.std_err, "method": r.method, "flag": r.flag}
            if len(self.header) > len(HEADER):
                obj["mc_metric"] = r.mc_value
                obj["mc_std_err"] = r.mc_std_err
            rows.append(obj)
        return json.dumps({"metadata": self.metadata, "metric_name": self.metric,
                           "header": self.header, "rows": rows}, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e15:
        return repr(x)
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _analytic(model, metric, obj, params):
    """(value, abs_error, method)."""
    if model == "general":
        res = coverage_theorem1(obj, float(params["gamma"]))
        return res.value, res.abs_error, res.method
    if model == "hetnet":
        fn = hetnet_coverage if metric == "coverage" else hetnet_coverage_numeric
        args = (obj, float(params["gamma"]), float(params["alpha"]))
        res = fn(*args)
        return res.value, res.abs_error, res.method
    if model == "security":
        mu, eps = float(params.get("mu", 0.1)), float(params.get("eps", 0.01))
        if metric == "secrecy_capacity":
            res = secrecy_capacity(obj, None, mu, eps)
            return res.capacity, 0.0, "analytic" if res.feasible else "analytic_infeasible"
        if metric == "connection_outage":
            return connection_outage(obj, float(params["gamma_l"])), 0.0, "analytic"
        return secrecy_outage_ub(obj, float(params["gamma_e"])), 0.0, "bound_upper"
    if model == "mmwave":
        if metric == "coverage_lb":
            res = mmwave_coverage_lb(obj)
            return res.value, res.abs_error, res.method
        return mmwave_coverage_exact(obj, params.get("pattern", "cosine")), 0.0, "analytic"
    raise ConfigError(f"unknown model {model!r}")


def _monte_carlo(model, metric, obj, params, trials, seed):
    """McEstimate or None when the metric has no simulation counterpart."""
    if model == "general":
        return mc_coverage_general(obj, float(params["gamma"]), trials, seed, workers=1)
    if model == "hetnet":
        return mc_hetnet_coverage(obj, [float(params["gamma"])], float(params["alpha"]), trials, seed,
                                  workers=1)[0]
    if model == "security":
        if metric == "connection_outage":
            return mc_connection_outage(obj, [float(params["gamma_l"])], trials, seed, workers=1)[0]
        if metric == "secrecy_outage":
            return mc_secrecy_outage(obj, [float(params["gamma_e"])], trials, seed, workers=1)[0]
        return None
    if model == "mmwave":
        return mc_mmwave_coverage(obj, params.get("pattern", "cosine"), trials, seed,
                                  float(params.get("noise_power", 0.0)), workers=1)
    return None


def _compare_flag(method, value, mc):
    lo = mc.p_hat - 3.0 * mc.std_err
    hi = mc.p_hat + 3.0 * mc.std_err
    if method == "bound_lower":
        return "bound_ok" if value <= hi else "bound_violated"
    if method == "bound_upper":
        return "bound_ok" if value >= lo else "bound_violated"
    return "agree" if mc.within(value) else "disagree"


def evaluate_point(config: dict, params: dict, param_value, evaluation: str, trials: int, seed: int,
                   cache: dict | None = None) -> Row:
    model = config["model"]
    metric = config.get("metric", DEFAULT_METRIC[model])
    row = Row(param_value)
    try:
        obj = build_model(model, params)
        if evaluation in ("analytic", "both"):
            if model == "mmwave" and metric == "coverage_lb" and cache is not None:
                # beta_n do not depend on Nt: reuse across an Nt sweep
                key = json.dumps({k: v for k, v in params.items() if k != "Nt"}, sort_keys=True)
                if key not in cache:
                    cache[key] = mmwave_betas(obj)
                res = mmwave_coverage_lb(obj, cache[key])
                row.value, row.std_err, row.method = res.value, res.abs_error, res.method
            else:
                row.value, row.std_err, row.method = _analytic(model, metric, obj, params)
        if evaluation in ("monte_carlo", "both"):
            mc = _monte_carlo(model, metric, obj, params, trials, seed)
            if evaluation == "monte_carlo":
                if mc is None:
                    row.flag = "no_simulation_for_metric"
                else:
                    row.value, row.std_err, row.method = mc.p_hat, mc.std_err, "monte_carlo"
            elif mc is None:
                row.flag = "analytic_only"
            else:
                row.mc_value, row.mc_std_err = mc.p_hat, mc.std_err
                row.flag = _compare_flag(row.method, row.value, mc)
    except (ToepcovError, ArithmeticError, ValueError) as exc:
        row.failed = True
        row.flag = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    return row


def _threads():
    env = os.environ.get(THREADS_ENV)
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def run(config: dict, seed: int | None = None, trials: int | None = None,
        evaluation: str | None = None, source_hash: str | None = None) -> SweepTable:
    """Evaluate a validated configuration over its sweep grid (one row without sweep)."""
    model = config["model"]
    metric = config.get("metric", DEFAULT_METRIC[model])
    evaluation = evaluation or config.get("evaluation", "analytic")
    seed = int(config.get("seed", 0) if seed is None else seed)
    trials = int(config.get("trials", 100_000) if trials is None else trials)
    base = convert_db(config["parameters"])
    name, grid = sweep_grid(config)
    points = []
    if name is None:
        points.append((None, base))
    else:
        is_db = name.endswith("_db")
        target = name[:-3] if is_db else name
        for v in grid:
            params = copy.deepcopy(base)
            _set_path(params, target, 10.0 ** (v / 10.0) if is_db else v)
            points.append((v, params))
    cache: dict = {}
    # prime the shared cache before fanning out
    if points and model == "mmwave" and metric == "coverage_lb" and evaluation != "monte_carlo":
        try:
            evaluate_point(config, points[0][1], points[0][0], "analytic", trials, seed, cache)
        except Exception:
            pass

    def work(item):
        v, params = item
        return evaluate_point(config, params, v, evaluation, trials, seed, cache)

    threads = _threads()
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(work, points))
    else:
        rows = [work(p) for p in points]
    header = HEADER + (MC_HEADER if evaluation == "both" else [])
    meta = {
        "config_hash": source_hash or config_hash(config),
        "seed": seed,
        "trials": trials,
        "evaluation": evaluation,
        "model": model,
        "metric": metric,
        "version": __version__,
    }
    return SweepTable(header, rows, meta, name or "", metric)


# --------------------------------------------------------------------------
# command line


def _grid_arg(text: str) -> list[float]:
    if ":" in text:
        start, stop, num = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toepcov", description="Coverage analysis of multi-antenna networks.")
    parser.add_argument("--version", action="version", version=f"toepcov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="config file, or the name of a bundled config")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--trials", type=int, help="override the Monte Carlo trial count")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument("--evaluation", choices=("analytic", "monte_carlo", "both"),
                       help="override the evaluation mode")

    common(sub.add_parser("run", help="evaluate a configuration"))
    sw = sub.add_parser("sweep", help="evaluate a configuration over a parameter grid")
    common(sw)
    sw.add_argument("--param", help="parameter to sweep (dotted path for nested entries)")
    sw.add_argument("--values", help="comma-separated values or start:stop:num")
    val = sub.add_parser("validate", help="check a configuration")
    val.add_argument("--config", required=True)
    return parser


def _emit(table: SweepTable, fmt: str, out: str | None):
    text = table.to_json() if fmt == "json" else table.to_csv()
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            config = parse_config_text(resolve_config_path(args.config).read_text())
            diags = validate_config(config)
            for d in diags:
                print(d, file=sys.stderr)
            if not diags:
                print("OK")
            return EXIT_OK if not diags else EXIT_INVALID
        config = load_config(args.config)
        source_hash = config_hash(config)
        if args.command == "sweep":
            if args.param or args.values:
                if not (args.param and args.values):
                    raise ConfigError("--param and --values go together", ["--param/--values"])
                config = copy.deepcopy(config)
                config["sweep"] = {"parameter": args.param, "values": _grid_arg(args.values)}
                diags = validate_config(config)
                if diags:
                    raise ConfigError("invalid sweep", diags)
            elif not config.get("sweep"):
                raise ConfigError("sweep needs a grid", ["sweep: none in config; pass --param and --values"])
        fmt = args.format or config.get("output", {}).get("format", "csv")
        out = args.out or config.get("output", {}).get("path")
        table = run(config, args.seed, args.trials, args.evaluation, source_hash)
        _emit(table, fmt, out)
        failed = [r for r in table.rows if r.failed]
        for r in failed:
            print(f"row {r.param}: {r.flag}", file=sys.stderr)
        return EXIT_NUMERIC if failed else EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for d in exc.diagnostics or []:
            print(f"  {d}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
