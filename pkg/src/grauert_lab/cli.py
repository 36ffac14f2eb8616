"""Batch experiment runner.

    grauert-lab <experiment> --config run.ini [--seed N] [--workers N]
                [--output path] [--format csv|json] [--verify/--no-verify] [--timing]

Configs are INI files with the sections ``[experiment]`` (name, seed),
``[model]`` (kind, dim, period), ``[params]``, ``[tolerances]`` and ``[output]``
(path, format). Every key is checked; unknown keys are config errors.

Report columns (CSV header, also the JSON row fields):

    experiment, model, dim, param_name, param_value, measured, reference,
    tolerance, metric, status, runtime_ms

``param_name`` is ``<check>:<parameter>``. ``metric`` is ``abs`` or ``rel``;
a row passes when |measured - reference| <= tolerance (times |reference| for
``rel``). Rows whose computation raised a numerical error are ``flagged``.
``runtime_ms`` is 0 unless ``--timing`` is given, so reports are byte-stable.

Exit codes: 0 all rows pass, 1 verification failure, 2 config error,
3 numerical failure (at least one flagged row).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, GrauertLabError
from .experiments import EXPERIMENTS, Check, Task, check_status, run_task
from .fits import LogLogFit, fit_loglog  # noqa: F401  re-exported for scripts
from .geometry import ModelManifold

FIELDS = (
    "experiment",
    "model",
    "dim",
    "param_name",
    "param_value",
    "measured",
    "reference",
    "tolerance",
    "metric",
    "status",
    "runtime_ms",
)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SECTIONS = {
    "experiment": {"name", "seed"},
    "model": {"kind", "dim", "period"},
    "params": None,  # per experiment
    "tolerances": None,  # per experiment
    "output": {"path", "format"},
}
DEFAULT_DIMS = {"circle": 1, "torus": 2, "sphere": 2, "hyperbolic": 2}


@dataclass
class ExperimentConfig:
    experiment: str
    model: ModelManifold
    params: dict
    tolerances: dict
    overrides: frozenset = frozenset()
    seed: int = 0
    output_path: Optional[str] = None
    output_format: str = "csv"

    def task_seeds(self, n: int) -> list[int]:
        """Independent 64-bit seeds for n tasks, split from the master seed."""
        children = np.random.SeedSequence(self.seed).spawn(n)
        return [int(c.generate_state(1, np.uint64)[0]) for c in children]


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    model: str
    dim: int
    param_name: str
    param_value: float
    measured: float
    reference: float
    tolerance: float
    metric: str
    status: str
    runtime_ms: float = 0.0


@dataclass
class Report:
    rows: list = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(r.status != "pass" for r in self.rows)

    def exit_status(self, verify: bool = True) -> int:
        if any(r.status == "flagged" for r in self.rows):
            return EXIT_NUMERICAL
        if verify and self.failures:
            return EXIT_FAIL
        return EXIT_PASS


# ------------------------------------------------------------------ configs


def _parse_model(section, allowed) -> ModelManifold:
    kind = section.get("kind", allowed[0])
    if kind not in allowed:
        raise ConfigError(f"model kind {kind!r} not supported here (allowed: {', '.join(allowed)})")
    try:
        dim = int(section.get("dim", DEFAULT_DIMS[kind]))
        period = float(section["period"]) if "period" in section else None
    except ValueError as exc:
        raise ConfigError(f"bad model field: {exc}") from None
    if dim < 1:
        raise ConfigError("model dim must be positive")
    if period is not None and not (period > 0 and kind in ("circle", "torus")):
        raise ConfigError("period applies to flat models and must be positive")
    if kind == "circle":
        if dim != 1:
            raise ConfigError("the circle has dim 1")
        return ModelManifold.circle() if period is None else ModelManifold.circle(period)
    if kind == "torus":
        return ModelManifold.torus(dim) if period is None else ModelManifold.torus(dim, period)
    if kind == "sphere":
        return ModelManifold.sphere(dim)
    return ModelManifold.hyperbolic(dim)


def config_from_parser(cp: configparser.ConfigParser, experiment: str) -> ExperimentConfig:
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    exp = EXPERIMENTS[experiment]
    for name in cp.sections():
        if name not in SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        known = SECTIONS[name]
        if name == "params":
            known = set(exp.params)
        elif name == "tolerances":
            known = set(exp.tolerances)
        extra = set(cp[name]) - known
        if extra:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(extra))}")
    get = lambda sec: cp[sec] if cp.has_section(sec) else {}  # noqa: E731

    head = get("experiment")
    if "name" in head and head["name"] != experiment:
        raise ConfigError(f"config is for {head['name']!r}, not {experiment!r}")
    try:
        seed = int(head.get("seed", 0))
    except ValueError:
        raise ConfigError("seed must be an integer") from None
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")

    model = _parse_model(get("model"), exp.models)
    raw = get("params")
    params = {}
    for key, (parse, default) in exp.params.items():
        text = raw.get(key, default)
        if text is None:
            raise ConfigError(f"missing required parameter {key}")
        try:
            params[key] = parse(text)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"parameter {key} = {text!r}: {exc}") from None

    tols = dict(exp.tolerances)
    overrides = set()
    for key, text in get("tolerances").items():
        try:
            val = float(text)
        except ValueError:
            raise ConfigError(f"tolerance {key} = {text!r} is not a number") from None
        if not val >= 0:
            raise ConfigError(f"tolerance {key} must be nonnegative")
        tols[key] = val
        overrides.add(key)

    out = get("output")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {fmt!r}")
    cfg = ExperimentConfig(experiment, model, params, tols, frozenset(overrides), seed, out.get("path"), fmt)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    p, m = cfg.params, cfg.model
    if "tau_values" in p and any(t >= m.tube_bound for t in p["tau_values"]):
        raise ConfigError(f"tau must stay below the tube radius {m.tube_bound:g}")
    if cfg.experiment == "weyl" and m.kind == "sphere" and m.dim != 2:
        raise ConfigError("the sphere eigenbasis is built for S^2 only")
    if cfg.experiment == "weyl" and p["lambda_max"] < 4 * p["lambda_min"]:
        raise ConfigError("weyl needs lambda_max >= 4 lambda_min")
    if cfg.experiment == "weyl" and p["n_lambda"] < 5:
        raise ConfigError("weyl needs n_lambda >= 5")
    if cfg.experiment == "kernel-compare" and m.dim != 2:
        raise ConfigError("the spectral cross-check runs on S^2")
    if cfg.experiment == "kernel-compare" and not (p["r_max"] < math.pi and p["tau_min"] <= p["tau_max"]):
        raise ConfigError("need r_max < pi and tau_min <= tau_max")
    if cfg.experiment == "siciak" and p["rho_min"] > p["rho_max"]:
        raise ConfigError("rho_min must not exceed rho_max")
    if cfg.experiment == "hadamard" and not p["r_max"] < m.injectivity_radius:
        raise ConfigError("r_max must stay inside the injectivity radius")
    if cfg.experiment == "zeros" and p["xi0"] >= 1.0:
        raise ConfigError("xi0 must be below 1 (the pairing grid spans |xi| <= 1)")


def load_config(path: str, experiment: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str  # keys are case sensitive
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return config_from_parser(cp, experiment)


def parse_config_text(text: str, experiment: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return config_from_parser(cp, experiment)


# -------------------------------------------------------------------- runs


def _to_row(cfg: ExperimentConfig, c: Check, runtime_ms: float) -> ReportRow:
    return ReportRow(
        cfg.experiment,
        cfg.model.kind,
        cfg.model.dim,
        f"{c.name}:{c.param_name}",
        float(c.param_value),
        float(c.measured),
        float(c.reference),
        float(c.tolerance),
        c.metric,
        check_status(c),
        runtime_ms,
    )


def run(cfg: ExperimentConfig, workers: int = 1, timing: bool = False) -> Report:
    """Run every task of the experiment and reduce to a canonically sorted report."""
    exp = EXPERIMENTS[cfg.experiment]
    tasks: list[Task] = exp.tasks(cfg)
    t0 = time.perf_counter()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_task, tasks))
    else:
        results = [run_task(t) for t in tasks]
    elapsed = (time.perf_counter() - t0) * 1e3 if timing else 0.0

    ok = [(t, r) for t, r in zip(tasks, results) if not isinstance(r, GrauertLabError)]
    checks = exp.reduce(cfg, ok) if ok else []
    for t, r in zip(tasks, results):
        if isinstance(r, GrauertLabError):
            # one flagged row per failed task, named after the error
            pname, pval = str(t.key[0]), t.key[1] if len(t.key) > 1 else 0
            checks.append(Check(type(r).__name__, pname, float(pval), math.nan, math.nan, math.nan, "abs", True))
    rows = [_to_row(cfg, c, elapsed) for c in checks]
    rows.sort(key=lambda r: (r.param_name, r.param_value, r.reference))
    return Report(rows)


# ------------------------------------------------------------------ output


def _num(x: float) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in report.rows:
        d = asdict(r)
        w.writerow([_num(d[k]) if isinstance(d[k], (float, int)) and not isinstance(d[k], bool) else d[k] for k in FIELDS])
    return buf.getvalue()


def to_json(report: Report) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    rows = [{k: clean(v) for k, v in asdict(r).items()} for r in report.rows]
    return json.dumps({"fields": list(FIELDS), "rows": rows}, indent=1) + "\n"


def write_report(report: Report, path: Optional[str], fmt: str) -> None:
    text = to_csv(report) if fmt == "csv" else to_json(report)
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="grauert-lab", description="Run a verification experiment and write a report.")
    ap.add_argument("experiment", choices=sorted(EXPERIMENTS))
    ap.add_argument("--config", required=True, help="INI file describing the run")
    ap.add_argument("--seed", type=int, default=None, help="override [experiment] seed")
    ap.add_argument("--workers", type=int, default=1, help="process count for independent tasks")
    ap.add_argument("--output", default=None, help="report path ('-' for stdout)")
    ap.add_argument("--format", choices=("csv", "json"), default=None)
    ap.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True, help="gate the exit status on tolerances")
    ap.add_argument("--timing", action="store_true", help="record wall time in runtime_ms (breaks byte stability)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.experiment)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("seed must be a 64-bit unsigned integer")
            cfg.seed = args.seed
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = run(cfg, workers=args.workers, timing=args.timing)
    write_report(report, args.output if args.output is not None else cfg.output_path, args.format or cfg.output_format)
    status = report.exit_status(args.verify)
    if report.failures:
        print(f"{report.failures} of {len(report.rows)} checks did not pass", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
