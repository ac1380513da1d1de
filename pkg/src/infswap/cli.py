"""Command line front end: ``infswap <command> [options]``.

Settings are resolved as built-in defaults, then a JSON ``--config`` file,
then the ``INFSWAP_SEED`` / ``INFSWAP_WORKERS`` environment variables, then
explicit flags. The report is a single JSON object; failures print a JSON
error object to stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import math
import os
import platform
import re
import sys
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
import scipy

from . import __version__
from .estimator import run_simulation, write_hit_records
from .samplers import BrownianCrossing, GaussianWalk, GeometricModel, GibbsModel, RandomWalkCrossing
from .theory import optimal_alpha, rate_bound, v_probability
from .weights import MAX_TEMPERATURES, TemperatureSchedule

COMMANDS = ("gaussian1d", "gaussian-nd", "gibbs4d", "brownian", "geometric", "decay-rate")

# options every sampling command accepts
_COMMON = {"epsilon", "k", "alphas", "trials", "seed", "workers", "record_hits", "hits_output",
           "presample", "output"}
_EXTRA = {
    "gaussian1d": {"set"},
    "gaussian-nd": {"set", "dim"},
    "gibbs4d": {"set", "burn_in"},
    "brownian": {"m_depth", "b", "construction", "tail_scaling"},
    "geometric": {"p", "threshold", "mode", "risk_slope"},
}
_APPLICABLE = {c: _COMMON | extra for c, extra in _EXTRA.items()}
_APPLICABLE["decay-rate"] = {"k", "alphas", "output"}

_DEFAULTS = {
    "gaussian1d": {"epsilon": 1e-2, "k": 3, "set": "A"},
    "gaussian-nd": {"epsilon": 5e-3, "k": 5, "set": "A", "dim": 5},
    "gibbs4d": {"epsilon": 0.05, "k": 4, "set": "A2", "trials": 50_000},
    "brownian": {"epsilon": 3e-2, "k": 3, "m_depth": 10, "b": 0.5, "construction": "schauder",
                 "tail_scaling": "base"},
    "geometric": {"epsilon": 0.05, "k": 3, "p": 0.5, "threshold": 1.0, "mode": "indicator",
                  "risk_slope": 1.0},
    "decay-rate": {"k": 3},
}
_SETS = {"gaussian1d": ("A",), "gaussian-nd": ("A",), "gibbs4d": ("A1", "A2")}


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending setting."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name
        self.message = message


@dataclass
class RunConfig:
    command: str
    epsilon: Optional[float] = None
    k: Optional[int] = None
    alphas: Optional[tuple] = None
    trials: int = 100_000
    seed: int = 0
    set: Optional[str] = None
    dim: Optional[int] = None
    m_depth: Optional[int] = None
    b: Optional[float] = None
    construction: Optional[str] = None
    tail_scaling: Optional[str] = None
    burn_in: Optional[int] = None
    p: Optional[float] = None
    threshold: Optional[float] = None
    mode: Optional[str] = None
    risk_slope: Optional[float] = None
    workers: int = 1
    record_hits: bool = False
    hits_output: Optional[str] = None
    presample: bool = False
    output: Optional[str] = None

    @property
    def schedule(self) -> TemperatureSchedule:
        return TemperatureSchedule(self.alphas) if self.alphas is not None else optimal_alpha(self.k)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["alphas"] is not None:
            d["alphas"] = list(d["alphas"])
        return {key: v for key, v in d.items() if v is not None or key == "command"}


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        m = re.match(r"argument (?:--)?([\w-]+)", message) or re.search(r"unrecognized arguments: --([\w-]+)", message)
        name = m.group(1).replace("-", "_") if m else "arguments"
        if message.startswith("unrecognized"):
            message = f"not applicable here ({message})"
        raise ConfigError(name, message)


def _parse_alphas(text):
    if isinstance(text, (list, tuple)):
        return tuple(float(a) for a in text)
    try:
        return tuple(float(a) for a in str(text).split(",") if a.strip())
    except ValueError:
        raise ConfigError("alphas", f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="infswap", description="Rare-event estimation with permutation-weighted temperatures.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        p = sub.add_parser(name, argument_default=S)
        p.add_argument("--config", help="JSON file with settings (flags take precedence)")
        p.add_argument("--k", type=int)
        p.add_argument("--alphas", help="explicit schedule, e.g. 1,0.5,0.25")
        p.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
        if name == "decay-rate":
            continue
        p.add_argument("--epsilon", type=float)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=lambda s: int(s, 0))
        p.add_argument("--workers", type=int)
        p.add_argument("--record-hits", dest="record_hits", action="store_true")
        p.add_argument("--hits-output", dest="hits_output")
        p.add_argument("--presample", action="store_true",
                       help="draw every sample before weighting; wall time then excludes sampling")
        if name in _SETS:
            p.add_argument("--set", choices=_SETS[name])
        if name == "gaussian-nd":
            p.add_argument("--dim", type=int)
        if name == "gibbs4d":
            p.add_argument("--burn-in", dest="burn_in", type=int)
        if name == "brownian":
            p.add_argument("--m-depth", dest="m_depth", type=int)
            p.add_argument("--b", type=float)
            p.add_argument("--construction", choices=("schauder", "walk"),
                           help="walk: plain Monte Carlo on a 2^m_depth step random walk")
            p.add_argument("--tail-scaling", dest="tail_scaling", choices=("base", "per_temperature"))
        if name == "geometric":
            p.add_argument("--p", type=float)
            p.add_argument("--threshold", type=float)
            p.add_argument("--mode", choices=("indicator", "risk"))
            p.add_argument("--risk-slope", dest="risk_slope", type=float)
    return parser


def _load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "the config file must hold a JSON object")
    out = {}
    for key, value in data.items():
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(key, "unknown setting")
        out[name] = value
    return out


def _env_settings(environ) -> dict:
    out = {}
    for var, name in (("INFSWAP_SEED", "seed"), ("INFSWAP_WORKERS", "workers")):
        if environ.get(var, "") != "":
            try:
                out[name] = int(environ[var], 0)
            except ValueError:
                raise ConfigError(name, f"{var}={environ[var]!r} is not an integer") from None
    return out


def parse_config(argv=None, environ=None) -> RunConfig:
    environ = os.environ if environ is None else environ
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command", None)
    if command is None:
        raise ConfigError("command", f"missing command; choose from {', '.join(COMMANDS)}")

    settings = dict(_DEFAULTS[command])
    file_settings = _load_config_file(ns.pop("config")) if "config" in ns else {}
    if file_settings.get("command", command) != command:
        raise ConfigError("command", f"config file is for {file_settings['command']!r}, not {command!r}")
    file_settings.pop("command", None)
    explicit = {**file_settings, **ns}
    # env only fills in settings that apply to this command
    env = {key: v for key, v in _env_settings(environ).items() if key in _APPLICABLE[command]}

    for key in explicit:
        if key not in _APPLICABLE[command]:
            raise ConfigError(key, f"not applicable to {command}")
    if "alphas" in explicit and "k" not in explicit:
        settings.pop("k")
    settings.update(file_settings)
    settings.update(env)
    settings.update(ns)
    return _validate(RunConfig(command=command, **settings), explicit)


def _require(cond, field_name, message):
    if not cond:
        raise ConfigError(field_name, message)


def _validate(cfg: RunConfig, explicit: dict) -> RunConfig:
    if cfg.alphas is not None:
        cfg.alphas = _parse_alphas(cfg.alphas)
        try:
            sched = TemperatureSchedule(cfg.alphas)
        except ValueError as exc:
            raise ConfigError("alphas", str(exc)) from None
        if cfg.k is not None and cfg.k != sched.k:
            raise ConfigError("alphas", f"{sched.k} values given but k = {cfg.k}")
        cfg.k = sched.k
    _require(isinstance(cfg.k, int) and 1 <= cfg.k <= MAX_TEMPERATURES, "k",
             f"must be an integer in 1..{MAX_TEMPERATURES}")
    if cfg.command == "decay-rate":
        cfg.trials = cfg.seed = cfg.workers = None
        cfg.record_hits = cfg.presample = None
        return cfg

    _require(isinstance(cfg.epsilon, (int, float)) and math.isfinite(cfg.epsilon) and cfg.epsilon > 0,
             "epsilon", "must be a positive finite number")
    cfg.epsilon = float(cfg.epsilon)
    _require(isinstance(cfg.trials, int) and cfg.trials >= 1, "trials", "must be an integer >= 1")
    _require(isinstance(cfg.seed, int) and 0 <= cfg.seed < 2 ** 64, "seed", "must be an integer in [0, 2^64)")
    _require(isinstance(cfg.workers, int) and cfg.workers >= 1, "workers", "must be an integer >= 1")
    _require(min(cfg.schedule.alphas) > 0, "alphas", "sampling needs every alpha > 0")
    if cfg.hits_output is not None:
        cfg.record_hits = True
    _require(not cfg.record_hits or cfg.hits_output, "hits_output", "required with --record-hits")

    if cfg.command in _SETS:
        _require(cfg.set in _SETS[cfg.command], "set", f"must be one of {_SETS[cfg.command]}")
    if cfg.command == "gaussian-nd":
        _require(isinstance(cfg.dim, int) and cfg.dim >= 1, "dim", "must be an integer >= 1")
    if cfg.command == "gibbs4d" and cfg.burn_in is not None:
        _require(isinstance(cfg.burn_in, int) and cfg.burn_in >= 0, "burn_in", "must be an integer >= 0")
    if cfg.command == "brownian":
        _require(cfg.construction in ("schauder", "walk"), "construction", "must be schauder or walk")
        walk = cfg.construction == "walk"
        if walk:
            if "m_depth" not in explicit:
                cfg.m_depth = 14
            if "k" not in explicit and "alphas" not in explicit:
                cfg.k = 1
            _require(cfg.k == 1 and cfg.schedule.alphas == (1.0,), "k",
                     "the random-walk construction is plain Monte Carlo and needs k = 1")
            _require("tail_scaling" not in explicit, "tail_scaling", "not applicable to the walk construction")
            cfg.tail_scaling = None
        _require(isinstance(cfg.m_depth, int) and (1 if walk else 2) <= cfg.m_depth <= 24, "m_depth",
                 "must be an integer in 2..24 (1..24 for the walk)")
        _require(isinstance(cfg.b, (int, float)) and cfg.b > 0, "b", "must be positive")
        if not walk:
            _require(cfg.tail_scaling in ("base", "per_temperature"), "tail_scaling",
                     "must be base or per_temperature")
    if cfg.command == "geometric":
        _require(isinstance(cfg.p, (int, float)) and 0 < cfg.p < 1, "p", "must lie in (0, 1)")
        _require(cfg.mode in ("indicator", "risk"), "mode", "must be indicator or risk")
        _require(isinstance(cfg.threshold, (int, float)) and math.isfinite(cfg.threshold), "threshold",
                 "must be a finite number")
        _require(isinstance(cfg.risk_slope, (int, float)) and cfg.risk_slope >= 0, "risk_slope",
                 "must be >= 0")
        if cfg.mode == "indicator":
            _require("risk_slope" not in explicit, "risk_slope", "only used with --mode risk")
            cfg.risk_slope = None
    return cfg


def build_model(cfg: RunConfig):
    c = cfg.command
    if c == "gaussian1d":
        return GaussianWalk(1)
    if c == "gaussian-nd":
        return GaussianWalk(cfg.dim)
    if c == "gibbs4d":
        return GibbsModel(cfg.set) if cfg.burn_in is None else GibbsModel(cfg.set, cfg.burn_in)
    if c == "brownian":
        if cfg.construction == "walk":
            return RandomWalkCrossing(2 ** cfg.m_depth, cfg.b)
        return BrownianCrossing(cfg.m_depth, cfg.b, cfg.tail_scaling)
    if c == "geometric":
        return GeometricModel(cfg.p, cfg.threshold, cfg.mode, 1.0 if cfg.risk_slope is None else cfg.risk_slope)
    raise ConfigError("command", f"{c} has no sampling model")


def versions() -> dict:
    return {"infswap": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def execute(cfg: RunConfig) -> dict:
    sched = cfg.schedule
    v = v_probability(sched)
    envelope = {
        "command": cfg.command,
        "estimate": None,
        "std_error": None,
        "rel_error": None,
        "ci": None,
        "decay_rate": None,
        "mean_theta_sq": None,
        "v_alpha": v.value,
        "v_alpha_minimizer": list(v.minimizing_i_vector),
        "rate_bound": rate_bound(sched.k),
        "analytic_truth": None,
        "trials": cfg.trials,
        "epsilon": cfg.epsilon,
        "k": sched.k,
        "alphas": list(sched.alphas),
        "seed": cfg.seed,
        "hits_recorded": None,
        "wall_time_s": 0.0,
        "sampling_time_s": 0.0,
    }
    if cfg.command != "decay-rate":
        model = build_model(cfg)
        res = run_simulation(model, sched, cfg.epsilon, cfg.trials, cfg.seed, mode=model.mode,
                             record_hits=cfg.record_hits, workers=cfg.workers, presample=cfg.presample)
        r = res.report
        envelope.update({
            "estimate": r.estimate,
            "std_error": r.std_error,
            "rel_error": r.rel_error,
            "ci": [r.ci_low, r.ci_high],
            "decay_rate": r.norm_decay_rate,
            "mean_theta_sq": r.mean_theta_sq,
            "analytic_truth": model.analytic_truth(cfg.epsilon),
            "wall_time_s": r.wall_time,
            "sampling_time_s": res.sampling_time,
        })
        if cfg.record_hits:
            write_hit_records(res.hit_records, cfg.hits_output)
            envelope["hits_recorded"] = len(res.hit_records)
    envelope["config"] = cfg.to_dict()
    envelope["versions"] = versions()
    envelope["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return envelope


def _dump(obj, path):
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        _dump(execute(cfg), cfg.output)
        return 0
    except ConfigError as exc:
        err = {"error": {"type": "config", "field": exc.field, "message": exc.message}}
        code = 2
    except Exception as exc:  # report anything else in the same machine-readable form
        err = {"error": {"type": type(exc).__name__, "field": None, "message": str(exc)}}
        code = 1
    sys.stderr.write(json.dumps(err) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
