"""RunConfig validation and the seeded, pool-backed trial loop."""
from __future__ import annotations

import ast
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from ..errors import ParameterError
from ..report import MASK64, ExperimentReport, trial_rng
from .experiments import EXPERIMENTS
from .thresholds import merge_thresholds

THREADS_ENV = "DIHEDRAL_BRIDGE_THREADS"
FORMATS = ("json", "csv")


def parse_value(text: str):
    """Literal for numbers, booleans and tuples; anything else stays a string."""
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _coerce(key: str, value, default):
    if isinstance(value, str) and not isinstance(default, str):
        value = parse_value(value)
    try:
        if isinstance(default, bool):
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            if value in (0, 1, True, False):
                return bool(value)
            raise ValueError
        if isinstance(default, int):
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if isinstance(default, float):
            if isinstance(value, bool):
                raise ValueError
            return float(value)
        if isinstance(default, tuple):
            return tuple(value) if isinstance(value, (list, tuple)) else (value,)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"parameter {key!r} cannot take the value {value!r}") from exc


@dataclass
class RunConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    trials: int | None = None
    out_format: str = "json"
    out_path: str | None = None
    thresholds: dict = field(default_factory=dict)

    def resolved(self) -> tuple[dict, int, dict]:
        """Merged params, trial count and threshold table; raises ParameterError on anything invalid."""
        if self.experiment not in EXPERIMENTS:
            raise ParameterError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        exp = EXPERIMENTS[self.experiment]
        unknown = sorted(set(self.params) - set(exp.defaults))
        if unknown:
            raise ParameterError(f"unknown parameters for {self.experiment}: {unknown}")
        params = {k: _coerce(k, self.params.get(k, v), v) for k, v in exp.defaults.items()}
        trials = exp.default_trials if self.trials is None else self.trials
        if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
            raise ParameterError("trials must be an integer >= 1")
        if not isinstance(self.seed, int) or not 0 <= self.seed <= MASK64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.out_format not in FORMATS:
            raise ParameterError(f"out format must be one of {FORMATS}")
        return params, trials, merge_thresholds(self.thresholds)


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer") from exc
    if n < 1:
        raise ParameterError(f"{THREADS_ENV} must be a positive integer")
    return n


def run(config: RunConfig) -> ExperimentReport:
    """Validate, run every trial on its own seed, then aggregate in trial order."""
    params, trials, thresholds = config.resolved()
    workers = worker_count()
    exp = EXPERIMENTS[config.experiment]
    start = time.perf_counter()
    ctx = exp.setup(params, config.seed, trials)

    def one(i: int) -> dict:
        return exp.trial(ctx, trial_rng(config.seed, i), i)

    if workers == 1:
        records = [one(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, range(trials)))
    aggregates, passed = exp.summarize(ctx, records, thresholds)
    echo = {
        "experiment": config.experiment,
        "params": params,
        "seed": config.seed,
        "trials": trials,
        "thresholds": thresholds,
        "out_format": config.out_format,
        "out_path": config.out_path,
    }
    wall = (time.perf_counter() - start) * 1000.0
    return ExperimentReport(echo, records, aggregates, bool(passed), wall)
