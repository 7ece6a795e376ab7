"""Seeded experiment records and their JSON/CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(seed: int, index: int) -> int:
    """Per-trial seed: splitmix over the run seed and the trial index."""
    return splitmix64((splitmix64(seed & MASK64) + (index & MASK64)) & MASK64)


def setup_seed(seed: int) -> int:
    """Seed for per-run setup (instances shared by all trials); disjoint from trial indices in practice."""
    return trial_seed(seed, MASK64)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(seed, index))


def to_plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    return obj


@dataclass
class ExperimentReport:
    config: dict
    trials: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    passed: bool = False
    wall_time_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "config": to_plain(self.config),
            "trials": to_plain(self.trials),
            "aggregates": to_plain(self.aggregates),
            "pass": bool(self.passed),
            "wall_time_ms": float(self.wall_time_ms),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            config=d["config"],
            trials=d["trials"],
            aggregates=d["aggregates"],
            passed=d["pass"],
            wall_time_ms=d["wall_time_ms"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        plain = self.to_dict()
        trial_keys: list[str] = []
        for rec in plain["trials"]:
            for k in rec:
                if k not in trial_keys:
                    trial_keys.append(k)
        agg = _flatten(plain["aggregates"], "agg.")
        header = ["row"] + trial_keys + ["pass"] + list(agg)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for i, rec in enumerate(plain["trials"]):
            w.writerow([i] + [_cell(rec.get(k)) for k in trial_keys] + [""] + [""] * len(agg))
        w.writerow(["summary"] + [""] * len(trial_keys) + [plain["pass"]] + [_cell(v) for v in agg.values()])
        return buf.getvalue()


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)


def _flatten(d: dict, prefix: str) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def emit_report(report: ExperimentReport, fmt: str, path: str | Path | None) -> str:
    """Serialize ``report`` as json or csv; write it to ``path`` unless it is None or '-'."""
    if fmt == "json":
        text = report.to_json() + "\n"
    elif fmt == "csv":
        text = report.to_csv()
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None and str(path) != "-":
        Path(path).write_text(text)
    return text
