"""Pass/fail constants for every experiment, kept in one table so they can be audited and overridden."""
from __future__ import annotations

from ..errors import ParameterError

DEFAULT_THRESHOLDS: dict[str, float] = {
    # goodness of fit
    "chi2_p_floor": 0.001,
    "tv_ceiling": 0.05,
    "sampler_tv_ceiling": 0.01,
    "born_tv_ceiling": 0.01,
    # slack on binomial rates, in standard deviations
    "sigma": 3.0,
    # numeric identities
    "poisson_rel_tol": 1e-9,
    "unitary_tol": 1e-12,
    # end-to-end and decisional pipelines
    "roundtrip_floor": 0.8,
    "advantage_floor": 0.5,
    "support_one_floor": 1.0,
    # ball intersection
    "ball_ratio_floor": 0.5,
    "ball_span": 0.25,
}


def merge_thresholds(overrides: dict | None) -> dict[str, float]:
    table = dict(DEFAULT_THRESHOLDS)
    for key, value in (overrides or {}).items():
        if key not in table:
            raise ParameterError(f"unknown threshold {key!r}")
        try:
            table[key] = float(value)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"threshold {key!r} needs a number, got {value!r}") from exc
    return table
