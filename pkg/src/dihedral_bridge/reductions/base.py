"""Outcome record and retry driver shared by all reductions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from ..errors import TailEvent

DEFAULT_RETRY_FACTOR = 64


@dataclass
class ReductionOutcome:
    success: bool
    payload: Any = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.success and self.payload is None:
            raise ValueError("a successful outcome carries a payload")
        if not self.success:
            self.payload = None


def retry(step: Callable[[np.random.Generator], ReductionOutcome], rng: np.random.Generator,
          budget: int) -> ReductionOutcome:
    """Run ``step`` until it succeeds, treating tail events as detectable failures.

    Gives up after ``budget`` attempts; the attempt count is recorded in the
    diagnostics of whichever outcome is returned.
    """
    last = ReductionOutcome(False, diagnostics={})
    for attempt in range(1, budget + 1):
        try:
            out = step(rng)
        except TailEvent as exc:
            out = ReductionOutcome(False, diagnostics={"tail_event": str(exc)})
        out.diagnostics["attempts"] = attempt
        if out.success:
            return out
        last = out
    return last


def collect(step: Callable[[np.random.Generator], ReductionOutcome], count: int, rng: np.random.Generator,
            retry_factor: int = DEFAULT_RETRY_FACTOR) -> ReductionOutcome:
    """Gather ``count`` successful payloads within a shared budget of retry_factor * count attempts."""
    budget = retry_factor * max(count, 1)
    payloads, attempts = [], 0
    while len(payloads) < count and attempts < budget:
        out = retry(step, rng, budget - attempts)
        attempts += out.diagnostics["attempts"]
        if not out.success:
            break
        payloads.append(out.payload)
    ok = len(payloads) == count
    return ReductionOutcome(ok, payloads if ok else None, {"attempts": attempts, "collected": len(payloads)})
