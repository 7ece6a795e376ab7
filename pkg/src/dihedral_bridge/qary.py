"""Exhaustive minima of the q-ary lattice Lambda_q(A) = {Ax mod q} + qZ^m at desk scale."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core_math import center
from .errors import ParameterError, ResourceError
from .report import ExperimentReport
from .stats import binomial_sigma

ENUM_BUDGET = 1 << 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class QaryBasisSpec:
    A: np.ndarray
    q: int

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=np.int64)
        if A.ndim != 2:
            raise ParameterError("A must be an m x n matrix")
        if self.q < 2:
            raise ParameterError("modulus must be at least 2")
        if A.shape[0] < A.shape[1]:
            raise ParameterError("need m >= n")
        if A.size and (A.min() < 0 or A.max() >= self.q):
            raise ParameterError("entries of A must lie in [0, q)")
        object.__setattr__(self, "A", A)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class LatticeStats:
    """Both minima with the first lexicographic coefficient vector attaining each.

    A witness is None when the minimum is the clamp value q, which is attained
    by the q-ary vectors q*e_i rather than by any Ax.
    """

    lambda1_inf: int
    lambda1_l2: float
    witness_inf: tuple[int, ...] | None
    witness_l2: tuple[int, ...] | None

    @property
    def witness(self):
        return self.witness_inf


def _coefficients(n: int, q: int, start: int, stop: int) -> np.ndarray:
    # lexicographic order: the first coordinate is most significant
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((len(idx), n), dtype=np.int64)
    for col in range(n - 1, -1, -1):
        out[:, col] = idx % q
        idx //= q
    return out


def lattice_minima(spec: QaryBasisSpec) -> LatticeStats:
    """Exact lambda_1 in the infinity and Euclidean norms by enumerating x in Z_q^n."""
    q, n = spec.q, spec.n
    total = q**n
    if total > ENUM_BUDGET:
        raise ResourceError(f"q^n = {total} exceeds the enumeration budget {ENUM_BUDGET}")
    best_inf, best_inf_x = q, None
    best_sq, best_l2_x = q * q, None
    for start in range(1, total, _CHUNK):
        xs = _coefficients(n, q, start, min(total, start + _CHUNK))
        pts = center(xs @ spec.A.T, q)
        nonzero = np.any(pts != 0, axis=1)
        if not nonzero.any():
            continue
        inf = np.where(nonzero, np.abs(pts).max(axis=1), q)
        sq = np.where(nonzero, np.einsum("ij,ij->i", pts, pts), q * q)
        i = int(np.argmin(inf))
        if inf[i] < best_inf:
            best_inf, best_inf_x = int(inf[i]), tuple(int(v) for v in xs[i])
        i = int(np.argmin(sq))
        if sq[i] < best_sq:
            best_sq, best_l2_x = int(sq[i]), tuple(int(v) for v in xs[i])
    return LatticeStats(best_inf, math.sqrt(best_sq), best_inf_x, best_l2_x)


def lambda1_inf(spec: QaryBasisSpec) -> LatticeStats:
    return lattice_minima(spec)


def lambda1_l2(spec: QaryBasisSpec) -> LatticeStats:
    return lattice_minima(spec)


def point_norms(spec: QaryBasisSpec, x) -> tuple[int, float]:
    """(infinity, Euclidean) norm of the centered lattice point A x mod q."""
    p = center(spec.A @ np.asarray(x, dtype=np.int64), spec.q)
    return int(np.abs(p).max()), float(math.sqrt(int(p @ p)))


def inf_bound(q: int, m: int, n: int) -> float:
    return q ** ((m - n) / m) / 2.0


def inf_bound_two_sided(q: int, m: int, n: int) -> float:
    """Union-bound threshold q^((m-n)/m)/4 that accounts for both signs of centered residues."""
    return q ** ((m - n) / m) / 4.0


def l2_bound(q: int, m: int, n: int) -> float:
    return min(q, math.sqrt(m) * q ** ((m - n) / m) / (2.0 * math.sqrt(2 * math.pi * math.e)))


def minima_bound_experiment(q: int, m: int, n: int, trials: int, rng: np.random.Generator) -> ExperimentReport:
    """Fraction of uniform A meeting both minima lower bounds; fails below 1 - 2^-m - 3 sigma."""
    if not (2 <= q <= 64 and 1 <= n <= 3 and n <= m <= 12):
        raise ParameterError("minima_bound_experiment is limited to q <= 64, m <= 12, n <= 3")
    if trials < 1:
        raise ParameterError("trials must be positive")
    b_inf, b_l2 = inf_bound(q, m, n), l2_bound(q, m, n)
    b_inf2 = inf_bound_two_sided(q, m, n)
    records = []
    for _ in range(trials):
        A = rng.integers(0, q, size=(m, n))
        st = lattice_minima(QaryBasisSpec(A, q))
        records.append(
            {
                "lambda1_inf": st.lambda1_inf,
                "lambda1_l2": st.lambda1_l2,
                "inf_ok": st.lambda1_inf >= b_inf,
                "inf_two_sided_ok": st.lambda1_inf >= b_inf2,
                "l2_ok": st.lambda1_l2 >= b_l2 - 1e-12,
            }
        )
    target = 1.0 - 2.0**-m
    floor = target - 3 * binomial_sigma(target, trials)
    frac_inf = sum(r["inf_ok"] for r in records) / trials
    frac_l2 = sum(r["l2_ok"] for r in records) / trials
    frac_inf2 = sum(r["inf_two_sided_ok"] for r in records) / trials
    aggregates = {
        "inf_bound": b_inf,
        "l2_bound": b_l2,
        "frac_inf": frac_inf,
        "frac_l2": frac_l2,
        "inf_bound_two_sided": b_inf2,
        "frac_inf_two_sided": frac_inf2,
        "threshold": floor,
    }
    return ExperimentReport(
        config={"q": q, "m": m, "n": n, "trials": trials},
        trials=records,
        aggregates=aggregates,
        passed=frac_inf >= floor and frac_l2 >= floor,
    )
