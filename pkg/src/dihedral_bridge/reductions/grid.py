"""Cube-separation map and numerical checks of its two claims."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import ParameterError
from ..qary import QaryBasisSpec, lattice_minima


@dataclass(frozen=True)
class GridSpec:
    """Cells of width z = q/c, offset by w, with cell indices taken mod qbar = q/z."""

    q: int
    c: int
    w: np.ndarray
    k: int | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=float)
        if self.c < 1:
            raise ParameterError("grid constant c must be positive")
        if w.size and (w.min() < 0 or w.max() >= 1):
            raise ParameterError("grid offsets must lie in [0, 1)")
        object.__setattr__(self, "w", w)

    @property
    def z(self) -> Fraction:
        return Fraction(self.q, self.c)

    @property
    def qbar(self) -> Fraction:
        return Fraction(self.q) / self.z


def grid_cells(x, z: float, w, qbar: float) -> np.ndarray:
    """floor((x/z - w) mod qbar) componentwise; x may be real."""
    x = np.asarray(x, dtype=float)
    return np.floor(np.mod(x / float(z) - np.asarray(w, dtype=float), float(qbar))).astype(np.int64)


def grid_fn(x, spec: GridSpec) -> np.ndarray:
    return grid_cells(x, spec.z, spec.w, spec.qbar)


def claim1_rate(A: np.ndarray, q: int, c: int, k: int, trials: int, rng: np.random.Generator,
                x=None) -> dict:
    """Same-cell frequency for two points A x +- E, E = lambda_1^inf / (2ck), over fresh offsets w.

    The errors point in opposite directions in every coordinate, so the
    pair sits at the largest separation the claim allows.
    """
    A = np.asarray(A, dtype=np.int64)
    m, n = A.shape
    lam = lattice_minima(QaryBasisSpec(A, q)).lambda1_inf
    E = lam / (2 * c * k)
    x = np.zeros(n, dtype=np.int64) if x is None else np.asarray(x)
    base = np.mod(A @ x, q).astype(float)
    z = q / c
    w = rng.random((trials, m))
    same = np.all(grid_cells(base + E, z, w, c) == grid_cells(base - E, z, w, c), axis=1)
    per_coord = min(2 * E / z, 1.0)
    return {
        "lambda1_inf": lam,
        "error_magnitude": E,
        "rate": float(same.mean()),
        "analytic_rate": (1 - per_coord) ** m,
        "claimed_rate": (1 - 1 / k) ** m,
        "trials": trials,
    }


def claim2_violations(A: np.ndarray, q: int, c: int, k: int, w_grid: int = 64, e_grid: int = 5) -> dict:
    """Exhaustive search for x != x' whose error balls share a cell.

    Enumerates every pair of coefficient vectors, a uniform grid of offsets w
    and a grid of real errors with |e_i| <= lambda_1^inf / (2ck).  Coordinates
    are independent given the pair, so a violation exists iff every
    coordinate admits an offset and errors that land in a common cell.  The
    claim presumes z <= lambda_1^inf / 2; instances breaking that are flagged.
    Pairs are taken over distinct lattice points A x mod q.
    """
    A = np.asarray(A, dtype=np.int64)
    m, n = A.shape
    if q**n > 4096:
        raise ParameterError("claim-2 enumeration is limited to q^n <= 4096")
    lam = lattice_minima(QaryBasisSpec(A, q)).lambda1_inf
    E = lam / (2 * c * k)
    z = q / c
    errs = np.linspace(-E, E, e_grid)
    ws = (np.arange(w_grid) + 0.5) / w_grid
    xs = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)
    # x != x' with Ax = Ax' give the same lattice point; the claim is about distinct points
    pts = np.unique(np.mod(xs @ A.T, q), axis=0)
    # cells[p, i, w, e] for point p, coordinate i
    vals = pts[:, :, None, None] + errs[None, None, None, :]
    cells = np.floor(np.mod(vals / z - ws[None, None, :, None], c)).astype(np.int64)
    # occupancy bitmask of cells per (point, coord, w); c <= 62 keeps it in int64
    if c > 62:
        raise ParameterError("claim-2 check supports c <= 62")
    masks = np.zeros(cells.shape[:3], dtype=np.int64)
    for e in range(e_grid):
        masks |= np.left_shift(np.int64(1), cells[..., e])
    violations = 0
    for a in range(len(pts)):
        shared = (masks[a][None] & masks[a + 1:]) != 0  # (others, m, w)
        coord_ok = shared.any(axis=2)
        violations += int(np.all(coord_ok, axis=1).sum())
    return {
        "lambda1_inf": lam,
        "precondition": z <= lam / 2,
        "violations": violations,
        "pairs": len(pts) * (len(pts) - 1) // 2,
        "coincident_coefficient_pairs": (len(xs) - len(pts)) > 0,
    }
