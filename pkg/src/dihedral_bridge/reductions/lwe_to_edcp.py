"""LWE to EDCP: cube separation and ball intersection, plus the decisional variant.

The superposition over (j, s) is stored with (j, s) as the only keys.  The
register holding A s - j b is never materialized; measuring a function of
it partitions the (j, s) support directly.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..core_math import GaussianParam, center, rho_values
from ..edcp import LwePublic, edcp_distance, edcp_layout
from ..errors import ParameterError, ResourceError
from ..qary import QaryBasisSpec, l2_bound, lattice_minima, ENUM_BUDGET
from ..statevector import SparseState, WeightFn, measure_derived
from .base import ReductionOutcome
from .grid import GridSpec, grid_fn

STATE_BUDGET = 1 << 22
_BALL_BATCH = 4096


def cube_bound(m: int, n: int, q: int, alpha: float, kappa: int, ell: int) -> float:
    """Largest admissible r for the cube reduction: 1 / (32 m kappa alpha ell q^(n/m))."""
    return 1.0 / (32 * m * kappa * alpha * ell * q ** (n / m)) if alpha > 0 else math.inf


def ball_bound(m: int, n: int, q: int, alpha: float, kappa: int, ell: int) -> float:
    """Largest admissible r for the ball reduction: 1 / (6 sqrt(2 pi e) sqrt(m kappa) ell alpha q^(n/m))."""
    if alpha <= 0:
        return math.inf
    return 1.0 / (6 * math.sqrt(2 * math.pi * math.e) * math.sqrt(m * kappa) * ell * alpha * q ** (n / m))


def joint_superposition(q: int, n: int, g: GaussianParam) -> SparseState:
    """sum over s in Z_q^n and |j| <= cutoff of rho_r(j) |j>|s>."""
    cut = g.cutoff
    size = q**n * (2 * cut + 1)
    if size > STATE_BUDGET:
        raise ResourceError(f"joint superposition of {size} labels exceeds the simulator budget")
    js = np.arange(-cut, cut + 1, dtype=np.int64)
    ss = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)
    labels = np.column_stack([np.repeat(js, len(ss)), np.tile(ss, (len(js), 1))])
    amps = np.repeat(rho_values(g.r, js), len(ss))
    return SparseState.build(edcp_layout(n, q, cut), labels, amps)


def centers(labels: np.ndarray, A: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """A s - j b mod q for every (j, s) label row."""
    j, s = labels[:, 0], labels[:, 1:]
    return np.mod(s @ A.T - j[:, None] * b[None, :], q)


def coset_structure(state: SparseState, window: int) -> tuple[bool, np.ndarray | None, np.ndarray | None]:
    """Whether the support is {(j, x + j d) : |j| <= window}; returns (ok, x, d)."""
    N = state.layout.registers[1].modulus
    j = state.labels[:, 0]
    if len(j) != 2 * window + 1 or not np.array_equal(np.sort(j), np.arange(-window, window + 1)):
        return False, None, None
    s = state.labels[np.argsort(j), 1:]
    if len(s) == 1:
        return True, s[0], np.zeros(s.shape[1], dtype=np.int64)
    steps = np.mod(np.diff(s, axis=0), N)
    if not np.all(steps == steps[0]):
        return False, None, None
    return True, s[window], steps[0]


def _finish(collapsed: SparseState, g: GaussianParam, diag: dict) -> ReductionOutcome:
    ok, x, d = coset_structure(collapsed, g.cutoff)
    diag["support"] = collapsed.size
    if not ok:
        return ReductionOutcome(False, diagnostics=diag)
    diag["offset"] = x.tolist()
    diag["step"] = d.tolist()
    diag["l2_from_ideal"] = edcp_distance(collapsed, d, x, WeightFn.gaussian(g.r, g.kappa))
    return ReductionOutcome(True, collapsed, diag)


def cube_repetition(pub: LwePublic, g: GaussianParam, c: int, base: SparseState,
                    rng: np.random.Generator) -> ReductionOutcome:
    """One repetition of cube separation: fresh offsets w, measure the cell of A s - j b."""
    q = pub.q
    m = pub.A.shape[0]
    spec = GridSpec(q, c, rng.random(m))
    out = measure_derived(base, lambda lab: grid_fn(centers(lab, pub.A, pub.b, q), spec), rng)
    diag = {"cell": list(out.value) if isinstance(out.value, tuple) else [out.value],
            "cell_probability": out.probability}
    return _finish(out.collapsed, g, diag)


def lwe_to_edcp_cube(pub: LwePublic, r: float, kappa: int, c: int = 8, k: int | None = None, ell: int = 1,
                     rng: np.random.Generator | None = None, enforce_bound: bool = True) -> ReductionOutcome:
    """ell repetitions of cube separation; success iff every repetition collapsed to one coset.

    Failures here are not detectable by a real reduction; they are flagged
    from the simulated support and never retried.
    """
    rng = rng or np.random.default_rng()
    m, n = pub.A.shape
    q = pub.q
    k = m * ell if k is None else k
    if c < 8:
        raise ParameterError("cube separation needs c >= 8")
    if k < m:
        raise ParameterError("slack factor k must be at least m")
    limit = cube_bound(m, n, q, pub.params.alpha, kappa, ell)
    if enforce_bound and not r < limit:
        raise ParameterError(f"r={r} violates the cube-reduction bound r < {limit:.4g}")
    g = GaussianParam(r, kappa)
    base = joint_superposition(q, n, g)
    reps = [cube_repetition(pub, g, c, base, rng) for _ in range(ell)]
    ok = all(o.success for o in reps)
    diag = {"repetitions": [o.success for o in reps], "r_limit": limit, "k": k,
            "details": [o.diagnostics for o in reps]}
    return ReductionOutcome(ok, [o.payload for o in reps] if ok else None, diag)


def _sample_ball_points(m: int, RL: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """Exactly uniform integer points of the ball of radius RL, by rejection from the cube."""
    B = int(math.floor(RL))
    lim = RL * RL
    out, have = [], 0
    while have < count:
        X = rng.integers(-B, B + 1, size=(_BALL_BATCH, m), dtype=np.int64)
        X = X[np.einsum("ij,ij->i", X, X) <= lim]
        out.append(X)
        have += len(X)
    return np.concatenate(out)[:count]


def ball_repetition(pub: LwePublic, g: GaussianParam, R: float, L: int, base: SparseState,
                    rng: np.random.Generator, b=None) -> tuple[SparseState, dict]:
    """One repetition of ball intersection in integer coordinates scaled by L.

    The register value Y = L(A s - j b) + X mod qL is sampled from its exact
    joint law: a support point with Born probability, X uniform on the
    ball.  The state then collapses onto every support point whose ball
    contains Y.
    """
    q = pub.q
    m = pub.A.shape[0]
    b = pub.b if b is None else b
    C = centers(base.labels, pub.A, b, q) * L
    p = np.abs(base.amps) ** 2
    i = int(rng.choice(len(p), p=p / p.sum()))
    RL = R * L
    X = _sample_ball_points(m, RL, 1, rng)[0]
    Y = np.mod(C[i] + X, q * L)
    D = center(Y[None, :] - C, q * L)
    inside = np.einsum("ij,ij->i", D, D) <= RL * RL
    prob = float(p[inside].sum() / p.sum())
    collapsed = SparseState.build(base.layout, base.labels[inside], base.amps[inside])
    diag = {"ball_value": Y.tolist(), "value_mass": prob, "approximation_error": 0.0}
    return collapsed, diag


def default_radius(A: np.ndarray, q: int) -> tuple[float, str]:
    """lambda_1(Lambda_q(A)) / 3, exact when enumeration fits the budget, else the random-matrix bound."""
    m, n = A.shape
    if q**n <= ENUM_BUDGET:
        return lattice_minima(QaryBasisSpec(A, q)).lambda1_l2 / 3.0, "exact"
    return l2_bound(q, m, n) / 3.0, "bound"


def lwe_to_edcp_ball(pub: LwePublic, r: float, kappa: int, R: float | None = None, L: int | None = None,
                     ell: int = 1, rng: np.random.Generator | None = None,
                     enforce_bound: bool = True) -> ReductionOutcome:
    rng = rng or np.random.default_rng()
    m, n = pub.A.shape
    q = pub.q
    limit = ball_bound(m, n, q, pub.params.alpha, kappa, ell)
    if enforce_bound and not r < limit:
        raise ParameterError(f"r={r} violates the ball-reduction bound r < {limit:.4g}")
    if R is None:
        R, how = default_radius(pub.A, q)
    else:
        how = "given"
    L = 2**m if L is None else L
    if R < 1 or L < 2:
        raise ParameterError("ball needs R >= 1 and L >= 2")
    if q <= 2 * R:
        raise ParameterError("modulus must exceed the ball diameter")
    g = GaussianParam(r, kappa)
    base = joint_superposition(q, n, g)
    reps = []
    for _ in range(ell):
        collapsed, diag = ball_repetition(pub, g, R, L, base, rng)
        reps.append(_finish(collapsed, g, diag))
    ok = all(o.success for o in reps)
    diag = {"repetitions": [o.success for o in reps], "R": R, "R_source": how, "L": L, "r_limit": limit,
            "details": [o.diagnostics for o in reps]}
    return ReductionOutcome(ok, [o.payload for o in reps] if ok else None, diag)


def dlwe_to_dedcp(pub: LwePublic, r: float, kappa: int, R: float | None = None, L: int | None = None,
                  ell: int = 1, rng: np.random.Generator | None = None) -> ReductionOutcome:
    """Ball algorithm on a pair (A, b) that is either LWE or uniform.

    The default radius is a third of the random-matrix bound for the
    (n+1)-column lattice of [A | b].  Outputs are returned whatever their
    shape: basis states |j>|s> on uniform inputs, EDCP states on LWE inputs.
    """
    rng = rng or np.random.default_rng()
    m, n = pub.A.shape
    q = pub.q
    if R is None:
        R = l2_bound(q, m, n + 1) / 3.0
    L = 2**m if L is None else L
    if q <= 2 * R:
        raise ParameterError("modulus must exceed the ball diameter")
    g = GaussianParam(r, kappa)
    base = joint_superposition(q, n, g)
    states, details = [], []
    for _ in range(ell):
        collapsed, diag = ball_repetition(pub, g, R, L, base, rng)
        diag["support"] = collapsed.size
        states.append(collapsed)
        details.append(diag)
    diag = {"R": R, "L": L, "details": details}
    if q ** (n + 1) <= ENUM_BUDGET:
        Ab = np.column_stack([pub.A, pub.b])
        lam = lattice_minima(QaryBasisSpec(Ab, q)).lambda1_l2
        diag["lambda1_Ab"] = lam
        diag["radius_regime"] = bool(R <= lam / 3.0)
    return ReductionOutcome(True, states, diag)


def ball_intersection_ratio(m: int, R: float, dbar, L: int, q: int, rng: np.random.Generator | None = None,
                            samples: int = 200_000) -> float:
    """Fraction of grid points (1/L)Z^m in B(0, R) that also lie in B(dbar, R), taken mod q.

    Exact by enumeration for m <= 4, Monte-Carlo over uniform ball points otherwise.
    """
    dbar = np.atleast_1d(np.asarray(dbar, dtype=float))
    if dbar.shape == (1,) and m > 1:
        dbar = np.concatenate([dbar, np.zeros(m - 1)])
    if len(dbar) != m:
        raise ParameterError("shift must have length m")
    if not q > 2 * R + np.linalg.norm(dbar):
        raise ParameterError("need q > 2R + |dbar|")
    RL = R * L
    B = int(math.floor(RL))
    D = dbar * L
    qL = q * L

    def inside_shift(X: np.ndarray) -> np.ndarray:
        # wrap mod qL before comparing with the shifted ball
        diff = np.mod(X - D + qL / 2, qL) - qL / 2
        return np.einsum("ij,ij->i", diff, diff) <= RL * RL * (1 + 1e-12)

    if m <= 4:
        if (2 * B + 1) ** m > (1 << 26):
            raise ResourceError("grid too large for exact enumeration")
        axis = np.arange(-B, B + 1, dtype=np.int64)
        total = hits = 0
        for head in itertools.product(axis, repeat=m - 1):
            X = np.column_stack([np.tile(np.array(head, dtype=np.int64), (len(axis), 1)), axis])
            ball = np.einsum("ij,ij->i", X, X) <= RL * RL
            X = X[ball]
            total += len(X)
            hits += int(inside_shift(X.astype(float)).sum())
        return hits / total
    rng = rng or np.random.default_rng(0)
    pts = _sample_ball_points(m, RL, samples, rng).astype(float)
    return float(inside_shift(pts).mean())
