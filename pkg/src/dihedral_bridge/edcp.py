"""LWE, DCP and extrapolated-DCP instances: generators, validators and JSON forms.

Ground-truth fields (secrets, errors, offsets) live on the instances for
white-box tests only.  Reductions take the public views.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core_math import GaussianParam, center, sample_discrete_gaussian
from .errors import ParameterError
from .statevector import (
    IntRegister,
    ModRegister,
    RegisterLayout,
    SparseState,
    WeightFn,
    apply_classical,
    phase_distance,
    prepare_weighted,
)

VERIFY_TOL = 1e-9


@dataclass(frozen=True)
class LweParams:
    n: int
    q: int
    alpha: float
    m: int
    kappa: int = 64

    def __post_init__(self) -> None:
        if self.q < 2 or self.n < 1:
            raise ParameterError("need q >= 2 and n >= 1")
        if self.m < self.n:
            raise ParameterError("need m >= n")
        # alpha == 0 is accepted as the noiseless degenerate case
        if not 0 <= self.alpha < 1:
            raise ParameterError("noise rate must lie in [0, 1)")

    @property
    def noise(self) -> GaussianParam | None:
        return GaussianParam(self.alpha * self.q, self.kappa) if self.alpha > 0 else None

    def to_dict(self) -> dict:
        return {"n": self.n, "q": self.q, "alpha": self.alpha, "m": self.m, "kappa": self.kappa}


@dataclass(frozen=True)
class LwePublic:
    """What a reduction may see: the matrix, the target vector and the parameters."""

    params: LweParams
    A: np.ndarray
    b: np.ndarray

    @property
    def q(self) -> int:
        return self.params.q


@dataclass(frozen=True)
class LweInstance:
    params: LweParams
    A: np.ndarray
    b: np.ndarray
    s0: np.ndarray
    e0: np.ndarray

    def public(self) -> LwePublic:
        return LwePublic(self.params, self.A, self.b)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "s0": self.s0.tolist(),
            "e0": self.e0.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "LweInstance":
        arr = lambda k: np.asarray(d[k], dtype=np.int64)  # noqa: E731
        return cls(LweParams(**d["params"]), arr("A"), arr("b"), arr("s0"), arr("e0"))

    @classmethod
    def from_json(cls, text: str) -> "LweInstance":
        return cls.from_dict(json.loads(text))


def gen_lwe(params: LweParams, rng: np.random.Generator) -> LweInstance:
    A = rng.integers(0, params.q, size=(params.m, params.n), dtype=np.int64)
    s0 = rng.integers(0, params.q, size=params.n, dtype=np.int64)
    g = params.noise
    e0 = np.zeros(params.m, dtype=np.int64) if g is None else sample_discrete_gaussian(g, rng, params.m)
    b = np.mod(A @ s0 + e0, params.q)
    return LweInstance(params, A, b, s0, e0)


def uniform_lwe_public(params: LweParams, rng: np.random.Generator) -> LwePublic:
    """Uniform (A, b) pair of the same shape, for the decisional null."""
    A = rng.integers(0, params.q, size=(params.m, params.n), dtype=np.int64)
    b = rng.integers(0, params.q, size=params.m, dtype=np.int64)
    return LwePublic(params, A, b)


@dataclass(frozen=True)
class EdcpParams:
    n: int
    N: int
    dist: WeightFn
    ell: int = 1

    def __post_init__(self) -> None:
        if self.N < 2 or self.n < 1:
            raise ParameterError("need N >= 2 and n >= 1")
        if self.ell < 1:
            raise ParameterError("need at least one state")

    @property
    def layout(self) -> RegisterLayout:
        return edcp_layout(self.n, self.N, self.dist.bound())

    def to_dict(self) -> dict:
        return {"n": self.n, "N": self.N, "dist": self.dist.to_dict(), "ell": self.ell}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "EdcpParams":
        return cls(d["n"], d["N"], WeightFn.from_dict(d["dist"]), d["ell"])

    @classmethod
    def from_json(cls, text: str) -> "EdcpParams":
        return cls.from_dict(json.loads(text))


def edcp_layout(n: int, N: int, bound: int) -> RegisterLayout:
    return RegisterLayout((IntRegister(bound), ModRegister(N, n)))


@dataclass
class EdcpInstance:
    params: EdcpParams
    s: np.ndarray
    offsets: list
    states: list = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "s": self.s.tolist(),
            "offsets": [np.asarray(x).tolist() for x in self.offsets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EdcpInstance":
        params = EdcpParams.from_dict(d["params"])
        s = np.asarray(d["s"], dtype=np.int64)
        xs = [np.asarray(x, dtype=np.int64) for x in d["offsets"]]
        return cls(params, s, xs, [edcp_state(s, x, params.dist, params.N) for x in xs])


def _check_gaussian_fits(dist: WeightFn, N: int) -> None:
    if dist.kind == "gaussian" and N <= 2 * dist.param.cutoff:
        raise ParameterError(f"N={N} must exceed twice the Gaussian cutoff {dist.param.cutoff}")


def edcp_state(s, x, dist: WeightFn, N: int, layout: RegisterLayout | None = None) -> SparseState:
    """Normalized sum_j dist(j) |j>|x + j s mod N> over the weight support."""
    s = np.atleast_1d(np.asarray(s, dtype=np.int64))
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    layout = layout or edcp_layout(len(s), N, dist.bound())
    base = prepare_weighted(layout, dist)
    return apply_classical(base, lambda j: x[None, :] + j[:, None] * s[None, :], [0], 1)


def gen_edcp(params: EdcpParams, rng: np.random.Generator) -> EdcpInstance:
    _check_gaussian_fits(params.dist, params.N)
    s = rng.integers(0, params.N, size=params.n, dtype=np.int64)
    xs = [rng.integers(0, params.N, size=params.n, dtype=np.int64) for _ in range(params.ell)]
    return EdcpInstance(params, s, xs, [edcp_state(s, x, params.dist, params.N) for x in xs])


def null_j_pmf(dist: WeightFn) -> tuple[np.ndarray, np.ndarray]:
    """Support and pmf proportional to dist(j)^2."""
    js = dist.support()
    w = dist(js) ** 2
    return js, w / w.sum()


def gen_decisional_null(params: EdcpParams, rng: np.random.Generator) -> list[SparseState]:
    """Basis states |j>|x> with j drawn proportional to dist^2 and x uniform."""
    js, pmf = null_j_pmf(params.dist)
    layout = params.layout
    out = []
    for _ in range(params.ell):
        j = int(rng.choice(js, p=pmf))
        x = rng.integers(0, params.N, size=params.n)
        out.append(SparseState.build(layout, [[j, *x.tolist()]], [1.0]))
    return out


def _label_distance(state: SparseState, labels: np.ndarray, amps: np.ndarray) -> float:
    return phase_distance(state.labels, state.amps / state.norm(), labels, amps / np.linalg.norm(amps))


def edcp_distance(state: SparseState, s, x, dist: WeightFn, window=None) -> float:
    """Phase-quotiented l2 distance from the ideal EDCP state, optionally restricted to a j window."""
    N = state.layout.registers[1].modulus
    s = np.atleast_1d(np.asarray(s, dtype=np.int64))
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    js = dist.support()
    if window is not None:
        js = np.arange(window[0], window[1] + 1)
    w = dist(js)
    keep = w > 0
    js, w = js[keep], w[keep]
    labels = np.column_stack([js, np.mod(x[None, :] + js[:, None] * s[None, :], N)])
    return _label_distance(state, labels, w.astype(complex))


def verify_edcp_state(state: SparseState, s, x, dist: WeightFn, window=None, tol: float = VERIFY_TOL) -> bool:
    """True iff ``state`` is the normalized ideal EDCP state for (s, x, dist) up to a global phase."""
    if len(state.layout.registers) != 2 or not isinstance(state.layout.registers[1], ModRegister):
        return False
    if state.layout.registers[1].arity != len(np.atleast_1d(s)):
        return False
    return edcp_distance(state, s, x, dist, window) <= tol


def lwe_residual(A, b, s, q: int) -> np.ndarray:
    """Centered b - A s mod q."""
    return center(np.asarray(b) - np.asarray(A) @ np.asarray(s), q)
