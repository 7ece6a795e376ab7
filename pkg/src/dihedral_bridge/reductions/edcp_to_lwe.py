"""EDCP states to LWE samples by two Fourier transforms and two measurements."""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..core_math import GaussianParam, sample_discrete_gaussian
from ..edcp import EdcpParams
from ..errors import ParameterError
from ..statevector import SparseState, lift_int_to_mod, measure, qft_mod
from .base import ReductionOutcome


def raw_noise_width(N: int, r: float) -> float:
    """Width of the Born-rule error of one circuit run: N / (sqrt(2) r)."""
    return N / (math.sqrt(2.0) * r)


def edcp_to_lwe_sample(state: SparseState, params: EdcpParams, rng: np.random.Generator,
                       widen_noise: bool = True) -> ReductionOutcome:
    """Turn one Gaussian EDCP state into an LWE pair (a', b) with b = <a', s> + e mod N.

    The circuit measures a after a transform of the position register, moves
    j into Z_N, transforms it and measures b.  The Born law of the error is
    D_{Z, N/(sqrt 2 r)} because amplitudes, not probabilities, carry rho.
    With ``widen_noise`` an independent D_{Z, N/(sqrt 2 r)} draw is added so
    the error follows D_{Z, N/r}; the unwidened value is kept in diagnostics.
    """
    dist = params.dist
    N = params.N
    if dist.kind == "gaussian":
        if dist.r < math.sqrt(dist.kappa):
            raise ParameterError("the error tail cut needs r >= sqrt(kappa)")
        if N <= 2 * dist.param.cutoff:
            raise ParameterError("N must exceed twice the Gaussian cutoff")
    st = qft_mod(state, 1)
    got_a = measure(st, 1, rng)
    a = np.atleast_1d(np.asarray(got_a.value, dtype=np.int64))
    st = lift_int_to_mod(got_a.collapsed, N, 0)
    st = qft_mod(st, 0)
    got_b = measure(st, 0, rng)
    raw_b = int(got_b.value)
    b = raw_b
    if widen_noise and dist.kind == "gaussian":
        extra = sample_discrete_gaussian(GaussianParam(raw_noise_width(N, dist.r)), rng)
        b = (raw_b + extra) % N
    a_out = np.mod(-a, N)
    diag = {"a_measured": a.tolist(), "raw_b": raw_b, "a_probability": got_a.probability,
            "b_probability": got_b.probability}
    return ReductionOutcome(True, (a_out, b), diag)


def dedcp_to_dlwe(states: Sequence[SparseState], params: EdcpParams, rng: np.random.Generator,
                  decide: Callable[[list], str] | None = None, widen_noise: bool = True) -> ReductionOutcome:
    """Run the sample circuit on every state and hand the pairs to a dLWE decision procedure."""
    pairs = []
    for st in states:
        out = edcp_to_lwe_sample(st, params, rng, widen_noise=widen_noise)
        pairs.append(out.payload)
    diag = {"samples": len(pairs)}
    if decide is not None and pairs:
        diag["verdict"] = decide(pairs)
    return ReductionOutcome(True, pairs, diag)
