"""Conversions between Gaussian, uniform and two-point (DCP) coset states.

Every conversion acts on the integer register only; the position register
rides along.  Rejection steps use the largest admissible target scale, so
the reported acceptance probability is the best the reweighting allows.
"""
from __future__ import annotations

import math

import numpy as np

from ..core_math import GaussianParam, rho_values
from ..edcp import edcp_layout
from ..errors import ParameterError
from ..statevector import (
    IntRegister,
    SparseState,
    marginal,
    measure_derived,
    rejection_resample,
    relabel,
)
from .base import ReductionOutcome


def _root_mass(state: SparseState) -> dict[int, float]:
    vals, probs = marginal(state, 0)
    return {int(v[0]): math.sqrt(p) for v, p in zip(vals, probs)}


def _reshape(state: SparseState, window: np.ndarray, shape: np.ndarray, rng: np.random.Generator):
    """Rejection-sample the integer register to ``shape`` on ``window`` at the largest valid scale."""
    pi = _root_mass(state)
    have = np.array([pi.get(int(j), 0.0) for j in window])
    # labels pruned from the state carry no mass; the target is zero there too
    keep = have > 0
    window, have, shape = window[keep], have[keep], shape[keep]
    scale = float(np.min(have / shape))
    table = dict(zip(window.tolist(), (scale * shape).tolist()))

    def target(ks):
        return np.array([table.get(int(k), 0.0) for k in np.atleast_1d(ks)])

    return rejection_resample(state, target, rng)


def g_to_u(state: SparseState, r: float, c: float, rng: np.random.Generator) -> ReductionOutcome:
    """Gaussian to uniform on [0, M-1], M = c r: keep j >= 0, then reshape."""
    M = c * r
    if abs(M - round(M)) > 1e-9 or round(M) < 1:
        raise ParameterError("M = c r must be a positive integer")
    out = _to_uniform(state, int(round(M)), rng)
    out.diagnostics["branch_mass"] = float(np.sum(np.abs(state.amps[state.labels[:, 0] >= 0]) ** 2))
    return out


def u_to_g(state: SparseState, M: int, kappa: int, rng: np.random.Generator) -> ReductionOutcome:
    """Uniform on [0, M-1] to Gaussian r = M / sqrt(kappa).

    The register is shifted by h = floor((M-1)/2), which moves the offset to
    x + h s, and then reshaped to rho_r on the window [-h, M-1-h].
    """
    if M < 1:
        raise ParameterError("M must be positive")
    r = M / math.sqrt(kappa)
    h = (M - 1) // 2
    shifted = _shift(state, -h)
    window = np.arange(-h, M - h)
    ok, out, p_acc = _reshape(shifted, window, rho_values(r, window), rng)
    diag = {"r": r, "shift": h, "window": [int(-h), int(M - 1 - h)], "accept_probability": p_acc}
    return ReductionOutcome(ok, out, diag)


def _shift(state: SparseState, delta: int) -> SparseState:
    bound = int(np.abs(state.labels[:, 0] + delta).max())
    bound = max(bound, state.layout.registers[0].bound)
    layout = state.layout.replace(0, IntRegister(bound))

    def move(lab):
        lab[:, 0] += delta
        return lab

    return relabel(state, move, layout)


def edcp_self_reduce(state: SparseState, r1: float, r2: float, rng: np.random.Generator, kappa: int = 64,
                     uniform: bool = False) -> ReductionOutcome:
    """Narrow rho_{r1} to rho_{r2} on the r2 cutoff window, or Uniform(r1) to Uniform(r2) if ``uniform``."""
    if not r2 < r1:
        raise ParameterError("self-reduction needs r2 < r1")
    if uniform:
        if int(r2) != r2 or r2 < 1:
            raise ParameterError("uniform widths must be integers")
        window = np.arange(int(r2))
        shape = np.ones(len(window))
    else:
        cut = GaussianParam(r2, kappa).cutoff
        window = np.arange(-cut, cut + 1)
        shape = rho_values(r2, window)
    ok, out, p_acc = _reshape(state, window, shape, rng)
    return ReductionOutcome(ok, out, {"accept_probability": p_acc, "window": [int(window[0]), int(window[-1])]})


def dcp_secret_candidates(sbar: int, N: int) -> list[int]:
    """All s with 2 s = sbar mod N (two for even N when sbar is even, none if it is odd)."""
    return [s for s in range(N) if (2 * s - sbar) % N == 0]


def narrow_accept_bound(r: float) -> float:
    """2 exp(-2 pi / r^2) / (r / sqrt 2 + 1)."""
    return 2 * math.exp(-2 * math.pi / r**2) / (r / math.sqrt(2) + 1)


def gedcp_to_dcp(state: SparseState, N: int, r: float, rng: np.random.Generator, kappa: int = 64,
                 c: float = 0.5) -> ReductionOutcome:
    """One-dimensional Gaussian coset state to a DCP state with secret 2 s mod N.

    Narrow branch (r < 3 log2 N): measure |j| and keep v = 1.  Wide branch:
    convert to uniform on [0, 2M] with M = floor(c r), centre it, measure |j|
    and keep v != 0 coprime to N.  Accepted states are mapped by
    x -> x v^{-1} and then -v -> 0, v -> 1.
    """
    if state.layout.registers[1].arity != 1:
        raise ParameterError("the DCP conversion is one-dimensional")
    wide = r >= 3 * math.log2(N)
    diag: dict = {"branch": "wide" if wide else "narrow"}
    if wide:
        half = int(math.floor(c * r))
        width = 2 * half + 1
        u = _to_uniform(state, width, rng)
        diag.update({"uniform_width": width, "uniform": u.diagnostics})
        if not u.success:
            return ReductionOutcome(False, diagnostics=diag)
        sym = _shift(u.payload, -half)
    else:
        sym = state
    meas = measure_derived(sym, lambda lab: np.abs(lab[:, 0]), rng)
    v = int(meas.value)
    diag.update({"v": v, "v_probability": meas.probability})
    if wide:
        accept = v != 0 and math.gcd(v, N) == 1
    else:
        accept = v == 1
    js = set(meas.collapsed.labels[:, 0].tolist())
    if not accept or js != {-v, v}:
        return ReductionOutcome(False, diagnostics=diag)
    inv = pow(v, -1, N)

    def to_dcp(lab):
        lab[:, 1] = np.mod(lab[:, 1] * inv, N)
        lab[:, 0] = (lab[:, 0] == v).astype(np.int64)
        return lab

    out = relabel(meas.collapsed, to_dcp, edcp_layout(1, N, 1))
    diag["xbar"] = int(out.labels[out.labels[:, 0] == 0][0, 1])
    return ReductionOutcome(True, out, diag)


def _to_uniform(state: SparseState, width: int, rng: np.random.Generator) -> ReductionOutcome:
    sign = measure_derived(state, lambda lab: (lab[:, 0] >= 0).astype(np.int64), rng)
    diag = {"M": width, "sign": sign.value, "sign_probability": sign.probability}
    if sign.value != 1:
        return ReductionOutcome(False, diagnostics=diag)
    if width - 1 > int(sign.collapsed.labels[:, 0].max()):
        raise ParameterError("uniform window exceeds the input support")
    ok, out, p_acc = _reshape(sign.collapsed, np.arange(width), np.ones(width), rng)
    diag["accept_probability"] = p_acc
    return ReductionOutcome(ok, out, diag)
