"""Sparse statevector simulator over one bounded Z-register and several Z_N-registers.

A state is a lexicographically sorted array of integer basis labels (one
column per register coordinate) together with a matching complex amplitude
vector.  Every public operation returns a new, normalized state; nothing is
mutated in place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core_math import GaussianParam, rho_values
from .errors import ConsistencyError, ParameterError, PreconditionError, TailEvent

PRUNE = 1e-15
NORM_TOL = 1e-12


@dataclass(frozen=True)
class IntRegister:
    """Integer register holding values in [-bound, bound]."""

    bound: int

    @property
    def arity(self) -> int:
        return 1


@dataclass(frozen=True)
class ModRegister:
    """Register over Z_modulus^arity."""

    modulus: int
    arity: int = 1

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise ParameterError("register modulus must be at least 2")
        if self.arity < 1:
            raise ParameterError("register arity must be positive")


Register = IntRegister | ModRegister


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple

    def __post_init__(self) -> None:
        regs = tuple(self.registers)
        if sum(isinstance(r, IntRegister) for r in regs) > 1:
            raise ParameterError("a layout holds at most one integer register")
        object.__setattr__(self, "registers", regs)

    @property
    def width(self) -> int:
        return sum(r.arity for r in self.registers)

    def columns(self, index: int) -> slice:
        start = sum(r.arity for r in self.registers[:index])
        return slice(start, start + self.registers[index].arity)

    def replace(self, index: int, reg) -> "RegisterLayout":
        regs = list(self.registers)
        regs[index] = reg
        return RegisterLayout(tuple(regs))

    def check_labels(self, labels: np.ndarray) -> None:
        for i, reg in enumerate(self.registers):
            block = labels[:, self.columns(i)]
            if isinstance(reg, IntRegister):
                if block.size and np.abs(block).max() > reg.bound:
                    raise ParameterError(f"label exceeds integer register bound {reg.bound}")
            elif block.size and (block.min() < 0 or block.max() >= reg.modulus):
                raise ParameterError(f"label outside Z_{reg.modulus}")


class WeightFn:
    """Amplitude weight for the integer register: Gaussian(r), Uniform(M) or the 0/1 indicator."""

    def __init__(self, kind: str, r: float | None = None, M: int | None = None, kappa: int = 64):
        if kind == "gaussian":
            self.param = GaussianParam(float(r), kappa)
        elif kind == "uniform":
            if M is None or int(M) != M or M < 1:
                raise ParameterError("uniform weight needs an integer M >= 1")
            self.param = None
        elif kind == "indicator01":
            kind, M, self.param = "uniform", 2, None
        else:
            raise ParameterError(f"unknown weight kind {kind!r}")
        self.kind = kind
        self.M = None if M is None else int(M)

    @classmethod
    def gaussian(cls, r: float, kappa: int = 64) -> "WeightFn":
        return cls("gaussian", r=r, kappa=kappa)

    @classmethod
    def uniform(cls, M: int) -> "WeightFn":
        return cls("uniform", M=M)

    @classmethod
    def indicator01(cls) -> "WeightFn":
        return cls("indicator01")

    @property
    def r(self) -> float:
        return self.param.r

    @property
    def kappa(self) -> int:
        return self.param.kappa

    def support(self) -> np.ndarray:
        if self.kind == "gaussian":
            c = self.param.cutoff
            return np.arange(-c, c + 1, dtype=np.int64)
        return np.arange(self.M, dtype=np.int64)

    def __call__(self, j) -> np.ndarray:
        j = np.asarray(j)
        if self.kind == "gaussian":
            return rho_values(self.param.r, j)
        return ((j >= 0) & (j < self.M)).astype(float)

    def bound(self) -> int:
        s = self.support()
        return int(np.abs(s).max())

    def to_dict(self) -> dict:
        if self.kind == "gaussian":
            return {"kind": "gaussian", "r": self.param.r, "kappa": self.param.kappa}
        return {"kind": "uniform", "M": self.M}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightFn":
        if d["kind"] == "gaussian":
            return cls.gaussian(d["r"], d.get("kappa", 64))
        return cls("uniform", M=d["M"]) if d["kind"] == "uniform" else cls(d["kind"])

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightFn) and self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"WeightFn({self.to_dict()})"


def _sort_unique(labels: np.ndarray, amps: np.ndarray, merge: bool) -> tuple[np.ndarray, np.ndarray]:
    if len(labels) == 0:
        return labels, amps
    order = np.lexsort(labels.T[::-1])
    labels, amps = labels[order], amps[order]
    dup = np.all(labels[1:] == labels[:-1], axis=1)
    if dup.any():
        if not merge:
            raise ConsistencyError("label map is not injective on the support")
        starts = np.concatenate(([True], ~dup))
        group = np.cumsum(starts) - 1
        amps = np.bincount(group, weights=amps.real) + 1j * np.bincount(group, weights=amps.imag)
        labels = labels[starts]
    return labels, amps


@dataclass
class SparseState:
    layout: RegisterLayout
    labels: np.ndarray
    amps: np.ndarray
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, layout: RegisterLayout, labels, amps, *, merge: bool = False, normalize: bool = True,
              prune: bool = True) -> "SparseState":
        labels = np.asarray(labels, dtype=np.int64).reshape(-1, layout.width)
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if len(labels) != len(amps):
            raise ParameterError("labels and amplitudes differ in length")
        layout.check_labels(labels)
        labels, amps = _sort_unique(labels, amps, merge)
        if prune:
            keep = np.abs(amps) > PRUNE
            labels, amps = labels[keep], amps[keep]
        norm = math.sqrt(float(np.sum(np.abs(amps) ** 2)))
        if norm == 0.0:
            raise PreconditionError("state has empty support")
        if normalize:
            amps = amps / norm
        return cls(layout, labels, amps)

    @property
    def size(self) -> int:
        return len(self.amps)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amps) ** 2)))

    def register(self, index: int) -> np.ndarray:
        """Label columns of one register, shape (support, arity)."""
        return self.labels[:, self.layout.columns(index)]

    def amplitude(self, label) -> complex:
        key = np.asarray(_flatten_label(label), dtype=np.int64)
        hit = np.all(self.labels == key, axis=1)
        return complex(self.amps[hit][0]) if hit.any() else 0j

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in row): complex(a) for row, a in zip(self.labels, self.amps)}

    def dump_text(self) -> str:
        """Deterministic listing 'label : re im', lexicographically sorted."""
        lines = []
        for row, a in zip(self.labels, self.amps):
            lab = ",".join(str(int(v)) for v in row)
            lines.append(f"{lab} : {a.real:.17g} {a.imag:.17g}")
        return "\n".join(lines) + "\n"


class MeasurementOutcome(NamedTuple):
    value: object
    probability: float
    collapsed: SparseState


def _flatten_label(label) -> list[int]:
    out: list[int] = []
    for part in label if isinstance(label, (tuple, list)) else (label,):
        if isinstance(part, (tuple, list, np.ndarray)):
            out.extend(int(v) for v in part)
        else:
            out.append(int(part))
    return out


def _key(row: np.ndarray):
    return int(row[0]) if len(row) == 1 else tuple(int(v) for v in row)


def prepare_basis(layout: RegisterLayout, label) -> SparseState:
    flat = _flatten_label(label)
    if len(flat) != layout.width:
        raise ParameterError(f"label needs {layout.width} coordinates, got {len(flat)}")
    return SparseState.build(layout, [flat], [1.0])


def prepare_weighted(layout: RegisterLayout, weight: WeightFn, rest=None) -> SparseState:
    """Amplitudes proportional to weight(j) on register 0; other registers fixed to ``rest`` (default 0)."""
    if not isinstance(layout.registers[0], IntRegister):
        raise ParameterError("register 0 must be the integer register")
    js = weight.support()
    w = weight(js)
    keep = w > 0
    js, w = js[keep], w[keep]
    if len(js) == 0:
        raise ParameterError("weight function has empty support")
    others = np.zeros(layout.width - 1, dtype=np.int64) if rest is None else np.asarray(_flatten_label(rest))
    labels = np.column_stack([js, np.tile(others, (len(js), 1))]) if layout.width > 1 else js[:, None]
    return SparseState.build(layout, labels, w)


def qft_mod(state: SparseState, index: int, inverse: bool = False) -> SparseState:
    """|x> -> N^{-1/2} sum_a exp(+-2 pi i a x / N) |a>, coordinatewise on a Z_N register."""
    reg = state.layout.registers[index]
    if not isinstance(reg, ModRegister):
        raise ParameterError("qft_mod needs a modular register; lift the integer register first")
    N = reg.modulus
    cols = state.layout.columns(index)
    labels, amps = state.labels, state.amps
    for c in range(cols.start, cols.stop):
        rest = np.delete(labels, c, axis=1)
        if rest.shape[1]:
            groups, inv = np.unique(rest, axis=0, return_inverse=True)
            inv = inv.reshape(-1)
        else:
            groups, inv = np.zeros((1, 0), dtype=np.int64), np.zeros(len(amps), dtype=np.int64)
        dense = np.zeros((len(groups), N), dtype=complex)
        np.add.at(dense, (inv, labels[:, c]), amps)
        # sum_x f(x) e^{+2 pi i a x/N} is N * ifft
        out = np.fft.fft(dense, axis=1) / math.sqrt(N) if inverse else np.fft.ifft(dense, axis=1) * math.sqrt(N)
        g, a = np.nonzero(np.abs(out) > PRUNE)
        amps = out[g, a]
        labels = np.insert(groups[g], c, a, axis=1)
    return SparseState.build(state.layout, labels, amps)


def lift_int_to_mod(state: SparseState, N: int, index: int = 0) -> SparseState:
    """Reinterpret the integer register as Z_N; requires support within [-floor(N/2), ceil(N/2)-1]."""
    reg = state.layout.registers[index]
    if not isinstance(reg, IntRegister):
        raise ParameterError("lift_int_to_mod applies to the integer register")
    j = state.labels[:, index]
    lo, hi = -(N // 2), (N + 1) // 2 - 1
    if j.min() < lo or j.max() > hi:
        raise TailEvent(f"integer register support exceeds [{lo}, {hi}] for modulus {N}")
    labels = state.labels.copy()
    labels[:, index] = np.mod(j, N)
    return SparseState.build(state.layout.replace(index, ModRegister(N, 1)), labels, state.amps)


def _group_rows(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rows and the inverse index; single columns skip the slow row-wise unique."""
    if block.shape[1] == 1:
        vals, inv = np.unique(block[:, 0], return_inverse=True)
        return vals[:, None], inv.reshape(-1)
    vals, inv = np.unique(block, axis=0, return_inverse=True)
    return vals, inv.reshape(-1)


def marginal(state: SparseState, index: int) -> tuple[np.ndarray, np.ndarray]:
    """Distinct values of one register (rows) and their Born probabilities."""
    vals, inv = _group_rows(state.register(index))
    probs = np.bincount(inv, weights=np.abs(state.amps) ** 2, minlength=len(vals))
    return vals, probs / probs.sum()


def _collapse(state: SparseState, mask: np.ndarray) -> SparseState:
    return SparseState.build(state.layout, state.labels[mask], state.amps[mask])


def measure(state: SparseState, index: int, rng: np.random.Generator) -> MeasurementOutcome:
    vals, probs = marginal(state, index)
    k = int(rng.choice(len(vals), p=probs))
    mask = np.all(state.register(index) == vals[k], axis=1)
    return MeasurementOutcome(_key(vals[k]), float(probs[k]), _collapse(state, mask))


def measure_derived(state: SparseState, fn: Callable[[np.ndarray], np.ndarray],
                    rng: np.random.Generator) -> MeasurementOutcome:
    """Measure a register holding fn(label) without materializing it.

    ``fn`` maps the (support, width) label array to one derived value per row
    (a 1-d array or a 2-d array of rows).  The state is partitioned by that
    value and collapsed onto the observed block.
    """
    derived = np.asarray(fn(state.labels))
    if derived.ndim == 1:
        derived = derived[:, None]
    vals, inv = _group_rows(derived)
    probs = np.bincount(inv, weights=np.abs(state.amps) ** 2, minlength=len(vals))
    probs = probs / probs.sum()
    k = int(rng.choice(len(vals), p=probs))
    return MeasurementOutcome(_key(vals[k]), float(probs[k]), _collapse(state, inv == k))


def project(state: SparseState, mask: np.ndarray) -> tuple[float, SparseState | None]:
    """Born mass of the rows selected by ``mask`` and the renormalized projection (None if zero)."""
    mask = np.asarray(mask, dtype=bool)
    p = float(np.sum(np.abs(state.amps[mask]) ** 2)) / state.norm() ** 2
    if p <= 0.0:
        return 0.0, None
    return p, _collapse(state, mask)


def relabel(state: SparseState, fn: Callable[[np.ndarray], np.ndarray],
            layout: RegisterLayout | None = None) -> SparseState:
    """Apply a label permutation; fails if ``fn`` is not injective on the support."""
    new = np.asarray(fn(state.labels.copy()), dtype=np.int64)
    return SparseState.build(layout or state.layout, new, state.amps)


def apply_classical(state: SparseState, f: Callable[..., np.ndarray], sources: Sequence[int], target: int,
                    uncompute: bool = False) -> SparseState:
    """|src>|0> -> |src>|f(src)> on a modular target, or the inverse when ``uncompute`` is set."""
    reg = state.layout.registers[target]
    if not isinstance(reg, ModRegister):
        raise ParameterError("the target of a classical map must be a modular register")
    args = [state.register(i) if state.layout.registers[i].arity > 1 else state.register(i)[:, 0]
            for i in sources]
    val = np.mod(np.asarray(f(*args), dtype=np.int64), reg.modulus).reshape(len(state.amps), reg.arity)
    cols = state.layout.columns(target)
    cur = state.labels[:, cols]
    labels = state.labels.copy()
    if uncompute:
        if not np.array_equal(cur, val):
            raise ConsistencyError("target register does not hold f(sources) on the whole support")
        labels[:, cols] = 0
    else:
        if cur.any():
            raise PreconditionError("target register must be |0> before writing")
        labels[:, cols] = val
    return SparseState.build(state.layout, labels, state.amps)


def rejection_resample(state: SparseState, target: Callable[[np.ndarray], np.ndarray], rng: np.random.Generator,
                       index: int = 0) -> tuple[bool, SparseState | None, float]:
    """Reshape the marginal amplitudes of register ``index`` to ``target`` weights.

    With pi_k the root Born mass of label k, the accepted state has amplitudes
    amp * p_k / (pi_k ||p||) and acceptance has probability sum_k p_k^2.
    Returns (accepted, state or None, acceptance probability).
    """
    vals, inv = _group_rows(state.register(index))
    pi = np.sqrt(np.bincount(inv, weights=np.abs(state.amps) ** 2, minlength=len(vals)) / state.norm() ** 2)
    key = vals[:, 0] if vals.shape[1] == 1 else vals
    p = np.asarray(target(key), dtype=float)
    if np.any(p < 0) or np.any(p > pi + 1e-12):
        raise PreconditionError("rejection weights must satisfy 0 <= p_k <= pi_k")
    accept = float(np.sum(p * p))
    if accept <= 0.0 or rng.random() >= accept:
        return False, None, accept
    scale = np.where(pi > 0, p / np.where(pi > 0, pi, 1.0), 0.0)
    amps = state.amps / state.norm() * scale[inv]
    return True, SparseState.build(state.layout, state.labels, amps), accept


def phase_distance(la: np.ndarray, aa: np.ndarray, lb: np.ndarray, ab: np.ndarray) -> float:
    """min over theta of ||a - e^{i theta} b|| for two label/amplitude lists."""
    both = np.concatenate([la, lb])
    _, inv = np.unique(both, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    va = np.zeros(inv.max() + 1, dtype=complex)
    vb = np.zeros_like(va)
    np.add.at(va, inv[: len(la)], aa)
    np.add.at(vb, inv[len(la):], ab)
    inner = np.vdot(vb, va)
    phase = inner / abs(inner) if abs(inner) > 0 else 1.0
    # direct difference avoids the cancellation in sqrt(2 - 2|<a,b>|)
    return float(np.linalg.norm(va - phase * vb))


def l2_distance(a: SparseState, b: SparseState) -> float:
    """min over phases theta of || a - e^{i theta} b ||."""
    if a.layout != b.layout:
        raise ParameterError("states have different layouts")
    return phase_distance(a.labels, a.amps, b.labels, b.amps)
