"""Gaussian weight function, discrete Gaussian sampling and tail-mass bounds.

All sums "over Z" are evaluated on a symmetric window whose radius is taken
from a working tail parameter of at least 64, so the omitted mass is far
below double-precision noise.  ``rho`` uses the unnormalized convention
``rho_r(0) == 1``; probability normalization only happens in the samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import ParameterError

DEFAULT_KAPPA = 64
WORK_KAPPA = 64


def _ceil(x: float) -> int:
    # sqrt(kappa) * r is often an integer up to rounding noise
    return math.ceil(x - 1e-9)


@dataclass(frozen=True)
class GaussianParam:
    """Width ``r`` of a Gaussian weight together with its tail-cut parameter ``kappa``."""

    r: float
    kappa: int = DEFAULT_KAPPA

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ParameterError(f"Gaussian width must be positive, got r={self.r}")
        if int(self.kappa) != self.kappa or self.kappa < 1:
            raise ParameterError(f"kappa must be a positive integer, got {self.kappa}")

    @property
    def cutoff(self) -> int:
        return max(1, _ceil(math.sqrt(self.kappa) * self.r))


def _check_r(r: float) -> None:
    if not r > 0:
        raise ParameterError(f"Gaussian width must be positive, got r={r}")


def rho(r: float, x) -> float:
    """exp(-pi ||x||^2 / r^2) for a scalar or a vector ``x``."""
    _check_r(r)
    sq = float(np.sum(np.square(np.asarray(x, dtype=float))))
    return math.exp(-math.pi * sq / (r * r))


def rho_values(r: float, xs) -> np.ndarray:
    """Elementwise rho_r over an array of scalars."""
    _check_r(r)
    xs = np.asarray(xs, dtype=float)
    return np.exp(-math.pi * xs * xs / (r * r))


def work_radius(r: float, kappa: int = WORK_KAPPA) -> int:
    """Summation radius used for sums over Z: ceil(sqrt(max(kappa, 64)) * r)."""
    return max(1, _ceil(math.sqrt(max(kappa, WORK_KAPPA)) * r))


def rho_sum(r: float, B: int) -> float:
    """Sum of rho_r(j) over |j| <= B."""
    _check_r(r)
    if B < 0:
        return 0.0
    tail = rho_values(r, np.arange(1, B + 1))
    # small terms first
    return 1.0 + 2.0 * float(np.sum(tail[::-1]))


def rho_mass(r: float) -> float:
    """rho_r(Z), truncated at the working radius."""
    return rho_sum(r, work_radius(r))


def tail_ratio_at(r: float, B: int) -> float:
    """rho_r(Z \\ [-B, B]) / rho_r(Z) for any radius B >= 0."""
    _check_r(r)
    if B < 0:
        raise ParameterError("tail radius must be nonnegative")
    hi = B + work_radius(r)
    tail = 2.0 * float(np.sum(rho_values(r, np.arange(B + 1, hi + 1))[::-1]))
    return tail / rho_sum(r, hi)


def tail_ratio(g: GaussianParam) -> float:
    """Relative Gaussian mass outside the cutoff window of ``g``."""
    return tail_ratio_at(g.r, g.cutoff)


def tail_bound(r: float, kappa: float) -> float:
    """Explicit tail bound 2 exp(-(3/4) pi (sqrt(kappa) r + 1)^2 / (2r)^2)."""
    _check_r(r)
    t = math.sqrt(kappa) * r + 1.0
    return 2.0 * math.exp(-0.75 * math.pi * t * t / (4.0 * r * r))


def poisson_check(r: float, u: float, scale: float = 1.0) -> tuple[float, float]:
    """Both sides of Poisson summation on the 1-dimensional lattice ``scale * Z``.

    lhs = sum_j rho_r(scale*j + u)
    rhs = (r/scale) * sum_{x in Z/scale} cos(2 pi x u) rho_{1/r}(x)

    Each side is truncated where its terms drop below 1e-17 relative weight.
    """
    _check_r(r)
    if not scale > 0:
        raise ParameterError("lattice scale must be positive")
    # rho_r(t) < 1e-17 once |t| > r * sqrt(17 ln 10 / pi)
    reach = math.sqrt(17 * math.log(10) / math.pi) + 1.0
    J = math.ceil((abs(u) + r * reach) / scale) + 1
    js = np.arange(-J, J + 1)
    lhs = float(np.sum(np.sort(rho_values(r, scale * js + u))))

    K = math.ceil(reach * scale / r) + 1
    ks = np.arange(-K, K + 1)
    xs = ks / scale
    terms = np.cos(2 * math.pi * xs * u) * rho_values(1.0 / r, xs)
    rhs = (r / scale) * float(np.sum(terms[np.argsort(np.abs(terms))]))
    return lhs, rhs


@lru_cache(maxsize=256)
def _cdf(r: float, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    support = np.arange(-cutoff, cutoff + 1)
    w = rho_values(r, support)
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    cdf.setflags(write=False)
    support.setflags(write=False)
    return support, cdf


def discrete_gaussian_pmf(g: GaussianParam) -> tuple[np.ndarray, np.ndarray]:
    """Support [-cutoff, cutoff] and the truncated pmf proportional to rho_r."""
    support = np.arange(-g.cutoff, g.cutoff + 1)
    w = rho_values(g.r, support)
    return support, w / w.sum()


def sample_discrete_gaussian(g: GaussianParam, rng: np.random.Generator, size=None):
    """Inverse-CDF draw(s) from D_{Z,r} truncated to [-cutoff, cutoff]."""
    support, cdf = _cdf(float(g.r), g.cutoff)
    u = rng.random(size)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(support) - 1)
    out = support[idx]
    if size is None:
        return int(out)
    return out.astype(np.int64)


def folded_gaussian_pmf(s: float, N: int) -> np.ndarray:
    """pmf over Z_N (index = residue) of D_{Z,s} reduced mod N."""
    _check_r(s)
    W = work_radius(s) + N
    js = np.arange(-W, W + 1)
    w = rho_values(s, js)
    pmf = np.bincount(js % N, weights=w, minlength=N)
    return pmf / pmf.sum()


def center(x, q: int):
    """Representative of x mod q in (-q/2, q/2]."""
    y = np.mod(x, q)
    return np.where(y > q // 2, y - q, y)


class TailEstimate(NamedTuple):
    ratio: float
    stderr: float
    ci_low: float
    ci_high: float
    trials: int


def _sample_coset(r: float, shift: float, rng: np.random.Generator, size: int) -> np.ndarray:
    # points t = j + shift of Z + shift with weight rho_r(t)
    W = work_radius(r) + 1
    base = math.floor(-shift)
    js = np.arange(base - W, base + W + 2)
    w = rho_values(r, js + shift)
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), len(js) - 1)
    return js[idx] + shift


def vector_tail_check(
    m: int,
    r: float,
    u,
    trials: int,
    rng: np.random.Generator,
    radius_multiplier: float = 1.0,
) -> TailEstimate:
    """Monte-Carlo estimate of the rho_r mass of Z^m + u outside radius mult * sqrt(m) * r.

    The ratio is relative to the total mass of the coset, with a 3-sigma
    binomial confidence interval.
    """
    _check_r(r)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.shape == (1,) and m > 1:
        u = np.full(m, u[0])
    if len(u) != m:
        raise ParameterError("shift vector must have length m")
    if m < 1 or m > 8:
        raise ParameterError("vector_tail_check is limited to 1 <= m <= 8")
    if np.linalg.norm(u) > r + 1e-12:
        raise ParameterError("shift norm must not exceed r")
    if trials < 1:
        raise ParameterError("trials must be positive")
    pts = np.column_stack([_sample_coset(r, float(ui), rng, trials) for ui in u])
    radius = radius_multiplier * math.sqrt(m) * r
    outside = np.count_nonzero(np.sum(pts * pts, axis=1) > radius * radius)
    p = outside / trials
    se = math.sqrt(max(p * (1 - p), 1.0 / trials) / trials)
    return TailEstimate(p, se, max(0.0, p - 3 * se), min(1.0, p + 3 * se), trials)
