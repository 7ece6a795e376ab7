"""Small statistical helpers shared by tests and the experiment harness."""
from __future__ import annotations

import math

import numpy as np
from scipy import stats as _st


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


def empirical_pmf(samples, support) -> np.ndarray:
    """Frequencies of ``samples`` over the integer ``support`` (samples outside are ignored)."""
    support = np.asarray(support)
    samples = np.asarray(samples)
    lo = int(support.min())
    counts = np.bincount(samples - lo, minlength=int(support.max()) - lo + 1)
    counts = counts[support - lo]
    return counts / max(len(samples), 1)


def chi2_pvalue(counts, probs) -> float:
    """Pearson chi-square goodness-of-fit p-value, pooling cells with tiny expectations."""
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    probs = probs / probs.sum()
    total = counts.sum()
    expected = probs * total
    keep = expected >= 5
    if (~keep).any():
        counts = np.append(counts[keep], counts[~keep].sum())
        expected = np.append(expected[keep], expected[~keep].sum())
        if expected[-1] == 0:
            counts, expected = counts[:-1], expected[:-1]
    if len(counts) < 2:
        return 1.0
    return float(_st.chisquare(counts, expected).pvalue)


def chi2_uniform_pvalue(values, n_cells: int) -> float:
    counts = np.bincount(np.asarray(values, dtype=np.int64), minlength=n_cells)
    return chi2_pvalue(counts, np.full(n_cells, 1.0 / n_cells))


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)
