"""Coverage, regret and distance statistics."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .core import PredictionSet, set_contains, set_lebesgue


def mc_coverage(set_fn: Callable[[np.ndarray], PredictionSet], X, Y) -> float:
    """Fraction of the batch ``(X, Y)`` covered by ``set_fn(x)``."""
    Y = np.asarray(Y, dtype=float)
    if Y.size == 0:
        raise ValueError("empty evaluation batch")
    X = np.asarray(X, dtype=float).reshape(Y.size, -1)
    hits = sum(set_contains(set_fn(x), y) for x, y in zip(X, Y))
    return hits / Y.size


def threshold_coverage(scores, q: float) -> float:
    """Monte-Carlo coverage of a threshold set: mean of ``score <= q``."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise ValueError("empty evaluation batch")
    return float(np.mean(scores <= q))


def coverage_gaps(coverage_series, alpha: float) -> np.ndarray:
    return np.abs(np.asarray(coverage_series, dtype=float) - (1.0 - alpha))


def cumulative_regret(coverage_series, alpha: float) -> float:
    """``sum_t |cvg_t - (1 - alpha)|``."""
    c = np.asarray(coverage_series, dtype=float)
    if c.size and (c.min() < 0 or c.max() > 1):
        raise ValueError("coverage values must lie in [0, 1]")
    return float(coverage_gaps(c, alpha).sum())


def long_term_coverage(flags) -> float:
    f = np.asarray(flags, dtype=float)
    if f.size == 0:
        raise ValueError("no coverage flags")
    return float(f.mean())


def rolling_coverage(flags, window: int = 100) -> np.ndarray:
    """Mean of the last ``window`` flags at each step (shorter prefix at the start)."""
    if window < 1:
        raise ValueError("window must be >= 1")
    f = np.asarray(flags, dtype=float)
    c = np.concatenate(([0.0], np.cumsum(f)))
    idx = np.arange(1, f.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def empirical_ks(sample_a, sample_b) -> float:
    """Two-sample KS distance ``sup_x |F_a(x) - F_b(x)|``."""
    a = np.sort(np.asarray(sample_a, dtype=float))
    b = np.sort(np.asarray(sample_b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate((a, b))
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def width_stats(sets: Sequence[PredictionSet]) -> tuple[float, np.ndarray, int]:
    """``(mean finite width, per-step widths, number of infinite widths)``."""
    widths = np.array([set_lebesgue(s) for s in sets], dtype=float)
    finite = np.isfinite(widths)
    mean = float(widths[finite].mean()) if finite.any() else math.nan
    return mean, widths, int((~finite).sum())


def dkw_band(n: int, delta: float) -> float:
    """Generalized DKW deviation ``4 / sqrt(n) + sqrt(log(1 / delta) / (2 n))``."""
    return 4.0 / math.sqrt(n) + math.sqrt(math.log(1.0 / delta) / (2.0 * n))
