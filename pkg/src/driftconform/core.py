"""Prediction sets on the real line and discrete quantiles.

A :class:`PredictionSet` is an immutable, canonical union of closed
intervals.  Touching or overlapping intervals are merged on construction so
that the interval count is well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np


class SetKind(str, Enum):
    EMPTY = "empty"
    WHOLE_LINE = "whole_line"
    INTERVALS = "intervals"


def normalize_intervals(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    """Sort intervals by left endpoint and merge any that overlap or touch."""
    items = sorted((float(lo), float(hi)) for lo, hi in intervals)
    merged: list[list[float]] = []
    for lo, hi in items:
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValueError(f"invalid interval [{lo}, {hi}]")
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class PredictionSet:
    """Finite union of disjoint closed intervals, or the empty set / whole line.

    Use the constructors :meth:`empty`, :meth:`whole_line` and
    :meth:`from_intervals` rather than instantiating directly.
    """

    kind: SetKind
    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind is SetKind.INTERVALS:
            if not self.intervals:
                raise ValueError("interval set needs at least one interval")
            if normalize_intervals(self.intervals) != self.intervals:
                raise ValueError("intervals must be sorted, disjoint and non-touching")
        elif self.intervals:
            raise ValueError(f"{self.kind.value} set carries no intervals")

    @classmethod
    def empty(cls) -> "PredictionSet":
        return cls(SetKind.EMPTY)

    @classmethod
    def whole_line(cls) -> "PredictionSet":
        return cls(SetKind.WHOLE_LINE)

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple[float, float]]) -> "PredictionSet":
        merged = normalize_intervals(intervals)
        if not merged:
            return cls.empty()
        return cls(SetKind.INTERVALS, merged)

    @property
    def n_intervals(self) -> int:
        """Interval count K (0 for the empty set, 1 for the whole line)."""
        if self.kind is SetKind.WHOLE_LINE:
            return 1
        return len(self.intervals)

    def __contains__(self, y: float) -> bool:
        return set_contains(self, y)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "intervals": [[lo, hi] for lo, hi in self.intervals]}

    @classmethod
    def from_json(cls, obj: dict) -> "PredictionSet":
        kind = SetKind(obj["kind"])
        if kind is SetKind.INTERVALS:
            return cls.from_intervals(tuple(pair) for pair in obj["intervals"])
        return cls(kind)


def quantile_of_point_masses(values: Sequence[float], level: float) -> float:
    """Left-continuous quantile of equally weighted point masses.

    Returns ``inf{x : F(x) >= level}``, i.e. the ``ceil(level * n)``-th order
    statistic of ``values``.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("empty support")
    if not 0.0 < level <= 1.0:
        raise ValueError(f"level must lie in (0, 1], got {level}")
    k = order_statistic_rank(arr.size, level)
    return float(np.partition(arr, k - 1)[k - 1])


def order_statistic_rank(n: int, level: float) -> int:
    """1-based rank ``ceil(level * n)``, guarded against float round-up."""
    k = math.ceil(level * n - 1e-12 * n)
    return min(max(k, 1), n)


def threshold_set(center: float, q: float) -> PredictionSet:
    """``{y : |y - center| <= q}`` for the absolute-residual score."""
    if not math.isfinite(q):
        raise ValueError("threshold must be finite")
    if q < 0:
        return PredictionSet.empty()
    return PredictionSet(SetKind.INTERVALS, ((center - q, center + q),))


def set_contains(pset: PredictionSet, y: float) -> bool:
    if pset.kind is SetKind.WHOLE_LINE:
        return True
    if pset.kind is SetKind.EMPTY:
        return False
    for lo, hi in pset.intervals:
        if y < lo:
            return False
        if y <= hi:
            return True
    return False


def set_lebesgue(pset: PredictionSet) -> float:
    """Total length; ``math.inf`` for the whole line."""
    if pset.kind is SetKind.WHOLE_LINE:
        return math.inf
    return float(sum(hi - lo for lo, hi in pset.intervals))


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha
