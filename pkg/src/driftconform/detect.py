"""Block coverage error and the sliding-window drift scan.

Both detection variants (threshold/quantile and general prediction-set form)
reduce to the same scan over a boolean coverage-flag sequence: for every
suffix ``[j, end]`` of the window the normalized statistic

    Z_j = |sum_{l=j}^{end} (flag_l - (1 - alpha))| / sqrt(end - j + 1)

is compared with a threshold, and the first suffix exceeding it signals drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import check_alpha


@dataclass(frozen=True)
class CoverageWindow:
    flags: tuple[bool, ...]
    start_global: int = 1

    def __post_init__(self):
        if self.start_global < 1:
            raise ValueError("start_global must be >= 1")


@dataclass(frozen=True)
class DetectionOutcome:
    detected: bool
    trigger_index: Optional[int]
    statistic: float


def block_coverage_error(flags: Sequence[bool], alpha: float) -> float:
    """Signed sum of ``flag - (1 - alpha)`` over the window."""
    alpha = check_alpha(alpha)
    arr = np.asarray(flags, dtype=float)
    if arr.size == 0:
        raise ValueError("empty window")
    return float(arr.sum() - arr.size * (1.0 - alpha))


def suffix_statistics(flags: Sequence[bool], alpha: float) -> np.ndarray:
    """Vector of ``Z_j`` for every window offset ``j`` (ascending)."""
    arr = np.asarray(flags, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0)
    counts = np.cumsum(arr[::-1])[::-1]
    return _z_from_counts(counts, alpha)


def _z_from_counts(counts: np.ndarray, alpha: float) -> np.ndarray:
    # counts[j] = number of covered flags in the suffix starting at offset j
    lengths = np.arange(counts.size, 0, -1, dtype=float)
    return np.abs(counts - lengths * (1.0 - alpha)) / np.sqrt(lengths)


def _outcome_from_stats(stats: np.ndarray, sigma: float, allowed: bool) -> DetectionOutcome:
    if stats.size == 0:
        return DetectionOutcome(False, None, 0.0)
    peak = float(stats.max())
    if allowed and peak > sigma:
        j = int(np.argmax(stats > sigma))
        return DetectionOutcome(True, j, peak)
    return DetectionOutcome(False, None, peak)


def drift_scan(window: CoverageWindow, alpha: float, sigma: float, min_window: int = 0) -> DetectionOutcome:
    """Scan every suffix of ``window``; report the first offset with ``Z > sigma``.

    Detection is suppressed while the window holds fewer than ``min_window``
    flags.  ``statistic`` is the maximum ``Z`` over all scanned offsets.
    """
    alpha = check_alpha(alpha)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    stats = suffix_statistics(window.flags, alpha)
    return _outcome_from_stats(stats, sigma, len(window.flags) >= min_window)


def theory_threshold_pretrained(tau: int) -> float:
    """``24 * sqrt(log(4 tau))``, the anytime schedule for pretrained scores."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return 24.0 * math.sqrt(math.log(4.0 * tau))


def theory_threshold_full(tau: int) -> float:
    """``10 * log(40 tau)**3``, the schedule for adaptively trained scores."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    return 10.0 * math.log(40.0 * tau) ** 3


@dataclass(frozen=True)
class SigmaSchedule:
    """Detection threshold rule.

    ``kind`` is ``"fixed"`` (constant ``value``), ``"theory24"`` (pretrained
    schedule) or ``"theory_full"``.  Thresholds are evaluated at the round's
    global start time.
    """

    kind: str = "fixed"
    value: float = 4.0

    def __post_init__(self):
        if self.kind not in ("fixed", "theory24", "theory_full"):
            raise ValueError(f"unknown sigma schedule {self.kind!r}")
        if self.kind == "fixed" and self.value <= 0:
            raise ValueError("fixed sigma must be positive")

    def __call__(self, tau: int) -> float:
        if self.kind == "theory24":
            return theory_threshold_pretrained(tau)
        if self.kind == "theory_full":
            return theory_threshold_full(tau)
        return self.value


@dataclass
class DriftScanner:
    """Incremental scanner over the flags of the current round.

    Keeps running suffix counts of covered flags so each new flag costs one
    vector update plus one vector comparison over the current window.
    """

    alpha: float
    min_window: int = 0
    start_global: int = 1
    _counts: np.ndarray = field(default_factory=lambda: np.zeros(16, dtype=np.int64), repr=False)
    _size: int = 0
    _flags: list = field(default_factory=list, repr=False)

    def reset(self, start_global: int) -> None:
        self.start_global = start_global
        self._size = 0
        self._flags = []

    @property
    def flags(self) -> tuple[bool, ...]:
        return tuple(self._flags)

    def __len__(self) -> int:
        return self._size

    def window(self) -> CoverageWindow:
        return CoverageWindow(self.flags, self.start_global)

    def push(self, covered: bool, sigma: float) -> DetectionOutcome:
        """Append one coverage flag and scan the window ending at it."""
        if self._size == self._counts.size:
            grown = np.zeros(2 * self._counts.size, dtype=np.int64)
            grown[: self._size] = self._counts[: self._size]
            self._counts = grown
        if covered:
            self._counts[: self._size] += 1
        self._counts[self._size] = int(bool(covered))
        self._size += 1
        self._flags.append(bool(covered))
        n = self._size
        stats = _z_from_counts(self._counts[:n], self.alpha)
        return _outcome_from_stats(stats, sigma, n >= self.min_window)
