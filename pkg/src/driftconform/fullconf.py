"""Full conformal prediction sets and the DriftOCP-full state machine.

For a hypothesized response ``y`` the learner is refit on its training
context augmented with ``(x, y)``; ``y`` joins the set when its own residual
does not exceed the ``(1 - alpha)`` quantile of the calibration residuals
together with itself.  Candidates are taken from a finite grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import PredictionSet, check_alpha, order_statistic_rank, set_contains, set_lebesgue
from .detect import DriftScanner, SigmaSchedule
from .learners import LearnerDiverged
from .trace import StepRecord


@dataclass(frozen=True)
class CandidateGrid:
    lo: float
    hi: float
    points: int = 512

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo >= self.hi:
            raise ValueError(f"grid needs finite lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 2:
            raise ValueError("grid needs at least 2 points")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)

    @property
    def step(self) -> float:
        return (self.hi - self.lo) / (self.points - 1)


def default_grid(cal_y, points: int = 512, center: Optional[float] = None, radius: float = 0.0) -> CandidateGrid:
    """Grid over ``[min y - 3 IQR, max y + 3 IQR]`` of the calibration responses.

    When ``center`` is given the span is widened to also cover
    ``center +/- radius`` (the test prediction and its residual reach).
    """
    return grid_around(response_range(cal_y), points, center, radius)


def response_range(cal_y) -> tuple:
    """``(min, max, 3 IQR)`` of the calibration responses."""
    cal_y = np.asarray(cal_y, dtype=float)
    q75, q25 = np.percentile(cal_y, [75, 25])
    return float(cal_y.min()), float(cal_y.max()), 3.0 * float(q75 - q25)


def grid_around(rng: tuple, points: int, center: Optional[float] = None, radius: float = 0.0) -> CandidateGrid:
    lo, hi, pad = rng
    if center is not None:
        lo, hi = min(lo, center - radius), max(hi, center + radius)
    lo, hi = lo - pad, hi + pad
    if hi - lo < 1e-9:
        lo, hi = lo - 1.0, hi + 1.0
    return CandidateGrid(float(lo), float(hi), points)


def mask_to_set(ys: np.ndarray, mask: np.ndarray) -> PredictionSet:
    """Maximal runs of included grid points become closed intervals."""
    if not mask.any():
        return PredictionSet.empty()
    m = mask.astype(np.int8)
    edges = np.diff(np.concatenate(([0], m, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return PredictionSet.from_intervals(zip(ys[starts], ys[ends]))


def _augmented_predictions(learner, cal_X: np.ndarray, x, ys: np.ndarray):
    """Predictions on calibration features and on ``x`` for every candidate."""
    if getattr(learner, "augmentation_invariant", False):
        p_cal = np.asarray(learner.predict(cal_X), dtype=float)
        p_test = float(learner.predict(np.asarray(x, dtype=float)[None, :])[0])
        return np.broadcast_to(p_cal, (ys.size, p_cal.size)), np.full(ys.size, p_test)
    affine = getattr(learner, "augmented_affine", None)
    coef = affine(x) if affine is not None else None
    if coef is not None:
        a, b = coef
        x = np.asarray(x, dtype=float)
        p_cal = (cal_X @ a)[None, :] + ys[:, None] * (cal_X @ b)[None, :]
        p_test = x @ a + ys * (x @ b)
        return p_cal, p_test
    rows, tests = [], []
    for y in ys:
        model = learner.augmented(x, y)
        rows.append(model.predict(cal_X))
        tests.append(model.predict(np.asarray(x, dtype=float)[None, :])[0])
    return np.array(rows), np.array(tests)


def conformal_membership(learner, cal_X, cal_Y, x, ys, alpha: float) -> np.ndarray:
    """Boolean mask: is each candidate ``y`` in the full conformal set."""
    cal_X = np.asarray(cal_X, dtype=float)
    cal_Y = np.asarray(cal_Y, dtype=float)
    ys = np.asarray(ys, dtype=float)
    m = cal_Y.size
    if m == 0:
        raise ValueError("empty calibration set")
    k = order_statistic_rank(m + 1, 1.0 - alpha)
    if k == m + 1:
        return np.ones(ys.size, dtype=bool)
    p_cal, p_test = _augmented_predictions(learner, cal_X, x, ys)
    if not (np.all(np.isfinite(p_cal)) and np.all(np.isfinite(p_test))):
        raise LearnerDiverged("learner diverged")
    s_cal = np.abs(cal_Y[None, :] - p_cal)
    s_test = np.abs(ys - p_test)
    # s_test <= k-th smallest of {s_test} U s_cal  <=>  fewer than k scores lie strictly below it
    below = (s_cal < s_test[:, None]).sum(axis=1)
    return below <= k - 1


@dataclass(frozen=True)
class ConformalBatch:
    """Calibration data and level for one full conformal construction.

    ``train`` is informational: the learner passed alongside must already be
    fitted on it.
    """

    cal_X: np.ndarray
    cal_Y: np.ndarray
    alpha: float
    grid: Optional[CandidateGrid] = None
    grid_points: int = 512
    train: tuple = ()


def full_conformal_set(batch: ConformalBatch, learner, x) -> PredictionSet:
    """Full conformal set at feature ``x`` over a response grid.

    When the quantile rank exceeds the calibration size every response is
    accepted and the exact whole line is returned.
    """
    alpha = check_alpha(batch.alpha)
    cal_X = np.asarray(batch.cal_X, dtype=float)
    cal_Y = np.asarray(batch.cal_Y, dtype=float)
    m = cal_Y.size
    if m == 0:
        raise ValueError("empty calibration set")
    if order_statistic_rank(m + 1, 1.0 - alpha) == m + 1:
        return PredictionSet.whole_line()
    grid = batch.grid
    if grid is None:
        grid = _auto_grid(learner, cal_X, cal_Y, x, batch.grid_points)
    ys = grid.values()
    return mask_to_set(ys, conformal_membership(learner, cal_X, cal_Y, x, ys, alpha))


def _auto_grid(learner, cal_X, cal_Y, x, points: int, cache: Optional[tuple] = None) -> CandidateGrid:
    """Grid spanning the calibration responses and the test prediction +/- the largest residual.

    ``cache`` may hold ``(response_range(cal_Y), max residual)`` for a frozen
    learner and calibration set.
    """
    center = float(learner.predict(np.asarray(x, dtype=float)[None, :])[0])
    if cache is None:
        cache = grid_cache(learner, cal_X, cal_Y)
    if not math.isfinite(center):
        raise LearnerDiverged("learner diverged")
    return grid_around(cache[0], points, center=center, radius=cache[1])


def grid_cache(learner, cal_X, cal_Y) -> tuple:
    resid = np.abs(cal_Y - np.asarray(learner.predict(cal_X), dtype=float))
    if not np.all(np.isfinite(resid)):
        raise LearnerDiverged("learner diverged")
    return response_range(cal_Y), float(resid.max())


class RoundStrategy:
    """Set-forming rule frozen for one round: learner snapshot plus calibration data."""

    def __init__(self, learner, cal_X, cal_Y, alpha: float, grid_points: int = 512, cal_truncated: bool = False):
        self.learner = learner
        self.cal_X = None if cal_X is None else np.asarray(cal_X, dtype=float)
        self.cal_Y = None if cal_Y is None else np.asarray(cal_Y, dtype=float)
        self.alpha = alpha
        self.grid_points = grid_points
        self.cal_truncated = cal_truncated
        self.last_grid: Optional[CandidateGrid] = None
        self._grid_cache: Optional[tuple] = None

    def grid_for(self, x) -> CandidateGrid:
        if self._grid_cache is None:
            self._grid_cache = grid_cache(self.learner, self.cal_X, self.cal_Y)
        return _auto_grid(self.learner, self.cal_X, self.cal_Y, x, self.grid_points, self._grid_cache)

    @property
    def is_whole_line(self) -> bool:
        return self.cal_Y is None

    def __call__(self, x) -> PredictionSet:
        if self.is_whole_line:
            return PredictionSet.whole_line()
        if order_statistic_rank(self.cal_Y.size + 1, 1.0 - self.alpha) == self.cal_Y.size + 1:
            self.last_grid = None
            return PredictionSet.whole_line()
        self.last_grid = self.grid_for(x)
        batch = ConformalBatch(self.cal_X, self.cal_Y, self.alpha, grid=self.last_grid)
        return full_conformal_set(batch, self.learner, x)


class DriftOCPFull:
    """DriftOCP-full: rounds of full conformal sets with drift-triggered stages.

    The live ``learner`` consumes every observed point.  At each round start
    it is snapshotted (training context = all data before the round) and the
    round's calibration set is the data of the preceding round; the first
    round of a later stage calibrates on the last (possibly truncated) round
    of the previous stage.
    """

    def __init__(
        self,
        alpha: float,
        learner,
        sigma: SigmaSchedule = SigmaSchedule(),
        min_window: int = 0,
        grid_points: int = 512,
    ):
        self.alpha = check_alpha(alpha)
        self.learner = learner
        self.sigma = sigma
        self.min_window = int(min_window)
        self.grid_points = grid_points
        self.stage = 1
        self.round = 1
        self.tau = 0
        self.round_start = 1
        self.history_size = 0
        self._cur_X: list = []
        self._cur_Y: list = []
        self.scanner = DriftScanner(self.alpha, self.min_window, start_global=1)
        self._sigma_now = sigma(1)
        self.strategy = RoundStrategy(None, None, None, self.alpha, grid_points)

    @property
    def round_clock(self) -> int:
        return len(self._cur_Y)

    def predict(self, x) -> PredictionSet:
        return self.strategy(x)

    def observe(self, x, y: float, pset: Optional[PredictionSet] = None):
        """Consume ``(x, y)`` after its set was formed; returns ``(covered, drift)``."""
        if pset is None:
            pset = self.strategy(x)
        covered = set_contains(pset, y)
        self.tau += 1
        self.history_size += 1
        self._cur_X.append(np.asarray(x, dtype=float))
        self._cur_Y.append(float(y))
        self.learner.observe(x, y)
        outcome = self.scanner.push(covered, self._sigma_now)
        if outcome.detected:
            self.stage += 1
            self._open_round(1, truncated=True)
        elif self.round_clock == 3 ** self.round:
            self._open_round(self.round + 1, truncated=False)
        return covered, outcome.detected

    def _open_round(self, r: int, truncated: bool) -> None:
        cal_X = np.array(self._cur_X)
        cal_Y = np.array(self._cur_Y)
        self.round = r
        self.round_start = self.tau + 1
        self._cur_X, self._cur_Y = [], []
        self.scanner.reset(self.round_start)
        self._sigma_now = self.sigma(self.round_start)
        self.strategy = RoundStrategy(
            self.learner.snapshot(), cal_X, cal_Y, self.alpha, self.grid_points, cal_truncated=truncated
        )


def run_driftocp_full(
    stream,
    alpha: float,
    learner,
    sigma: SigmaSchedule = SigmaSchedule(),
    min_window: int = 0,
    grid_points: int = 512,
) -> list[StepRecord]:
    """Drive DriftOCP-full over ``(x, y)`` pairs and return one record per step."""
    ocp = DriftOCPFull(alpha, learner, sigma, min_window, grid_points)
    records = []
    for t, (x, y) in enumerate(stream, start=1):
        stage, rnd = ocp.stage, ocp.round
        pset = ocp.predict(x)
        covered, drift = ocp.observe(x, y, pset)
        records.append(
            StepRecord(
                t=t,
                stage=stage,
                round=rnd,
                covered=int(covered),
                drift=int(drift),
                width=set_lebesgue(pset),
                n_intervals=pset.n_intervals,
            )
        )
    return records
