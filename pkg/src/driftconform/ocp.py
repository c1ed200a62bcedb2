"""DriftOCP: online conformal prediction with drift-triggered restarts.

Time is split into stages (drift-free segments) and each stage into rounds
of length ``3**r``.  Round ``r + 1`` thresholds scores at the empirical
quantile of round ``r``; a drift detection resets the stage while keeping the
last threshold as a warm start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import PredictionSet, check_alpha, set_lebesgue, threshold_set
from .detect import DriftScanner, SigmaSchedule
from .trace import StepRecord


def round_length(r: int) -> int:
    return 3 ** r


def quantile_update(round_scores: Sequence[float], alpha: float) -> float:
    """Smallest observed score ``q`` minimizing ``|#{s > q} - alpha * m|``."""
    s = np.sort(np.asarray(round_scores, dtype=float))
    if s.size == 0:
        raise ValueError("no calibration scores")
    above = s.size - np.searchsorted(s, s, side="right")
    objective = np.abs(above - alpha * s.size)
    return float(s[int(np.argmin(objective))])


@dataclass(frozen=True)
class OcpStepResult:
    set: Optional[PredictionSet]
    covered: bool
    drift: bool
    stage: int
    round: int
    round_clock: int
    q: float


class DriftOCP:
    """Stage/round state machine for pretrained non-conformity scores.

    Parameters
    ----------
    alpha : float
        Target miscoverage level.
    sigma : SigmaSchedule
        Detection threshold, evaluated at each round's global start time.
    min_window : int
        No detection is declared before the round holds this many points.
    q0 : float
        Threshold used by the very first round (0 reproduces the bare
        algorithm; a training-residual quantile gives a warm start).
    """

    def __init__(self, alpha: float, sigma: SigmaSchedule = SigmaSchedule(), min_window: int = 0, q0: float = 0.0):
        self.alpha = check_alpha(alpha)
        self.sigma = sigma
        self.min_window = int(min_window)
        self.stage = 1
        self.round = 1
        self.tau = 0
        self.round_start = 1
        self.q = float(q0)
        self.cur_round_scores: list[float] = []
        self.prev_round_scores: list[float] = []
        self.scanner = DriftScanner(self.alpha, self.min_window, start_global=1)
        self._sigma_now = sigma(1)

    @property
    def round_clock(self) -> int:
        return len(self.cur_round_scores)

    def predict(self, center: float) -> PredictionSet:
        return threshold_set(center, self.q)

    def observe(self, score: float, center: Optional[float] = None) -> OcpStepResult:
        if not math.isfinite(score):
            raise ValueError("score must be finite")
        q_used = self.q
        pset = None if center is None else threshold_set(center, q_used)
        covered = score <= q_used
        self.tau += 1
        self.cur_round_scores.append(float(score))
        outcome = self.scanner.push(covered, self._sigma_now)
        result = OcpStepResult(pset, covered, outcome.detected, self.stage, self.round, self.round_clock, q_used)
        if outcome.detected:
            # new stage keeps the current threshold; partial round scores are dropped
            self.stage += 1
            self._open_round(1)
        elif self.round_clock == round_length(self.round):
            self.q = quantile_update(self.cur_round_scores, self.alpha)
            self.prev_round_scores = self.cur_round_scores
            self._open_round(self.round + 1)
        return result

    def _open_round(self, r: int) -> None:
        if r == 1:
            self.prev_round_scores = []
        self.round = r
        self.round_start = self.tau + 1
        self.cur_round_scores = []
        self.scanner.reset(self.round_start)
        self._sigma_now = self.sigma(self.round_start)


def run_driftocp(
    stream: Iterable[tuple[float, float]],
    alpha: float,
    sigma: SigmaSchedule = SigmaSchedule(),
    min_window: int = 0,
    q0: float = 0.0,
) -> list[StepRecord]:
    """Drive DriftOCP over ``(score, center)`` pairs and return one record per step."""
    ocp = DriftOCP(alpha, sigma, min_window, q0)
    records = []
    for t, (score, center) in enumerate(stream, start=1):
        pset = ocp.predict(center)
        res = ocp.observe(score, center)
        records.append(
            StepRecord(
                t=t,
                stage=res.stage,
                round=res.round,
                q=res.q,
                covered=int(res.covered),
                drift=int(res.drift),
                width=set_lebesgue(pset),
                n_intervals=pset.n_intervals,
            )
        )
    return records
