"""Comparison policies: ACI, the vacuous coin-flip policy and a pathological set."""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .core import PredictionSet, set_lebesgue, threshold_set
from .trace import StepRecord


def aci_update(q: float, eta: float, alpha: float, miscovered: bool) -> float:
    """``q + eta * (1{miscovered} - alpha)``; no floor is applied to ``q``."""
    return q + eta * ((1.0 if miscovered else 0.0) - alpha)


def decaying_stepsize(t: int, gamma: float) -> float:
    """``(t + 1) ** -gamma``."""
    if t < 1:
        raise ValueError("t starts at 1")
    return (t + 1.0) ** (-gamma)


class ACI:
    """Adaptive conformal inference on absolute-residual threshold sets.

    ``eta`` is either a constant or a callable ``t -> eta_t``.
    """

    def __init__(self, alpha: float, eta, q0: float = 0.0):
        self.alpha = alpha
        self.eta: Callable[[int], float] = eta if callable(eta) else (lambda t, _e=float(eta): _e)
        self.q = float(q0)
        self.t = 0

    def predict(self, center: float) -> PredictionSet:
        return threshold_set(center, self.q)

    def observe(self, score: float) -> bool:
        self.t += 1
        covered = score <= self.q
        self.q = aci_update(self.q, self.eta(self.t), self.alpha, not covered)
        return covered


def fixed_aci(alpha: float, eta: float, q0: float = 0.0) -> ACI:
    return ACI(alpha, eta, q0)


def decaying_aci(alpha: float, gamma: float, q0: float = 0.0) -> ACI:
    return ACI(alpha, lambda t: decaying_stepsize(t, gamma), q0)


def run_aci(stream: Iterable[tuple[float, float]], aci: ACI) -> list[StepRecord]:
    records = []
    for t, (score, center) in enumerate(stream, start=1):
        q = aci.q
        pset = aci.predict(center)
        covered = aci.observe(score)
        records.append(StepRecord(t=t, q=q, covered=int(covered), width=set_lebesgue(pset), n_intervals=pset.n_intervals))
    return records


def vacuous_step(rng: np.random.Generator, alpha: float) -> PredictionSet:
    """Empty set with probability ``alpha``, the whole line otherwise."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return PredictionSet.empty() if rng.random() < alpha else PredictionSet.whole_line()


def pathological_union(n: int, alpha: float) -> PredictionSet:
    """``union_{i<n} [i/n, (i + 1 - alpha)/n]``: n intervals of total length ``1 - alpha``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(n)
    return PredictionSet.from_intervals(zip(i / n, (i + 1.0 - alpha) / n))


def union_probability(pset: PredictionSet, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Probability mass of a finite interval union under a continuous CDF."""
    if pset.kind.value == "whole_line":
        return 1.0
    if not pset.intervals:
        return 0.0
    arr = np.asarray(pset.intervals)
    return float(np.sum(cdf(arr[:, 1]) - cdf(arr[:, 0])))
