"""Per-step trace rows shared by the online policies and the harness."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

TRACE_COLUMNS = (
    "t",
    "stage",
    "round",
    "q",
    "covered",
    "cvg_hat",
    "gap",
    "cum_regret",
    "drift",
    "width",
    "n_intervals",
)


@dataclass
class StepRecord:
    t: int
    stage: int = 1
    round: int = 1
    q: float = float("nan")
    covered: int = 0
    cvg_hat: Optional[float] = None
    gap: Optional[float] = None
    cum_regret: Optional[float] = None
    drift: int = 0
    width: float = 0.0
    n_intervals: int = 0

    def as_row(self) -> list:
        return [getattr(self, name) for name in TRACE_COLUMNS]


assert tuple(f.name for f in fields(StepRecord)) == TRACE_COLUMNS
