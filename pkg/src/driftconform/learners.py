"""Score providers and online linear learners.

Every learner exposes ``predict(X)``, ``observe(x, y)`` and
``augmented(x, y)`` (a frozen model refit on the current training context
plus one hypothesized point).  Learners whose augmented parameters are
affine in the hypothesized response also expose ``augmented_affine(x)``,
which lets full conformal sets be evaluated over a whole response grid at
once; ``augmentation_invariant`` marks learners that ignore the
hypothesized point altogether.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------- stepsizes

@dataclass(frozen=True)
class StepsizeSchedule:
    """Stepsize rule indexed by the 1-based iteration ``n``.

    kinds:
      ``inverse_sqrt``   eta_n = c / sqrt(n)
      ``lsa_log``        eta_n = min(1 / sigma_hat, C log(n) / n)
      ``capped_inverse`` eta_n = min(gamma / n, 1 / L)
      ``fixed``          eta_n = eta
    """

    kind: str = "inverse_sqrt"
    c: float = 0.01
    C: float = 1.0
    sigma_hat: float = 1.0
    gamma: float = 1.0
    L: float = 1.0
    eta: float = 0.01

    def __post_init__(self):
        if self.kind not in ("inverse_sqrt", "lsa_log", "capped_inverse", "fixed"):
            raise ValueError(f"unknown stepsize kind {self.kind!r}")
        for name in ("c", "C", "sigma_hat", "gamma", "L"):
            if getattr(self, name) <= 0:
                raise ValueError(f"stepsize parameter {name} must be positive")
        if self.eta < 0:
            raise ValueError("fixed stepsize must be nonnegative")

    def __call__(self, n: int) -> float:
        if n < 1:
            raise ValueError("iteration index starts at 1")
        if self.kind == "inverse_sqrt":
            return self.c / math.sqrt(n)
        if self.kind == "lsa_log":
            return min(1.0 / self.sigma_hat, self.C * math.log(n) / n)
        if self.kind == "capped_inverse":
            return min(self.gamma / n, 1.0 / self.L)
        return self.eta


# ---------------------------------------------------------- update rules

def squared_loss_direction(theta, x, y, ridge: float = 0.0) -> np.ndarray:
    """Gradient ``2 x x^T theta - 2 y x`` (+ ``2 ridge theta``) of the squared loss."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    return 2.0 * x * (x @ theta - y) + 2.0 * ridge * theta


def sgd_update(theta, eta: float, x, y, ridge: float = 0.0) -> np.ndarray:
    """One LSA/SGD step ``theta - eta * (2 x x^T theta - 2 y x)``."""
    if eta < 0:
        raise ValueError("stepsize must be nonnegative")
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise ValueError(f"dimension mismatch: theta {theta.shape} vs x {x.shape}")
    return theta - eta * squared_loss_direction(theta, x, y, ridge)


def augmented_fit_one_step(theta_prev, eta: float, x, y, ridge: float = 0.0) -> np.ndarray:
    """Parameter after one update at the hypothesized point ``(x, y)``."""
    return sgd_update(theta_prev, eta, x, y, ridge)


def fit_ridge(X, Y, lam: float = 1.0) -> np.ndarray:
    """Ridge coefficients ``(X^T X + lam I)^{-1} X^T Y``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float).ravel()
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if X.shape[0] < 1 or X.shape[0] != Y.size:
        raise ValueError("X and Y must have the same positive number of rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise ValueError("non-finite inputs")
    gram = X.T @ X + lam * np.eye(X.shape[1])
    return np.linalg.solve(gram, X.T @ Y)


# ---------------------------------------------------------------- learners

class LearnerDiverged(RuntimeError):
    pass


class ConstantModel:
    """Predicts a constant and ignores every update (augmentation invariant)."""

    kind = "constant"
    augmentation_invariant = True

    def __init__(self, value: float = 0.0):
        self.value = float(value)

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        n = X.shape[0] if X.ndim == 2 else 1
        return np.full(n, self.value)

    def predict_one(self, x) -> float:
        return self.value

    def observe(self, x, y) -> None:
        pass

    def augmented(self, x, y) -> "ConstantModel":
        return self

    def snapshot(self) -> "ConstantModel":
        return self

    def to_json(self) -> dict:
        return {"kind": self.kind, "theta": [self.value]}


class LinearModel:
    """Fixed linear predictor ``x^T theta`` (pretrained, never updated)."""

    kind = "linear"
    augmentation_invariant = True

    def __init__(self, theta):
        self.theta = np.array(theta, dtype=float)
        if not np.all(np.isfinite(self.theta)):
            raise LearnerDiverged("non-finite parameters")

    @property
    def dim(self) -> int:
        return self.theta.size

    def predict(self, X) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.theta

    def predict_one(self, x) -> float:
        return float(np.asarray(x, dtype=float) @ self.theta)

    def observe(self, x, y) -> None:
        pass

    def augmented(self, x, y) -> "LinearModel":
        return self

    def snapshot(self) -> "LinearModel":
        return LinearModel(self.theta.copy())

    def to_json(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "LinearModel":
        return cls(obj["theta"])


class OnlineSGD(LinearModel):
    """Linear model updated by one SGD step per observed point.

    The augmented model at ``(x, y)`` is the current parameter after one
    more step at ``(x, y)`` with the next stepsize, so it is affine in ``y``.
    """

    kind = "online_sgd"
    augmentation_invariant = False

    def __init__(self, theta, schedule: StepsizeSchedule, ridge: float = 0.0, n_seen: int = 0):
        super().__init__(theta)
        self.schedule = schedule
        self.ridge = float(ridge)
        self.n_seen = int(n_seen)

    def next_eta(self) -> float:
        return self.schedule(self.n_seen + 1)

    def observe(self, x, y) -> None:
        self.theta = sgd_update(self.theta, self.next_eta(), x, y, self.ridge)
        self.n_seen += 1
        if not np.all(np.isfinite(self.theta)):
            raise LearnerDiverged(f"SGD parameters diverged after {self.n_seen} updates")

    def augmented(self, x, y) -> LinearModel:
        return LinearModel(augmented_fit_one_step(self.theta, self.next_eta(), x, y, self.ridge))

    def augmented_affine(self, x):
        """``(a, b)`` with augmented parameters ``a + y * b`` for every ``y``."""
        x = np.asarray(x, dtype=float)
        eta = self.next_eta()
        a = self.theta - eta * (2.0 * x * (x @ self.theta) + 2.0 * self.ridge * self.theta)
        b = 2.0 * eta * x
        return a, b

    def snapshot(self) -> "OnlineSGD":
        return OnlineSGD(self.theta.copy(), self.schedule, self.ridge, self.n_seen)

    def to_json(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.tolist(), "n_seen": self.n_seen}


class RefitRidge:
    """Ridge regression refit from scratch on the training context.

    ``augmented(x, y)`` refits on context plus ``(x, y)``; this is the
    generic (symmetric) full conformal learner and is only practical for
    small training sets.
    """

    kind = "refit_ridge"

    def __init__(self, dim: int, lam: float = 1.0):
        self.lam = float(lam)
        self._X: list = []
        self._Y: list = []
        self.theta = np.zeros(dim)

    def predict(self, X) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.theta

    def predict_one(self, x) -> float:
        return float(np.asarray(x, dtype=float) @ self.theta)

    def observe(self, x, y) -> None:
        self._X.append(np.asarray(x, dtype=float))
        self._Y.append(float(y))
        self.theta = fit_ridge(np.array(self._X), np.array(self._Y), self.lam)

    def augmented(self, x, y) -> LinearModel:
        X = np.array(self._X + [np.asarray(x, dtype=float)])
        Y = np.array(self._Y + [float(y)])
        return LinearModel(fit_ridge(X, Y, self.lam))

    def augmented_affine(self, x):
        # ridge solution is linear in the response vector
        x = np.asarray(x, dtype=float)
        X = np.array(self._X + [x]) if self._X else x[None, :]
        Y0 = np.array(self._Y + [0.0])
        a = fit_ridge(X, Y0, self.lam)
        e = np.zeros(len(Y0))
        e[-1] = 1.0
        b = fit_ridge(X, e, self.lam)
        return a, b

    def snapshot(self) -> "RefitRidge":
        other = RefitRidge(self.theta.size, self.lam)
        other._X = list(self._X)
        other._Y = list(self._Y)
        other.theta = self.theta.copy()
        return other

    def to_json(self) -> dict:
        return {"kind": self.kind, "theta": self.theta.tolist()}


def abs_residual_score(model, x, y: float) -> float:
    """``|y - model(x)|``."""
    return abs(float(y) - model.predict_one(x))


# --------------------------------------------------------------- stability

def run_sgd(theta0, X, Y, schedule: StepsizeSchedule, ridge: float = 0.0) -> np.ndarray:
    theta = np.array(theta0, dtype=float)
    for n, (x, y) in enumerate(zip(X, Y), start=1):
        theta = sgd_update(theta, schedule(n), x, y, ridge)
    return theta


def stability_gap(
    X,
    Y,
    replace_index: int,
    replacement: tuple,
    schedule: StepsizeSchedule,
    theta0=None,
    ridge: float = 0.0,
    probes=None,
    probe_seed: int = 0,
) -> float:
    """Largest prediction change after replacing one point of an SGD pass.

    Runs the online pipeline on ``(X, Y)`` and on the copy with point
    ``replace_index`` swapped for ``replacement``, then returns the sup of
    ``|x^T (theta - theta')|`` over the probe features.  By default the
    probes are 64 seeded standard-normal draws plus both covariates at the
    replaced index.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if not 0 <= replace_index < len(Y):
        raise IndexError("replace_index out of range")
    d = X.shape[1]
    theta0 = np.zeros(d) if theta0 is None else np.asarray(theta0, dtype=float)
    X2, Y2 = X.copy(), Y.copy()
    X2[replace_index] = np.asarray(replacement[0], dtype=float)
    Y2[replace_index] = float(replacement[1])
    if probes is None:
        rng = np.random.default_rng(probe_seed)
        probes = np.vstack([rng.standard_normal((64, d)), X[replace_index], X2[replace_index]])
    theta = run_sgd(theta0, X, Y, schedule, ridge)
    theta2 = run_sgd(theta0, X2, Y2, schedule, ridge)
    return float(np.max(np.abs(np.asarray(probes) @ (theta - theta2))))
