"""Seeded experiment runner: stream x policy x metrics, traces and aggregates.

Outputs per run directory:

``trace_<rep>.csv``
    one row per time step with the :data:`~driftconform.trace.TRACE_COLUMNS`.
``summary.csv``
    long format ``t, metric, mean, std`` across replications.
``meta.json``
    resolved configuration, stream variation bounds and failed replications.

With ``eval_stride = s`` the Monte-Carlo coverage is estimated at
``t = 1, 1 + s, 1 + 2s, ...``; each estimated gap then stands in for ``s``
steps of the cumulative regret and ``cvg_hat``/``gap`` are left empty on the
other rows.
"""

from __future__ import annotations

import copy
import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import ACI, decaying_stepsize, vacuous_step
from .core import SetKind, check_alpha, order_statistic_rank, quantile_of_point_masses, set_lebesgue
from .detect import SigmaSchedule
from .fullconf import DriftOCPFull, RoundStrategy, conformal_membership
from .learners import ConstantModel, LearnerDiverged, LinearModel, OnlineSGD, StepsizeSchedule, fit_ridge
from .metrics import coverage_gaps, rolling_coverage
from .ocp import DriftOCP
from .streams import (
    ORACLE,
    POLICY,
    PRETRAIN,
    STREAM,
    StreamConfig,
    derive_rng,
    generate_stream,
    pretrain_batch,
    read_stream_csv,
    sample_times,
    scenario_variation,
)
from .trace import TRACE_COLUMNS

POLICIES = ("driftocp", "driftocp_full", "aci_fixed", "aci_decaying", "vacuous")
MODELS = ("ridge", "abs_response", "external", "constant")
SUMMARY_METRICS = ("cum_regret", "q", "rolling_coverage", "width", "cvg_hat", "covered", "stage")

_COVSHIFT = ("cov_shift_mean", "cov_shift_var")


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class PolicyConfig:
    name: str = "driftocp"
    sigma: object = 4.0  # number, "theory24" or "theory_full"
    min_window: int = 10
    eta: float = 0.1
    gamma: float = 0.5
    warm_start: bool = True
    model: Optional[str] = None
    stepsize: dict = field(default_factory=lambda: {"kind": "inverse_sqrt", "c": 0.01})
    grid_points: int = 512
    label: Optional[str] = None

    def sigma_schedule(self) -> SigmaSchedule:
        if isinstance(self.sigma, str):
            return SigmaSchedule(self.sigma)
        return SigmaSchedule("fixed", float(self.sigma))

    @property
    def tag(self) -> str:
        if self.label:
            return self.label
        if self.name == "aci_fixed":
            return f"aci_fixed_eta{self.eta:g}"
        if self.name == "aci_decaying":
            return f"aci_decaying_gamma{self.gamma:g}"
        if self.name == "driftocp":
            return f"driftocp_{self.model}"
        return self.name


@dataclass
class ExperimentConfig:
    stream: StreamConfig
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    alpha: float = 0.1
    M: int = 500
    replications: int = 20
    eval_stride: Optional[int] = None
    master_seed: int = 0
    out: str = "runs/experiment"
    rolling_window: int = 100
    n_pretrain: Optional[int] = None
    n_train: Optional[int] = None
    ridge_lambda: float = 1.0
    warm_start_source: Optional[str] = None
    stream_file: Optional[str] = None
    threads: int = 1

    @property
    def T(self) -> int:
        return self.stream.T

    def to_json(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("stream", "policy")}
        out["stream"] = self.stream.to_json()
        out["policy"] = asdict(self.policy)
        return out


# --------------------------------------------------------------- config io

def _resolve_defaults(cfg: ExperimentConfig) -> ExperimentConfig:
    covshift = cfg.stream.scenario in _COVSHIFT
    if cfg.n_pretrain is None:
        cfg.n_pretrain = 100 if covshift else 500
    if cfg.n_train is None:
        cfg.n_train = 500
    if cfg.warm_start_source is None:
        cfg.warm_start_source = "fresh" if covshift else "pretrain"
    if cfg.policy.model is None:
        if cfg.stream_file is not None:
            cfg.policy.model = "external"
        elif cfg.stream.d == 0:
            cfg.policy.model = "abs_response"
        else:
            cfg.policy.model = "ridge"
    if cfg.eval_stride is None:
        cfg.eval_stride = 10 if cfg.policy.name == "driftocp_full" else 1
    return cfg


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    try:
        check_alpha(cfg.alpha)
    except ValueError as exc:
        raise ConfigError("alpha", str(exc)) from None
    for name in ("M", "replications", "eval_stride", "rolling_window", "threads"):
        if int(getattr(cfg, name)) < 1:
            raise ConfigError(name, "must be >= 1")
    if cfg.n_pretrain < 0 or cfg.n_train < 0:
        raise ConfigError("n_pretrain" if cfg.n_pretrain < 0 else "n_train", "must be >= 0")
    if cfg.ridge_lambda <= 0:
        raise ConfigError("ridge_lambda", "must be positive")
    if cfg.warm_start_source not in ("pretrain", "fresh"):
        raise ConfigError("warm_start_source", "must be 'pretrain' or 'fresh'")
    p = cfg.policy
    if p.name not in POLICIES:
        raise ConfigError("policy.name", f"unknown policy {p.name!r}; expected one of {POLICIES}")
    if p.model not in MODELS:
        raise ConfigError("policy.model", f"unknown model {p.model!r}; expected one of {MODELS}")
    if p.model == "external" and cfg.stream_file is None:
        raise ConfigError("policy.model", "'external' predictions need stream_file")
    if p.model == "ridge" and cfg.stream.d == 0:
        raise ConfigError("policy.model", "ridge needs features; stream has d = 0")
    try:
        p.sigma_schedule()
    except ValueError as exc:
        raise ConfigError("policy.sigma", str(exc)) from None
    if p.min_window < 0:
        raise ConfigError("policy.min_window", "must be >= 0")
    if p.name == "aci_fixed" and p.eta <= 0:
        raise ConfigError("policy.eta", "must be positive")
    if p.name == "driftocp_full":
        if cfg.stream.d == 0:
            raise ConfigError("policy.name", "driftocp_full needs features")
        if p.grid_points < 2:
            raise ConfigError("policy.grid_points", "must be >= 2")
        try:
            StepsizeSchedule(**p.stepsize)
        except (TypeError, ValueError) as exc:
            raise ConfigError("policy.stepsize", str(exc)) from None
    return cfg


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = copy.deepcopy(raw)
    if "stream" not in raw and raw.get("stream_file"):
        # replay files carry their own horizon and dimension
        try:
            _, X, Y, _ = read_stream_csv(raw["stream_file"])
        except (OSError, ValueError) as exc:
            raise ConfigError("stream_file", str(exc)) from None
        raw["stream"] = {"scenario": "stationary", "T": max(len(Y), 1), "d": X.shape[1]}
    if "stream" not in raw:
        raise ConfigError("stream", "missing")
    stream_raw = dict(raw.pop("stream"))
    if "T" in raw:
        stream_raw.setdefault("T", raw.pop("T"))
    if "seed" not in stream_raw:
        stream_raw["seed"] = int(raw.get("master_seed", 0))
    try:
        stream = StreamConfig(**stream_raw)
    except TypeError as exc:
        raise ConfigError("stream", str(exc)) from None
    except ValueError as exc:
        raise ConfigError("stream", str(exc)) from None
    policy_raw = raw.pop("policy", {})
    if isinstance(policy_raw, str):
        policy_raw = {"name": policy_raw}
    try:
        policy = PolicyConfig(**policy_raw)
    except TypeError as exc:
        raise ConfigError("policy", str(exc)) from None
    raw.pop("policies", None)
    known = {f.name for f in fields(ExperimentConfig)} - {"stream", "policy"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown configuration field")
    cfg = ExperimentConfig(stream=stream, policy=policy, **raw)
    return validate(_resolve_defaults(cfg))


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ------------------------------------------------------- replication data

class ReplicationData:
    """Stream, pretrained model and oracle draws of one replication.

    Shared between policies in a sweep so they are compared on identical
    data.
    """

    def __init__(self, cfg: ExperimentConfig, rep: int):
        self.cfg = cfg
        self.rep = rep
        self.seed = cfg.master_seed
        if cfg.stream_file is not None:
            _, X, Y, pred = read_stream_csv(cfg.stream_file)
            self.X, self.Y, self.external = X, Y, pred
        else:
            self.X, self.Y = generate_stream(cfg.stream, derive_rng(self.seed, rep, STREAM))
            self.external = None
        self.T = len(self.Y)
        self._pretrain()
        self._oracle_scores: dict = {}

    def _pretrain(self) -> None:
        cfg = self.cfg
        self.theta0 = None
        self.warm_residuals = None
        if cfg.stream_file is not None:
            self.Xp = self.Yp = None
            return
        rng = derive_rng(self.seed, self.rep, PRETRAIN)
        n_pre, n_tr = cfg.n_pretrain, cfg.n_train
        Xp, Yp = pretrain_batch(cfg.stream, max(n_pre, 1), rng)
        self.Xp, self.Yp = Xp[:n_pre], Yp[:n_pre]
        if cfg.warm_start_source == "fresh":
            self.Xw, self.Yw = pretrain_batch(cfg.stream, max(n_tr, 1), rng)
            self.Xw, self.Yw = self.Xw[:n_tr], self.Yw[:n_tr]
        else:
            self.Xw, self.Yw = self.Xp[:n_tr], self.Yp[:n_tr]
        if cfg.stream.d and n_pre > 0:
            self.theta0 = fit_ridge(self.Xp, self.Yp, cfg.ridge_lambda)
        elif cfg.stream.d:
            self.theta0 = np.zeros(cfg.stream.d)

    def model(self, name: str):
        if name == "ridge":
            return LinearModel(self.theta0)
        return ConstantModel(0.0)

    def centers(self, name: str) -> np.ndarray:
        if name == "external":
            return np.asarray(self.external, dtype=float)
        return self.model(name).predict(self.X) if self.X.shape[1] else np.zeros(self.T)

    def warm_quantile(self, name: str, alpha: float) -> float:
        if name == "external" or self.Yw is None or len(self.Yw) == 0:
            return 0.0
        model = self.model(name)
        pred = model.predict(self.Xw) if self.Xw.shape[1] else np.zeros(len(self.Yw))
        return quantile_of_point_masses(np.abs(self.Yw - pred), 1.0 - alpha)

    def eval_times(self) -> np.ndarray:
        if self.cfg.stream_file is not None:
            return np.zeros(0, dtype=int)
        return np.arange(1, self.T + 1, self.cfg.eval_stride)

    def oracle(self, t: int):
        return sample_times(self.cfg.stream, np.full(self.cfg.M, t), derive_rng(self.seed, self.rep, ORACLE, t))

    def oracle_scores(self, name: str) -> np.ndarray:
        """Matrix (evaluation times x M) of oracle scores under model ``name``."""
        if name not in self._oracle_scores:
            ts = self.eval_times()
            out = np.empty((ts.size, self.cfg.M))
            model = self.model(name)
            for i, t in enumerate(ts):
                Xo, Yo = self.oracle(int(t))
                pred = model.predict(Xo) if Xo.shape[1] else np.zeros(len(Yo))
                out[i] = np.abs(Yo - pred)
            self._oracle_scores[name] = out
        return self._oracle_scores[name]


# ---------------------------------------------------------------- policies

def _run_threshold_policy(data: ReplicationData, policy: PolicyConfig, alpha: float) -> dict:
    T = data.T
    centers = data.centers(policy.model)
    scores = np.abs(data.Y - centers)
    q0 = data.warm_quantile(policy.model, alpha) if policy.warm_start else 0.0
    out = {k: np.zeros(T) for k in ("q", "covered", "drift", "width", "n_intervals")}
    out["stage"] = np.ones(T)
    out["round"] = np.ones(T)
    if policy.name == "driftocp":
        ocp = DriftOCP(alpha, policy.sigma_schedule(), policy.min_window, q0)
        for i in range(T):
            out["stage"][i], out["round"][i] = ocp.stage, ocp.round
            res = ocp.observe(float(scores[i]))
            out["q"][i], out["covered"][i], out["drift"][i] = res.q, res.covered, res.drift
    else:
        if policy.name == "aci_fixed":
            aci = ACI(alpha, policy.eta, q0)
        else:
            aci = ACI(alpha, lambda t, g=policy.gamma: decaying_stepsize(t, g), q0)
        for i in range(T):
            out["q"][i] = aci.q
            out["covered"][i] = aci.observe(float(scores[i]))
        if not np.all(np.isfinite(out["q"])):
            raise LearnerDiverged("ACI threshold diverged")
    q = out["q"]
    out["width"] = np.where(q >= 0, 2.0 * q, 0.0)
    out["n_intervals"] = (q >= 0).astype(float)
    ts = data.eval_times()
    if ts.size:
        oracle = data.oracle_scores(policy.model)
        out["cvg_eval"] = np.mean(oracle <= q[ts - 1][:, None], axis=1)
    return out


def _run_vacuous(data: ReplicationData, alpha: float) -> dict:
    T = data.T
    rng = derive_rng(data.seed, data.rep, POLICY)
    whole = np.array([vacuous_step(rng, alpha).kind is SetKind.WHOLE_LINE for _ in range(T)])
    out = {
        "q": np.full(T, math.nan),
        "covered": whole.astype(float),
        "drift": np.zeros(T),
        "width": np.where(whole, math.inf, 0.0),
        "n_intervals": whole.astype(float),
        "stage": np.ones(T),
        "round": np.ones(T),
    }
    ts = data.eval_times()
    if ts.size:
        # coverage of the empty set / whole line is exact for any evaluation batch
        out["cvg_eval"] = whole[ts - 1].astype(float)
    return out


def strategy_covers(strategy: RoundStrategy, X, Y) -> np.ndarray:
    """Membership of each ``Y[i]`` in ``strategy(X[i])`` without building the set.

    Equivalent to constructing the grid set: ``y`` lies in a run of included
    grid points exactly when the grid points bracketing it are both included
    (or ``y`` is itself an included grid point).
    """
    Y = np.asarray(Y, dtype=float)
    if strategy.is_whole_line:
        return np.ones(Y.size, dtype=bool)
    m = strategy.cal_Y.size
    if order_statistic_rank(m + 1, 1.0 - strategy.alpha) == m + 1:
        return np.ones(Y.size, dtype=bool)
    learner = strategy.learner
    out = np.zeros(Y.size, dtype=bool)
    for i, (x, y) in enumerate(zip(np.asarray(X, dtype=float), Y)):
        grid = strategy.grid_for(x)
        ys = grid.values()
        if y < ys[0] or y > ys[-1]:
            continue
        j = min(int(np.searchsorted(ys, y, side="right")) - 1, ys.size - 1)
        if ys[j] == y:
            cand = ys[j : j + 1]
        else:
            cand = ys[j : j + 2]
        out[i] = bool(np.all(conformal_membership(learner, strategy.cal_X, strategy.cal_Y, x, cand, strategy.alpha)))
    return out


def _run_full(data: ReplicationData, policy: PolicyConfig, alpha: float) -> dict:
    T = data.T
    theta0 = data.theta0 if data.theta0 is not None else np.zeros(data.X.shape[1])
    learner = OnlineSGD(theta0, StepsizeSchedule(**policy.stepsize))
    ocp = DriftOCPFull(alpha, learner, policy.sigma_schedule(), policy.min_window, policy.grid_points)
    out = {k: np.zeros(T) for k in ("q", "covered", "drift", "width", "n_intervals", "stage", "round")}
    ts = data.eval_times()
    eval_pos = {int(t): i for i, t in enumerate(ts)}
    cvg = np.full(ts.size, math.nan)
    for i in range(T):
        t = i + 1
        x, y = data.X[i], float(data.Y[i])
        out["stage"][i], out["round"][i] = ocp.stage, ocp.round
        if t in eval_pos:
            Xo, Yo = data.oracle(t)
            cvg[eval_pos[t]] = float(np.mean(strategy_covers(ocp.strategy, Xo, Yo)))
        strategy = ocp.strategy
        pset = ocp.predict(x)
        # the q column carries the grid resolution for full conformal sets
        out["q"][i] = strategy.last_grid.step if pset.kind is not SetKind.WHOLE_LINE and strategy.last_grid else math.nan
        covered, drift = ocp.observe(x, y, pset)
        out["covered"][i], out["drift"][i] = covered, drift
        out["width"][i] = set_lebesgue(pset)
        out["n_intervals"][i] = pset.n_intervals
    if ts.size:
        out["cvg_eval"] = cvg
    return out


def run_policy(data: ReplicationData, policy: PolicyConfig, alpha: float) -> dict:
    if policy.name == "vacuous":
        return _run_vacuous(data, alpha)
    if policy.name == "driftocp_full":
        return _run_full(data, policy, alpha)
    return _run_threshold_policy(data, policy, alpha)


# ------------------------------------------------------------------ traces

def build_trace(arrays: dict, eval_times: np.ndarray, stride: int, alpha: float) -> dict:
    """Assemble trace columns; ``cvg_hat``/``gap`` are NaN off the evaluation grid."""
    T = len(arrays["covered"])
    cvg_hat = np.full(T, math.nan)
    gap = np.full(T, math.nan)
    cum = np.full(T, math.nan)
    if eval_times.size:
        cvg_hat[eval_times - 1] = arrays["cvg_eval"]
        gap[eval_times - 1] = coverage_gaps(arrays["cvg_eval"], alpha)
        inc = np.zeros(T)
        inc[eval_times - 1] = gap[eval_times - 1] * stride
        cum = np.cumsum(inc)
    return {
        "t": np.arange(1, T + 1),
        "stage": arrays["stage"].astype(int),
        "round": arrays["round"].astype(int),
        "q": arrays["q"],
        "covered": arrays["covered"].astype(int),
        "cvg_hat": cvg_hat,
        "gap": gap,
        "cum_regret": cum,
        "drift": arrays["drift"].astype(int),
        "width": arrays["width"],
        "n_intervals": arrays["n_intervals"].astype(int),
    }


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def write_trace(path, trace: dict) -> None:
    cols = [trace[c] for c in TRACE_COLUMNS]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])


def read_trace(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    out = {}
    for j, name in enumerate(header):
        out[name] = np.array([float(r[j]) if r[j] != "" else math.nan for r in rows])
    return out


def aggregate(traces: list, rolling_window: int = 100, columns=SUMMARY_METRICS) -> dict:
    """Per-t mean and unbiased std across replications for each column.

    ``rolling_coverage`` is derived from the ``covered`` column.  A single
    replication reports zero std; cells missing in every replication stay
    NaN.
    """
    if not traces:
        raise ValueError("no traces to aggregate")
    T = len(traces[0]["t"])
    if any(len(tr["t"]) != T for tr in traces):
        raise ValueError("traces differ in length")
    summary = {}
    for name in columns:
        if name == "rolling_coverage":
            stack = np.vstack([rolling_coverage(tr["covered"], rolling_window) for tr in traces])
        else:
            stack = np.vstack([np.asarray(tr[name], dtype=float) for tr in traces])
        summary[name] = _mean_std(stack)
    return summary


def _mean_std(stack: np.ndarray):
    with np.errstate(invalid="ignore"):
        finite_or_inf = ~np.isnan(stack)
        count = finite_or_inf.sum(axis=0)
        filled = np.where(finite_or_inf, stack, 0.0)
        mean = np.where(count > 0, filled.sum(axis=0) / np.maximum(count, 1), math.nan)
        dev = np.where(finite_or_inf, stack - mean, 0.0)
        dev = np.where(np.isnan(dev), 0.0, dev)
        var = np.where(count > 1, (dev**2).sum(axis=0) / np.maximum(count - 1, 1), 0.0)
        std = np.where(count > 0, np.sqrt(var), math.nan)
        std = np.where(np.isinf(mean), math.nan, std)
    return mean, std


def write_summary(path, summary: dict) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "metric", "mean", "std"])
        for name, (mean, std) in summary.items():
            for i in range(mean.size):
                w.writerow([i + 1, name, _fmt(mean[i]), _fmt(std[i])])


# ------------------------------------------------------------------ driver

def _replication_task(args):
    cfg, rep, policies = args
    data = ReplicationData(cfg, rep)
    results = {}
    for pol in policies:
        try:
            arrays = run_policy(data, pol, cfg.alpha)
            results[pol.tag] = build_trace(arrays, data.eval_times(), cfg.eval_stride, cfg.alpha)
        except (LearnerDiverged, FloatingPointError, np.linalg.LinAlgError) as exc:
            results[pol.tag] = exc.__class__.__name__ + ": " + str(exc)
    return rep, results


def _thread_count(cfg: ExperimentConfig) -> int:
    env = os.environ.get("DRIFTCONFORM_THREADS")
    if env:
        return max(1, int(env))
    return max(1, int(cfg.threads))


def simulate(cfg: ExperimentConfig, policies=None) -> dict:
    """Run every replication for each policy; returns ``{tag: {rep: trace or error}}``."""
    policies = [cfg.policy] if policies is None else list(policies)
    tasks = [(cfg, rep, policies) for rep in range(cfg.replications)]
    threads = _thread_count(cfg)
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(_replication_task, tasks))
    else:
        done = [_replication_task(t) for t in tasks]
    out = {pol.tag: {} for pol in policies}
    for rep, results in sorted(done, key=lambda item: item[0]):
        for tag, res in results.items():
            out[tag][rep] = res
    return out


def write_outputs(cfg: ExperimentConfig, out_dir, traces: dict, policy: PolicyConfig, extra: Optional[dict] = None) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    good, failed = [], {}
    for rep in sorted(traces):
        res = traces[rep]
        if isinstance(res, str):
            failed[rep] = res
            continue
        write_trace(out_dir / f"trace_{rep}.csv", res)
        good.append(res)
    if good:
        summary = aggregate(good, cfg.rolling_window)
        write_summary(out_dir / "summary.csv", summary)
    if failed:
        with open(out_dir / "summary.csv", "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if not good:
                w.writerow(["t", "metric", "mean", "std"])
            for rep in sorted(failed):
                w.writerow(["", f"failed_replication_{rep}", "", ""])
    pcfg = copy.copy(cfg)
    pcfg.policy = policy
    tv, ks, n_cp = scenario_variation(cfg.stream) if cfg.stream_file is None else (math.nan, math.nan, 0)
    meta = {
        "config": pcfg.to_json(),
        "scenario_variation": {"tv_upper": tv, "ks_upper": ks, "n_cp": n_cp},
        "failed_replications": {str(k): v for k, v in failed.items()},
    }
    if extra:
        meta.update(extra)
    with open(out_dir / "meta.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return meta


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run one configuration and write traces, summary and meta."""
    traces = simulate(cfg)
    write_outputs(cfg, out_dir or cfg.out, traces[cfg.policy.tag], cfg.policy)
    return traces[cfg.policy.tag]


def run_sweep(cfg: ExperimentConfig, policies, out_dir=None) -> dict:
    """Run several policies on shared replications; one subdirectory per policy."""
    policies = [copy.copy(p) for p in policies]
    for p in policies:
        if p.model is None:
            p.model = cfg.policy.model
    tags = [p.tag for p in policies]
    if len(set(tags)) != len(tags):
        raise ConfigError("policies", "policy labels must be unique")
    for p in policies:
        probe = copy.copy(cfg)
        probe.policy = p
        validate(probe)
    if any(p.name == "driftocp_full" for p in policies) and cfg.eval_stride is None:
        cfg.eval_stride = 10
    traces = simulate(cfg, policies)
    base = Path(out_dir or cfg.out)
    for p in policies:
        write_outputs(cfg, base / p.tag, traces[p.tag], p)
    return traces


def default_sweep_policies(cfg: ExperimentConfig) -> list:
    """DriftOCP plus the ACI grid used for the pretrained-score comparison."""
    model = cfg.policy.model
    pols = [PolicyConfig(name="driftocp", model=model, sigma=cfg.policy.sigma, min_window=cfg.policy.min_window)]
    pols += [PolicyConfig(name="aci_fixed", eta=eta, model=model) for eta in (0.01, 0.1, 0.5)]
    pols += [PolicyConfig(name="aci_decaying", gamma=g, model=model) for g in (0.5, 0.6)]
    return pols
