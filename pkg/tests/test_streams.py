import math

import numpy as np
import pytest
from scipy import integrate, stats

from driftconform.metrics import empirical_ks
from driftconform.streams import (
    StreamConfig,
    derive_rng,
    exp_rate_ks,
    flat_density,
    generate_stream,
    location_scale,
    oracle_batch,
    read_stream_csv,
    sample_at,
    sample_times,
    scenario_variation,
    write_stream_csv,
)


def test_piecewise_variance_regimes():
    cfg = StreamConfig("piecewise_variance")
    _, sig = location_scale(cfg, [1, 3999, 4000, 6999, 7000, 10_000])
    assert sig.tolist() == [0.5, 0.5, 2.0, 2.0, 3.5, 3.5]


def test_regression_scenario_laws():
    t = np.array([1, 500, 10_000])
    mu, sig = location_scale(StreamConfig("linear_bias"), t)
    assert mu == pytest.approx(0.002 * t) and sig.tolist() == [0.5] * 3
    _, sig = location_scale(StreamConfig("smooth_variance"), t)
    assert sig == pytest.approx(np.sqrt(1 + 0.008 * t))
    mu, sig = location_scale(StreamConfig("stationary"), t)
    assert mu.tolist() == [0, 0, 0] and sig.tolist() == [0.5] * 3


def test_noiseless_stationary_reduces_to_linear_map():
    cfg = StreamConfig("stationary", noise=0.0)
    for t in (1, 77, 10_000):
        p = sample_at(cfg, t, np.random.default_rng(t))
        assert p.y == 2 * p.x[0] + p.x[1]
        assert p.x.shape == (5,) and p.t == t


def test_time_out_of_range():
    cfg = StreamConfig("stationary", T=100)
    with pytest.raises(ValueError, match="out of range"):
        sample_at(cfg, 101, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sample_at(cfg, 0, np.random.default_rng(0))


def test_covariate_shift_regimes():
    cfg = StreamConfig("cov_shift_mean", noise=0.0)
    assert cfg.change_points == [3334, 6668] and cfg.d == 10
    X, Y = sample_times(cfg, [3333] * 4000 + [3334] * 4000, np.random.default_rng(0))
    assert X[:4000].mean() == pytest.approx(0.0, abs=0.02)
    assert X[4000:].mean() == pytest.approx(3.0, abs=0.02)
    assert Y == pytest.approx(X @ cfg.beta_star)
    var = StreamConfig("cov_shift_var", params={"misspecified": True}, noise=0.0)
    X, Y = sample_times(var, [9000] * 2000, np.random.default_rng(1))
    assert X.std() == pytest.approx(10.0, rel=0.02)
    assert Y == pytest.approx(X @ var.beta_star + (X * X).sum(axis=1) / 100)


def test_beta_star_fixed_by_experiment_seed():
    a, b = StreamConfig("cov_shift_mean", seed=4), StreamConfig("cov_shift_mean", seed=4)
    assert np.array_equal(a.beta_star, b.beta_star)
    assert not np.array_equal(a.beta_star, StreamConfig("cov_shift_mean", seed=5).beta_star)


def test_default_change_points_rescale_with_horizon():
    assert StreamConfig("cov_shift_var", T=2000).change_points == [667, 1334]
    assert StreamConfig("piecewise_variance", T=1000).change_points == [400, 700]


def test_invalid_configs():
    with pytest.raises(ValueError):
        StreamConfig("bogus")
    with pytest.raises(ValueError, match="increasing"):
        StreamConfig("piecewise_variance", change_points=[10, 5])
    with pytest.raises(ValueError):
        StreamConfig("piecewise_variance", T=100, change_points=[50, 200])


def test_oracle_batch_properties():
    cfg = StreamConfig("stationary")
    X, Y = oracle_batch(cfg, 5, 0)
    assert X.shape == (0, 5) and Y.size == 0
    a = oracle_batch(cfg, 17, 50, run_seed=3)
    b = oracle_batch(cfg, 17, 50, run_seed=3)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    _, Y = oracle_batch(cfg, 1, 100_000, run_seed=9)
    sd = math.sqrt(5 + 0.25)
    assert abs(Y.mean()) <= 4 * sd / math.sqrt(Y.size)


def test_oracle_independent_of_main_stream():
    cfg = StreamConfig("stationary", T=50)
    before = generate_stream(cfg, derive_rng(0, 0))
    oracle_batch(cfg, 10, 500, run_seed=0)
    after = generate_stream(cfg, derive_rng(0, 0))
    assert np.array_equal(before[1], after[1])
    assert not np.array_equal(derive_rng(0, 0).random(4), derive_rng(0, 1).random(4))


def test_lag_one_autocorrelation():
    cfg = StreamConfig("stationary")
    _, Y = generate_stream(cfg, derive_rng(2, 0))
    y = Y - Y.mean()
    rho = float(y[1:] @ y[:-1] / (y @ y))
    assert abs(rho) <= 4 / math.sqrt(cfg.T)


def test_exp_rate_ks_closed_form():
    for eps in (0.1, 0.5, 1.0, 3.0):
        x = math.log(1 + eps) / eps
        closed = (1 + eps) ** (-1 / eps) * eps / (1 + eps)
        grid = np.linspace(0, 20, 200_001)
        numeric = np.max(np.exp(-grid) - np.exp(-(1 + eps) * grid))
        assert exp_rate_ks(eps) == pytest.approx(closed, rel=1e-12)
        assert exp_rate_ks(eps) == pytest.approx(numeric, abs=1e-8)
        assert exp_rate_ks(eps) == pytest.approx(math.exp(-x) - math.exp(-(1 + eps) * x))
    assert exp_rate_ks(1.0) == pytest.approx(0.25)


def test_exp_rate_blocks_adjacent_ks():
    cfg = StreamConfig("exp_rate_blocks", T=200_000, params={"eps": 1.0, "blocks": 2})
    _, Y = generate_stream(cfg, derive_rng(0, 0))
    half = cfg.block_length
    assert abs(empirical_ks(Y[:half], Y[half:]) - 0.25) <= 0.01
    # within a block the rate is stable; across the boundary KS exceeds the within-block value
    q = half // 2
    within = empirical_ks(Y[:q], Y[q:half])
    across = empirical_ks(Y[q:half], Y[half:half + q])
    assert abs(1 / Y[:q].mean() - 1 / Y[q:half].mean()) < 0.02
    assert across > within


def test_piecewise_flat_uniform_when_eps_zero():
    cfg = StreamConfig("piecewise_flat", T=100_000, params={"eps": 0.0, "k": 16})
    _, Y = generate_stream(cfg, derive_rng(1, 0))
    assert stats.kstest(Y, "uniform").statistic <= 0.01


@pytest.mark.parametrize("k", [1, 2, 5, 16, 64])
@pytest.mark.parametrize("eps", [0.0, 0.05, 0.25])
def test_piecewise_flat_density_normalized(k, eps):
    rng = np.random.default_rng(k * 100 + int(eps * 100))
    for _ in range(3):
        V = rng.uniform(-1, 1, size=(1, k)).tolist()
        cfg = StreamConfig("piecewise_flat", params={"k": k, "eps": eps, "V": V})
        total = sum(integrate.quad(lambda y: float(flat_density(cfg, y)), j / k, (j + 1) / k)[0] for j in range(k))
        assert abs(total - 1.0) <= 1e-9


def test_piecewise_flat_sampler_matches_density():
    V = [[1, -1, 1, -1]]
    cfg = StreamConfig("piecewise_flat", T=50_000, params={"k": 4, "eps": 0.25, "V": V})
    _, Y = generate_stream(cfg, derive_rng(3, 0))
    freq = np.histogram(Y, bins=4, range=(0, 1))[0] / Y.size
    assert freq == pytest.approx([1.25 / 4, 0.75 / 4, 1.25 / 4, 0.75 / 4], abs=0.01)


def test_scenario_variation():
    assert scenario_variation(StreamConfig("stationary")) == (0.0, 0.0, 0)
    assert scenario_variation(StreamConfig("piecewise_variance"))[2] == 2
    tv, ks, n = scenario_variation(StreamConfig("exp_rate_blocks", params={"blocks": 4}))
    assert n == 3 and ks == pytest.approx(3 * 0.25)
    tv, ks, n = scenario_variation(StreamConfig("linear_bias"))
    assert n == 0 and tv == pytest.approx(9999 * (2 * stats.norm.cdf(0.002) - 1))


def test_replay_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    X, Y, pred = rng.normal(size=(7, 3)), rng.normal(size=7), rng.normal(size=7)
    path = tmp_path / "s.csv"
    write_stream_csv(path, X, Y, pred)
    t, X2, Y2, P2 = read_stream_csv(path)
    assert t.tolist() == list(range(1, 8))
    assert np.array_equal(X, X2) and np.array_equal(Y, Y2) and np.array_equal(pred, P2)
    write_stream_csv(path, np.zeros((3, 0)), Y[:3])
    t, X3, Y3, P3 = read_stream_csv(path)
    assert X3.shape == (3, 0) and P3 is None and np.array_equal(Y3, Y[:3])


def test_replay_file_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_stream_csv(path)


def test_generation_is_reproducible():
    cfg = StreamConfig("smooth_variance", T=300)
    a = generate_stream(cfg, derive_rng(7, 0))
    b = generate_stream(cfg, derive_rng(7, 0))
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
