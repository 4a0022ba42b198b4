import json

import numpy as np
import pandas as pd
import pytest
from scipy.signal import find_peaks

from benchmarks import (REGISTRY, BenchmarkReport, ExactForwardSampler, ExactInverseSampler, Problem1D, ProblemHD,
                        confidence_bands, eval_forward_1d, eval_hd, eval_inverse_1d, forward_histograms, generate,
                        hd_test_points, loss_history_frame, problem_from_config, regenerate, true_conditional_1d,
                        true_inverse_1d)
from benchmarks.evaluation import DEFAULT_X_POINTS, forward_y_grid
from density import GridSpec, NoiseSpec
from learners import LossRecord
from utils.errors import ContractError, CorruptFileError, DegenerateDensityError


def sin_problem(family="gaussian", mode="homoscedastic", scale=0.15):
    return Problem1D("sin", NoiseSpec(family, mode=mode, scale=scale))


def test_functions_and_their_zeros():
    assert REGISTRY["sin"](np.array([0.25]))[0] == pytest.approx(1.0)
    assert REGISTRY["quadratic"](np.array([0.0]))[0] == pytest.approx(1.0)
    for fn in REGISTRY.values():
        for z in fn.zeros:
            assert fn(np.array([z]))[0] == pytest.approx(0.0, abs=1e-12)
    assert REGISTRY["sin"].distance_to_zero(0.4999) == pytest.approx(1e-4)


def test_default_test_points():
    assert len(DEFAULT_X_POINTS) == 59
    assert DEFAULT_X_POINTS[0] == -0.95 and DEFAULT_X_POINTS[-1] == 1.95
    assert 0.05 in DEFAULT_X_POINTS and 0.5 in DEFAULT_X_POINTS


def test_generation_is_reproducible_from_provenance():
    problem = sin_problem()
    a = generate(problem, 100, 7)
    b = generate(problem, 100, 7)
    np.testing.assert_array_equal(a.cond, b.cond)
    np.testing.assert_array_equal(a.target, b.target)
    assert not np.array_equal(a.target, generate(problem, 100, 8).target)
    again = regenerate(a.provenance)
    np.testing.assert_array_equal(again.target, a.target)
    assert a.provenance["version"] == 1 and a.provenance["generator"] == "gen_1d"
    assert np.all((a.cond >= 0.0) & (a.cond <= 1.0))


def test_noise_free_generation_returns_f():
    data = generate(Problem1D("quadratic"), 50, 0)
    np.testing.assert_array_equal(data.target, 4.0 * (data.cond - 0.5) ** 2)


def test_hd_problem_is_linear():
    problem = problem_from_config(dict(kind="hd", d=20, s=5, matrix_seed=0,
                                       noise=dict(family="gaussian", mode="homoscedastic", scale=0.1)))
    assert isinstance(problem, ProblemHD)
    assert problem.A.shape == (5, 20) and np.all((problem.A >= 0) & (problem.A <= 1))
    data = generate(problem, 300, 1)
    assert data.d == 20 and data.s == 5
    resid = data.target - data.cond @ problem.A.T
    assert resid.std() == pytest.approx(0.1, rel=0.05)
    assert regenerate(data.provenance).target.tobytes() == data.target.tobytes()


def test_regenerate_rejects_other_versions():
    data = generate(sin_problem(), 10, 0)
    provenance = dict(data.provenance, version=99)
    with pytest.raises(CorruptFileError):
        regenerate(provenance)


def test_true_conditional_is_the_noise_law():
    problem = sin_problem("laplace", scale=0.1)
    grid = forward_y_grid(problem, 0.3, 2000, 1e-5)
    fx = np.sin(2 * np.pi * 0.3)
    assert grid.lower[0] == pytest.approx(fx - 0.1 * np.log(1e5))
    mass = np.sum(np.exp(true_conditional_1d(problem, 0.3, grid))) * grid.cell_volume()
    assert mass == pytest.approx(1.0, abs=2e-3)


def test_inverse_oracle_is_normalized_and_bimodal():
    problem = sin_problem()
    grid = GridSpec(0.0, 1.0, 2000)
    log_p = true_inverse_1d(problem, 0.5, grid)
    p = np.exp(log_p)
    assert np.sum(p) * grid.cell_volume() == pytest.approx(1.0, abs=1e-12)
    peaks, _ = find_peaks(p, prominence=0.1 * p.max())
    modes = np.sort(grid.points()[peaks])
    np.testing.assert_allclose(modes, [1 / 12, 5 / 12], atol=0.02)


def test_inverse_oracle_edge_cases():
    with pytest.raises(DegenerateDensityError):
        true_inverse_1d(sin_problem(), 10.0, GridSpec(0.0, 1.0, 200))
    with pytest.raises(ContractError):
        true_inverse_1d(sin_problem(), 0.0, GridSpec(-0.5, 1.0, 200))
    hetero = sin_problem(mode="heteroscedastic", scale=0.2)
    log_p = true_inverse_1d(hetero, 0.3, GridSpec(0.0, 1.0, 201))
    # f(0) is exactly zero, f(0.5) only to rounding
    assert log_p[0] == -np.inf and log_p[100] < -1e6
    assert np.all(np.isfinite(log_p[1:100]))


def test_exact_forward_sampler_scores_near_zero_kl():
    problem = sin_problem()
    report = eval_forward_1d(ExactForwardSampler(problem), problem, [0.1, 0.35, 0.8], n_samples=20000, seed=0)
    assert report.kind == "forward_1d"
    assert report.test_points == [0.1, 0.35, 0.8]
    assert all(-1e-4 < kl < 0.01 for kl in report.per_point["kl"])
    assert report.aggregates["kl"] == pytest.approx(np.mean(report.per_point["kl"]))


def test_points_near_heteroscedastic_zeros_are_excluded():
    problem = sin_problem(mode="heteroscedastic", scale=0.2)
    report = eval_forward_1d(ExactForwardSampler(problem), problem, [0.2, 0.5, 0.5005, 0.9], n_samples=5000)
    assert report.test_points == [0.2, 0.9]
    assert report.extras["excluded_points"] == [0.5, 0.5005]


def test_exact_inverse_sampler_scores_near_zero_kl():
    problem = sin_problem()
    # modes are ~0.03 wide, far narrower than the Scott bandwidth of the two-mode cloud
    report, hist = eval_inverse_1d(ExactInverseSampler(problem), problem, y_points=[-0.5, 0.5], n_samples=20000,
                                   bandwidth=0.005, bins=30)
    assert report.kind == "inverse_1d" and report.test_points == [-0.5, 0.5]
    assert all(kl < 0.02 for kl in report.per_point["kl"])
    assert list(hist.columns) == ["point", "bin_left", "bin_right", "model_density", "true_density"]
    assert len(hist) == 60


def test_inverse_evaluation_needs_an_inverse_model():
    from conftest import random_model
    with pytest.raises(ContractError):
        eval_inverse_1d(random_model(0), sin_problem(), n_samples=10)


def test_forward_histograms_pair_model_and_truth():
    problem = sin_problem()
    hist = forward_histograms(ExactForwardSampler(problem), problem, n_samples=20000, bins=40)
    assert sorted(hist["point"].unique()) == [-0.8, 0.2, 0.8, 1.8]
    one = hist[hist["point"] == 0.2]
    width = (one["bin_right"] - one["bin_left"]).to_numpy()
    assert np.sum(one["model_density"] * width) == pytest.approx(1.0)
    assert np.sum(one["true_density"] * width) == pytest.approx(1.0, abs=0.05)


def test_hd_metrics_with_the_exact_sampler():
    problem = ProblemHD(6, 3, NoiseSpec("gaussian", s=3, scale=0.1))
    report = eval_hd(ExactForwardSampler(problem), problem, n_test=10, n_samples=20000, seed=0)
    assert report.estimator == "gaussian_closed_form_moment_matched"
    assert list(report.per_point) == ["err_mean", "err_std", "avg_kl"]
    assert report.aggregates["err_mean"] < 5e-3
    assert report.aggregates["err_std"] < 5e-3
    assert report.aggregates["avg_kl"] < 1e-3
    np.testing.assert_array_equal(np.asarray(report.test_points), hd_test_points(problem, 10, 0))


def test_hd_mixture_and_correlated_estimators():
    mixture = ProblemHD(4, 2, NoiseSpec("gaussian_mixture2", s=2, scale=0.1, offset=0.1))
    report = eval_hd(ExactForwardSampler(mixture), mixture, n_test=3, n_samples=5000, kl_samples=5000)
    assert report.estimator == "monte_carlo_vs_surrogate_density"
    assert abs(report.aggregates["avg_kl"]) < 1e-9
    assert len(report.extras["avg_kl_stderr"]) == 3
    correlated = ProblemHD(4, 3, NoiseSpec("correlated_gaussian", s=3, covariance_seed=0))
    report = eval_hd(ExactForwardSampler(correlated), correlated, n_test=3, n_samples=20000)
    assert "err_cov" in report.per_point
    assert report.aggregates["err_cov"] < 0.05


def test_mean_error_decays_like_inverse_square_root():
    problem = ProblemHD(20, 5, NoiseSpec("gaussian", s=5, scale=0.1))
    sampler = ExactForwardSampler(problem)
    errs = [eval_hd(sampler, problem, n_test=20, n_samples=n, seed=1).aggregates["err_mean"]
            for n in (1000, 10000, 100000)]
    for small, large in zip(errs[:-1], errs[1:]):
        assert 0.5 * np.sqrt(10) <= small / large <= 2 * np.sqrt(10)


def test_report_round_trip_and_tamper_detection(tmp_path):
    history = [LossRecord(0, 1.5, 0.5, 2.0, 0), LossRecord(1, 1.0, 0.25, 1.25, 1)]
    report = BenchmarkReport("forward_1d", [0.1, 0.2], {"kl": [0.01, 0.03]}, estimator="riemann_1d_vs_kde",
                             loss_history=[r._asdict() for r in history], timings={"eval": 1.5},
                             config={"seed": 1}, seeds={"eval_seed": 0})
    path = str(tmp_path / "report.json")
    report.save(path)
    back = BenchmarkReport.load(path)
    assert back.aggregates["kl"] == pytest.approx(0.02)
    assert back.loss_history[1]["singular_skipped"] == 1
    assert list(back.per_point_frame().columns) == ["point", "kl"]

    with open(path) as f:
        values = json.load(f)
    values["aggregates"]["kl"] = 0.5
    with open(path, "w") as f:
        json.dump(values, f)
    with pytest.raises(CorruptFileError):
        BenchmarkReport.load(path)


def test_loss_history_frame_and_confidence_bands():
    frame = loss_history_frame([LossRecord(0, 1.0, 0.5, 1.5, 0), LossRecord(1, 0.8, 0.4, 1.2, 0)])
    assert list(frame.columns) == ["epoch", "l1", "l2", "total", "singular_skipped"]
    bands = confidence_bands({"a": [1.0, 2.0], "b": [3.0, 4.0], "c": [2.0, 3.0]})
    assert list(bands.columns) == ["epoch", "min", "max", "mean", "lower", "upper", "cells"]
    row = bands.iloc[0]
    assert row["min"] == 1.0 and row["max"] == 3.0 and row["mean"] == 2.0
    assert row["upper"] - row["mean"] == pytest.approx(1.96 * 1.0 / np.sqrt(3))
    uneven = confidence_bands({"a": pd.Series([1.0, 2.0], index=[0, 2]), "b": pd.Series([3.0], index=[0])})
    assert uneven["cells"].tolist() == [2, 1]


def test_inverse_oracle_at_zero_peaks_where_sin_vanishes():
    grid = GridSpec(0.0, 1.0, 2001)
    p = np.exp(true_inverse_1d(Problem1D("sin", NoiseSpec("gaussian", scale=0.05)), 0.0, grid))
    xs = grid.points()
    for zero in (0.0, 0.5, 1.0):
        near = np.abs(xs - zero) < 0.1
        assert abs(xs[near][np.argmax(p[near])] - zero) < 1e-3
