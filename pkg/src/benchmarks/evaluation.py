"""Metric pipelines: KL curves for the 1-D problems and averaged metrics in high dimension.

Every pipeline only needs ``sample(cond, n, seed)`` from the model, so the
exact samplers in ``benchmarks.oracles`` can stand in for a trained flow.
Per-test-point work draws from its own child seed ``[seed, ..., i]``.
"""
import logging
from collections import OrderedDict

import numpy as np
import pandas as pd

from benchmarks.oracles import true_conditional_1d, true_inverse_1d
from benchmarks.report import BenchmarkReport
from density.kde import kde_fit, kde_logpdf
from density.kl import Q_FLOOR, GridSpec, kl_gaussian_closed, kl_monte_carlo, kl_riemann_1d
from density.noise import noise_covariance, noise_halfwidth, noise_logpdf, noise_sample_rows
from modules.flow import INVERSE
from utils.errors import ContractError

log = logging.getLogger(__name__)

DEFAULT_X_POINTS = tuple(np.round(np.linspace(-0.95, 1.95, 59), 12))
HIST_X_POINTS = (-0.8, 0.2, 0.8, 1.8)
INVERSE_Y_POINTS = (-0.5, 0.0, 0.5)
GAUSSIAN_FAMILIES = ("gaussian", "correlated_gaussian")


def forward_y_grid(problem, x, n_grid=2000, tail=1e-5):
    """f(x) +- the noise half-width holding all but ``tail`` of the mass."""
    fx = problem.f(float(x))[0]
    hw = noise_halfwidth(problem.noise, fx, tail)
    return GridSpec(fx - hw, fx + hw, [n_grid])


def _draw_1d(model, cond, n_samples, seed):
    return np.asarray(model.sample([float(cond)], n_samples, seed), dtype=np.float64).reshape(-1)


def eval_forward_1d(model, problem, x_points=None, n_samples=20000, seed=0, n_grid=2000, tail=1e-5,
                    zero_exclusion=1e-3, bandwidth="scott"):
    """KL(true p(y|x) || KDE of model samples) at every test x."""
    if problem.noise is None:
        raise ContractError("KL evaluation needs a noisy problem")
    x_points = DEFAULT_X_POINTS if x_points is None else x_points
    kept, kls, excluded, bandwidths = [], [], [], []
    for i, x in enumerate(x_points):
        x = float(x)
        if problem.heteroscedastic and problem.near_zero(x, zero_exclusion):
            log.warning("excluding x = %g: heteroscedastic noise vanishes within %g", x, zero_exclusion)
            excluded.append(x)
            continue
        samples = _draw_1d(model, x, n_samples, [seed, i])
        kde = kde_fit(samples, bandwidth)
        grid = forward_y_grid(problem, x, n_grid, tail)
        kl = kl_riemann_1d(true_conditional_1d(problem, x, grid), kde_logpdf(kde, grid.points()), grid)
        kept.append(x)
        kls.append(kl)
        bandwidths.append(float(kde.bandwidths[0]))

    extras = OrderedDict(excluded_points=excluded, zero_exclusion=zero_exclusion, n_grid=n_grid,
                         tail_mass=tail, q_floor=Q_FLOOR, kde_bandwidths=bandwidths, n_samples=n_samples)
    return BenchmarkReport("forward_1d", kept, OrderedDict(kl=kls), estimator="riemann_1d_vs_kde",
                           seeds=dict(eval_seed=seed), extras=extras)


def eval_inverse_1d(model, problem, y_points=INVERSE_Y_POINTS, n_samples=20000, x_grid=None, seed=0,
                    bandwidth="scott", bins=60):
    """KL(grid oracle p(x|y) || KDE of model samples) per test y, plus histograms."""
    if getattr(model, "direction", INVERSE) != INVERSE:
        raise ContractError("inverse evaluation needs a model trained in the inverse direction")
    x_grid = GridSpec(0.0, 1.0, 2000) if x_grid is None else x_grid
    xs = x_grid.points()
    kls, bandwidths, hists = [], [], []
    for i, y in enumerate(y_points):
        y = float(y)
        samples = _draw_1d(model, y, n_samples, [seed, i])
        kde = kde_fit(samples, bandwidth)
        true_log = true_inverse_1d(problem, y, x_grid)
        kls.append(kl_riemann_1d(true_log, kde_logpdf(kde, xs), x_grid))
        bandwidths.append(float(kde.bandwidths[0]))
        hists.append(_histogram(y, samples, bins, lambda c: np.interp(c, xs, np.exp(true_log), left=0.0, right=0.0)))

    extras = OrderedDict(x_grid=x_grid.to_dict(), q_floor=Q_FLOOR, kde_bandwidths=bandwidths, n_samples=n_samples)
    report = BenchmarkReport("inverse_1d", list(y_points), OrderedDict(kl=kls), estimator="riemann_1d_vs_kde",
                             seeds=dict(eval_seed=seed), extras=extras)
    return report, pd.concat(hists, ignore_index=True)


def _histogram(point, samples, bins, true_density):
    density, edges = np.histogram(samples, bins=bins, density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    return pd.DataFrame(OrderedDict(point=point, bin_left=edges[:-1], bin_right=edges[1:],
                                    model_density=density, true_density=true_density(centers)))


def forward_histograms(model, problem, x_points=HIST_X_POINTS, n_samples=20000, seed=0, bins=60,
                       zero_exclusion=1e-3):
    """Histogram of model samples next to the true p(y|x) at each x."""
    frames = []
    for i, x in enumerate(x_points):
        x = float(x)
        samples = _draw_1d(model, x, n_samples, [seed, 100 + i])
        fx = problem.f(x)[0]
        if problem.heteroscedastic and problem.near_zero(x, zero_exclusion):
            def true_density(c):
                return np.full(c.shape, np.nan)
        else:
            def true_density(c, fx=fx):
                return np.exp(noise_logpdf(problem.noise, np.repeat(fx[None, :], c.size, axis=0), c[:, None]))
        frames.append(_histogram(x, samples, bins, true_density))
    return pd.concat(frames, ignore_index=True)


def _hd_kl(model, problem, x, samples, kl_samples, seed):
    fx = problem.f(x)[0]
    if problem.noise.family in GAUSSIAN_FAMILIES:
        cov_hat = np.atleast_2d(np.cov(samples, rowvar=False))
        return kl_gaussian_closed(fx, noise_covariance(problem.noise, fx), samples.mean(axis=0), cov_hat), None

    def p_sampler(n, rng):
        return noise_sample_rows(problem.noise, np.repeat(fx[None, :], n, axis=0), rng)
    mc = kl_monte_carlo(lambda w: noise_logpdf(problem.noise, np.repeat(fx[None, :], w.shape[0], axis=0), w),
                        lambda w: model.log_density(x, w), p_sampler, kl_samples, seed)
    return mc.value, mc.stderr


def hd_test_points(problem, n_test, seed):
    return np.random.default_rng([seed, 0]).uniform(0.0, 1.0, size=(int(n_test), problem.d))


def eval_hd(model, problem, n_test=100, n_samples=20000, seed=0, kl_samples=20000):
    """Err_mean, Err_std (and Err_cov for correlated noise) and Avg_KL over random test points."""
    if problem.noise is None:
        raise ContractError("metric evaluation needs a noisy problem")
    if int(n_test) != n_test or n_test < 1:
        raise ContractError("n_test must be >= 1, got {}".format(n_test))
    s = problem.s
    correlated = problem.noise.family == "correlated_gaussian"
    xs = hd_test_points(problem, n_test, seed)
    per_point = OrderedDict(err_mean=[], err_std=[])
    if correlated:
        per_point["err_cov"] = []
    per_point["avg_kl"] = []
    stderrs = []
    for t, x in enumerate(xs):
        samples = np.asarray(model.sample(x, n_samples, [seed, 1, t]), dtype=np.float64)
        fx = problem.f(x)[0]
        cov = noise_covariance(problem.noise, fx)
        mean_hat = samples.mean(axis=0)
        per_point["err_mean"].append(np.linalg.norm(fx - mean_hat) / np.linalg.norm(fx))
        per_point["err_std"].append(np.linalg.norm(np.sqrt(np.diag(cov)) - samples.std(axis=0, ddof=1)) / np.sqrt(s))
        if correlated:
            cov_hat = np.atleast_2d(np.cov(samples, rowvar=False))
            per_point["err_cov"].append(np.linalg.norm(cov - cov_hat, ord="fro") / s)
        kl, stderr = _hd_kl(model, problem, x, samples, kl_samples, [seed, 2, t])
        per_point["avg_kl"].append(kl)
        if stderr is not None:
            stderrs.append(stderr)

    if problem.noise.family in GAUSSIAN_FAMILIES:
        estimator = "gaussian_closed_form_moment_matched"
    else:
        estimator = "monte_carlo_vs_surrogate_density"
    extras = OrderedDict(n_samples=n_samples, n_test=n_test, kl_samples=kl_samples, q_floor=Q_FLOOR)
    if stderrs:
        extras["avg_kl_stderr"] = stderrs
    return BenchmarkReport("hd", xs, per_point, estimator=estimator, seeds=dict(eval_seed=seed), extras=extras)
