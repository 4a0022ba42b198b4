"""Ground-truth conditional densities and exact samplers for the benchmark problems."""
import numpy as np
from scipy.special import logsumexp

from density.kl import GridSpec
from density.noise import noise_logpdf, noise_sample
from utils.errors import ContractError, DegenerateDensityError

NORMALIZER_FLOOR = 1e-300


def _grid_1d(grid):
    if grid.dim != 1:
        raise ContractError("expected a 1-D grid, got {} dimensions".format(grid.dim))
    return grid.points()


def true_conditional_1d(problem, x, grid):
    """log p(y | x) over the y-grid: the noise law centered at f(x)."""
    y = _grid_1d(grid)
    fx = problem.f(float(x))[0]
    return noise_logpdf(problem.noise, np.repeat(fx[None, :], y.size, axis=0), y[:, None])


def _likelihood_over_x(problem, y, xs):
    fx = problem.f(xs)
    if problem.heteroscedastic:
        # the noise law collapses to a point mass where f(x) = 0
        out = np.full(xs.size, -np.inf)
        ok = np.abs(fx[:, 0]) > 0
        if np.any(ok):
            out[ok] = noise_logpdf(problem.noise, fx[ok], np.full((int(ok.sum()), 1), float(y)))
        return out
    return noise_logpdf(problem.noise, fx, np.full((xs.size, 1), float(y)))


def true_inverse_1d(problem, y, grid):
    """Normalized log p(x | y) on an x-grid inside [0, 1], uniform prior on x."""
    xs = _grid_1d(grid)
    if grid.lower[0] < 0.0 or grid.upper[0] > 1.0:
        raise ContractError("inverse oracle grid must lie in [0, 1], got [{}, {}]".format(
            grid.lower[0], grid.upper[0]))
    lp = _likelihood_over_x(problem, y, xs)
    log_z = logsumexp(lp) + np.log(grid.cell_volume())
    if not log_z >= np.log(NORMALIZER_FLOOR):
        raise DegenerateDensityError("p(x | y = {}) normalizer below {}: y is out of reach".format(y, NORMALIZER_FLOOR))
    return lp - log_z


class ExactForwardSampler:
    """Draws from the true p(y | x); drop-in for a trained model in evaluations."""

    def __init__(self, problem):
        self.problem = problem

    def sample(self, cond, n, seed):
        if int(n) != n or n < 1:
            raise ContractError("sample count must be >= 1, got {}".format(n))
        fx = self.problem.f(np.asarray(cond, dtype=np.float64).reshape(1, -1))
        if self.problem.noise is None:
            return np.repeat(fx, int(n), axis=0)
        return noise_sample(self.problem.noise, fx[0], seed, n=int(n))

    def log_density(self, cond, target):
        fx = self.problem.f(np.asarray(cond, dtype=np.float64).reshape(1, -1))[0]
        target = np.asarray(target, dtype=np.float64)
        if target.ndim == 1:
            return noise_logpdf(self.problem.noise, fx, target)
        return noise_logpdf(self.problem.noise, np.repeat(fx[None, :], target.shape[0], axis=0), target)


class ExactInverseSampler:
    """Draws from p(x | y) by inverting the grid oracle's cumulative distribution."""

    def __init__(self, problem, grid=None):
        self.problem = problem
        self.grid = GridSpec(0.0, 1.0, 4001) if grid is None else grid

    def sample(self, cond, n, seed):
        if int(n) != n or n < 1:
            raise ContractError("sample count must be >= 1, got {}".format(n))
        y = float(np.ravel(cond)[0])
        xs = self.grid.points()
        p = np.exp(true_inverse_1d(self.problem, y, self.grid))
        # trapezoid cumulative mass, renormalized to end at 1
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(xs))])
        cdf /= cdf[-1]
        u = np.random.default_rng(seed).random(int(n))
        return np.interp(u, cdf, xs)[:, None]
