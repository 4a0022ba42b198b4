from collections import namedtuple

import numpy as np
from scipy import linalg

from utils.errors import ContractError, NotPositiveDefiniteError, ShapeError

Q_FLOOR = 1e-300
LOG_Q_FLOOR = float(np.log(Q_FLOOR))

MonteCarloKL = namedtuple("MonteCarloKL", ["value", "stderr"])


class GridSpec:
    """Uniform tensor mesh: per-dimension bounds and point counts (endpoints included)."""

    def __init__(self, lower, upper, counts):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
        self.counts = np.atleast_1d(np.asarray(counts, dtype=np.int64))
        if not (self.lower.shape == self.upper.shape == self.counts.shape):
            raise ShapeError("grid bounds and counts disagree in dimension")
        if not np.all(self.upper > self.lower):
            raise ContractError("grid needs upper > lower, got {} .. {}".format(self.lower, self.upper))
        if not np.all(self.counts >= 2):
            raise ContractError("grid needs at least 2 points per dimension")

    @property
    def dim(self):
        return self.lower.shape[0]

    def axes(self):
        return [np.linspace(lo, hi, n) for lo, hi, n in zip(self.lower, self.upper, self.counts)]

    def steps(self):
        return (self.upper - self.lower) / (self.counts - 1)

    def cell_volume(self):
        return float(np.prod(self.steps()))

    def points(self):
        """All mesh points, shape (prod(counts), dim); a flat vector for 1-D grids."""
        axes = self.axes()
        if self.dim == 1:
            return axes[0]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def to_dict(self):
        return dict(lower=self.lower.tolist(), upper=self.upper.tolist(), counts=self.counts.tolist())


def _values(f, points):
    return np.asarray(f(points) if callable(f) else f, dtype=np.float64).reshape(-1)


def kl_riemann(p_log, q_log, grid):
    """sum p log(p / q) * cell volume over the mesh.

    ``p_log`` and ``q_log`` are callables over ``grid.points()`` or arrays of
    log-density values on it. Points with p = 0 contribute 0; q is floored at
    1e-300 where p > 0.
    """
    points = grid.points()
    lp = _values(p_log, points)
    lq = np.maximum(_values(q_log, points), LOG_Q_FLOOR)
    if lp.shape != lq.shape:
        raise ShapeError("p and q evaluated on {} and {} points".format(lp.size, lq.size))
    p = np.exp(lp)
    terms = np.where(p > 0, p * (lp - lq), 0.0)
    return float(np.sum(terms) * grid.cell_volume())


def kl_riemann_1d(p_log, q_log, grid):
    if grid.dim != 1:
        raise ContractError("kl_riemann_1d needs a 1-D grid, got {} dimensions".format(grid.dim))
    return kl_riemann(p_log, q_log, grid)


def _cho(cov, which):
    try:
        return linalg.cho_factor(cov, lower=True)
    except linalg.LinAlgError:
        raise NotPositiveDefiniteError("{} covariance is not positive definite".format(which))


def kl_gaussian_closed(mean1, cov1, mean2, cov2):
    """KL(N(mean1, cov1) || N(mean2, cov2))."""
    m1 = np.atleast_1d(np.asarray(mean1, dtype=np.float64))
    m2 = np.atleast_1d(np.asarray(mean2, dtype=np.float64))
    c1 = np.atleast_2d(np.asarray(cov1, dtype=np.float64))
    c2 = np.atleast_2d(np.asarray(cov2, dtype=np.float64))
    k = m1.shape[0]
    if m2.shape != (k,) or c1.shape != (k, k) or c2.shape != (k, k):
        raise ShapeError("Gaussian parameters of inconsistent dimension")
    f1 = _cho(c1, "first")
    f2 = _cho(c2, "second")
    logdet1 = 2.0 * np.sum(np.log(np.diag(f1[0])))
    logdet2 = 2.0 * np.sum(np.log(np.diag(f2[0])))
    diff = m2 - m1
    trace = np.trace(linalg.cho_solve(f2, c1))
    maha = diff @ linalg.cho_solve(f2, diff)
    return float(0.5 * (trace + maha - k + logdet2 - logdet1))


def kl_monte_carlo(p_log, q_log, p_sampler, n, seed):
    """(1/n) sum [log p - log q] over n draws from p, with its standard error.

    ``p_sampler(n, rng)`` returns the draws.
    """
    if int(n) != n or n < 1000:
        raise ContractError("kl_monte_carlo needs n >= 1000, got {}".format(n))
    rng = np.random.default_rng(seed)
    draws = p_sampler(int(n), rng)
    diff = _values(p_log, draws) - np.maximum(_values(q_log, draws), LOG_Q_FLOOR)
    return MonteCarloKL(float(np.mean(diff)), float(np.std(diff, ddof=1) / np.sqrt(diff.size)))
