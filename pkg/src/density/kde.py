import numpy as np
from scipy.special import logsumexp

from utils.errors import ContractError, DegenerateDensityError, ShapeError

LOG_DENSITY_FLOOR = -745.0
BANDWIDTH_RULES = ("scott",)

_LOG_2PI = np.log(2.0 * np.pi)


class KdeModel:
    """Gaussian product-kernel density estimate with one bandwidth per coordinate."""

    def __init__(self, samples, bandwidths):
        self.samples = np.array(samples, dtype=np.float64)
        if self.samples.ndim == 1:
            self.samples = self.samples[:, None]
        self.bandwidths = np.atleast_1d(np.array(bandwidths, dtype=np.float64))
        if self.samples.shape[0] < 2:
            raise ContractError("a KDE needs at least 2 samples")
        if self.bandwidths.shape != (self.dim,):
            raise ShapeError("{} bandwidths for {}-dimensional samples".format(self.bandwidths.size, self.dim))
        if not np.all(self.bandwidths > 0):
            raise DegenerateDensityError("KDE bandwidths must be positive, got {}".format(self.bandwidths))

    @property
    def n(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]


def scott_bandwidth(samples):
    """h_i = sigma_i * n^(-1/(dim + 4)), sigma_i the sample std (ddof 1)."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64).T).T
    n, dim = samples.shape
    if n < 2:
        raise ContractError("a KDE needs at least 2 samples")
    sigma = samples.std(axis=0, ddof=1)
    if not np.all(sigma > 0):
        raise DegenerateDensityError("zero sample variance in coordinate(s) {}".format(np.flatnonzero(~(sigma > 0))))
    return sigma * n ** (-1.0 / (dim + 4))


def kde_fit(samples, bandwidth="scott"):
    """Fit a KDE. ``bandwidth`` is a rule name or fixed per-coordinate values."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    if isinstance(bandwidth, str):
        if bandwidth not in BANDWIDTH_RULES:
            raise ContractError("unknown bandwidth rule {}".format(bandwidth))
        h = scott_bandwidth(samples)
    else:
        h = np.broadcast_to(np.asarray(bandwidth, dtype=np.float64), (samples.shape[1],))
    return KdeModel(samples, h)


def kde_logpdf(kde, points, chunk=512):
    """log of the average kernel density at each point, floored at -745."""
    points = np.asarray(points, dtype=np.float64)
    single = points.ndim <= 1 and (kde.dim > 1 or points.ndim == 0)
    points = points.reshape(-1, kde.dim)
    h = kde.bandwidths
    v = kde.samples / h
    v_sq = np.sum(v * v, axis=1)
    log_norm = -np.sum(np.log(h)) - 0.5 * kde.dim * _LOG_2PI - np.log(kde.n)

    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        u = points[start:start + chunk] / h
        sq = np.sum(u * u, axis=1)[:, None] + v_sq[None, :] - 2.0 * (u @ v.T)
        np.maximum(sq, 0.0, out=sq)
        out[start:start + chunk] = logsumexp(-0.5 * sq, axis=1) + log_norm
    out = np.maximum(out, LOG_DENSITY_FLOOR)
    return float(out[0]) if single else out
