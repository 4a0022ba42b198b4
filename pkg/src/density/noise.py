"""Analytic additive noise laws eps(x) for the benchmark problems.

The scale parameter is the standard deviation for Gaussian families and the
scale b for Laplace. Heteroscedastic noise multiplies a coefficient by
|f_i(x)| per output coordinate.
"""
import numpy as np
from scipy import linalg, stats
from scipy.special import logsumexp

from utils.errors import ConfigError, DegenerateDensityError, NotPositiveDefiniteError, ShapeError

HOMOSCEDASTIC = "homoscedastic"
HETEROSCEDASTIC = "heteroscedastic"
SCALE_MODES = (HOMOSCEDASTIC, HETEROSCEDASTIC)


class NoiseSpec:

    def __init__(self, family, s=1, mode=HOMOSCEDASTIC, scale=0.15, offset=0.1, covariance=None,
                 covariance_seed=None):
        from density import REGISTRY
        if family not in REGISTRY:
            raise ConfigError("noise.family", "unknown noise family {}".format(family))
        if mode not in SCALE_MODES:
            raise ConfigError("noise.mode", "unknown scale mode {}".format(mode))
        if not scale > 0:
            raise ConfigError("noise.scale", "must be positive, got {}".format(scale))
        self.family = family
        self.s = int(s)
        self.mode = mode
        self.scale = float(scale)
        self.offset = float(offset)
        self.covariance_seed = covariance_seed
        self.covariance = None
        self.chol = None
        if family == "correlated_gaussian":
            if mode != HOMOSCEDASTIC:
                raise ConfigError("noise.mode", "correlated_gaussian noise is homoscedastic only")
            if covariance is None:
                if covariance_seed is None:
                    raise ConfigError("noise.covariance_seed", "correlated_gaussian needs a covariance or its seed")
                covariance = make_correlated_covariance(self.s, covariance_seed)
            self.covariance = np.array(covariance, dtype=np.float64)
            if self.covariance.shape != (self.s, self.s):
                raise ShapeError("covariance shape {} for s = {}".format(self.covariance.shape, self.s))
            if not np.allclose(self.covariance, self.covariance.T):
                raise NotPositiveDefiniteError("noise covariance is not symmetric")
            self.chol = cholesky_lower(self.covariance)
        self.impl = REGISTRY[family]

    def scales(self, center):
        """Per-row, per-coordinate scale at the noise center(s) f(x)."""
        center = np.atleast_2d(np.asarray(center, dtype=np.float64))
        if self.mode == HOMOSCEDASTIC:
            return np.full(center.shape, self.scale)
        return self.scale * np.abs(center)

    def to_dict(self):
        out = dict(family=self.family, s=self.s, mode=self.mode, scale=self.scale, offset=self.offset)
        if self.covariance_seed is not None:
            out["covariance_seed"] = self.covariance_seed
        elif self.covariance is not None:
            out["covariance"] = self.covariance.tolist()
        return out

    @classmethod
    def from_dict(cls, values, s=None):
        values = dict(values)
        if s is not None:
            values["s"] = s
        return cls(**{k: values[k] for k in ("family", "s", "mode", "scale", "offset", "covariance",
                                              "covariance_seed") if k in values})

    def __repr__(self):
        return "NoiseSpec({})".format(self.to_dict())


def make_correlated_covariance(s, seed):
    """Sigma = B B^T / s + 0.05 I from a standard normal s x s matrix B."""
    b = np.random.default_rng(seed).standard_normal((s, s))
    return b @ b.T / s + 0.05 * np.eye(s)


def cholesky_lower(cov):
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError("covariance is not positive definite: {}".format(e))


def _rows(spec, x):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != spec.s:
        raise ShapeError("noise of dimension {} evaluated with {} coordinates".format(spec.s, x.shape[1]))
    return x


def _nonzero(scales):
    if np.any(scales <= 0):
        raise DegenerateDensityError("heteroscedastic noise scale is zero at f(x) = 0")
    return scales


class GaussianNoise:
    """Independent Gaussian coordinates with std = scale."""

    @staticmethod
    def logpdf(spec, center, y, scales):
        return stats.norm.logpdf(y, loc=center, scale=scales).sum(axis=1)

    @staticmethod
    def sample(spec, center, scales, rng):
        return center + scales * rng.standard_normal(center.shape)

    @staticmethod
    def covariance(spec, scales):
        return np.diag(scales ** 2)

    @staticmethod
    def halfwidth(spec, scales, tail):
        return stats.norm.isf(tail / 2.0) * scales


class LaplaceNoise:
    """Independent Laplace coordinates with scale b."""

    @staticmethod
    def logpdf(spec, center, y, scales):
        return stats.laplace.logpdf(y, loc=center, scale=scales).sum(axis=1)

    @staticmethod
    def sample(spec, center, scales, rng):
        return center + scales * rng.laplace(0.0, 1.0, size=center.shape)

    @staticmethod
    def covariance(spec, scales):
        return np.diag(2.0 * scales ** 2)

    @staticmethod
    def halfwidth(spec, scales, tail):
        # P(|eps| > t) = exp(-t / b)
        return scales * np.log(1.0 / tail)


class GaussianMixture2Noise:
    """Equal-weight mixture of N(+offset*1, scale^2 I) and N(-offset*1, scale^2 I)."""

    @staticmethod
    def logpdf(spec, center, y, scales):
        comps = [stats.norm.logpdf(y, loc=center + sgn * spec.offset, scale=scales).sum(axis=1)
                 for sgn in (1.0, -1.0)]
        return logsumexp(np.stack(comps), axis=0) - np.log(2.0)

    @staticmethod
    def sample(spec, center, scales, rng):
        eps = scales * rng.standard_normal(center.shape)
        sgn = np.where(rng.random(center.shape[0]) < 0.5, 1.0, -1.0)
        return center + sgn[:, None] * spec.offset + eps

    @staticmethod
    def covariance(spec, scales):
        return np.diag(scales ** 2) + spec.offset ** 2 * np.ones((spec.s, spec.s))

    @staticmethod
    def halfwidth(spec, scales, tail):
        return spec.offset + stats.norm.isf(tail / 2.0) * scales


class CorrelatedGaussianNoise:
    """Multivariate normal N(0, Sigma); draws go through the Cholesky factor."""

    @staticmethod
    def logpdf(spec, center, y, scales):
        diff = y - center
        sol = linalg.solve_triangular(spec.chol, diff.T, lower=True)
        logdet = 2.0 * np.sum(np.log(np.diag(spec.chol)))
        return -0.5 * (np.sum(sol * sol, axis=0) + logdet + spec.s * np.log(2.0 * np.pi))

    @staticmethod
    def sample(spec, center, scales, rng):
        return center + rng.standard_normal(center.shape) @ spec.chol.T

    @staticmethod
    def covariance(spec, scales):
        return spec.covariance.copy()

    @staticmethod
    def halfwidth(spec, scales, tail):
        return stats.norm.isf(tail / 2.0) * np.sqrt(np.diag(spec.covariance)) * np.ones_like(scales)


def noise_logpdf(spec, f_value, y):
    """log density of y under f_value + eps. Scalar for one pair, else one value per row."""
    single = np.ndim(f_value) <= 1 and np.ndim(y) <= 1
    center, y = _rows(spec, f_value), _rows(spec, y)
    center, y = np.broadcast_arrays(center, y)
    scales = spec.scales(center)
    if spec.mode == HETEROSCEDASTIC:
        _nonzero(scales)
    out = spec.impl.logpdf(spec, center, y, scales)
    return float(out[0]) if single else out


def noise_sample_rows(spec, centers, rng):
    """One draw per center row. Rows with zero heteroscedastic scale return f(x) exactly."""
    centers = _rows(spec, centers)
    scales = spec.scales(centers)
    out = spec.impl.sample(spec, centers, scales, rng)
    if spec.mode == HETEROSCEDASTIC:
        degenerate = np.any(scales <= 0, axis=1)
        out[degenerate] = centers[degenerate]
    return out


def noise_sample(spec, f_value, seed, n=None):
    """Draw(s) of f_value + eps, deterministic in seed."""
    center = _rows(spec, f_value)
    if spec.mode == HETEROSCEDASTIC:
        _nonzero(spec.scales(center))
    rng = np.random.default_rng(seed)
    if n is None:
        return spec.impl.sample(spec, center, spec.scales(center), rng)[0]
    centers = np.repeat(center, int(n), axis=0)
    return spec.impl.sample(spec, centers, spec.scales(centers), rng)


def noise_mean(spec, f_value):
    return np.asarray(f_value, dtype=np.float64).copy()


def noise_covariance(spec, f_value):
    scales = spec.scales(_rows(spec, f_value))[0]
    return spec.impl.covariance(spec, scales)


def noise_halfwidth(spec, f_value, tail=1e-5):
    """Per-coordinate half-width around f(x) holding all but ``tail`` of the mass."""
    scales = spec.scales(_rows(spec, f_value))[0]
    return spec.impl.halfwidth(spec, scales, tail)


def noise_from_config(noise_config, s):
    return NoiseSpec.from_dict(noise_config, s=s)
