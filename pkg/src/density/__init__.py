from .noise import CorrelatedGaussianNoise, GaussianMixture2Noise, GaussianNoise, LaplaceNoise

REGISTRY = {}

REGISTRY["gaussian"] = GaussianNoise
REGISTRY["laplace"] = LaplaceNoise
REGISTRY["gaussian_mixture2"] = GaussianMixture2Noise
REGISTRY["correlated_gaussian"] = CorrelatedGaussianNoise

from .noise import (NoiseSpec, make_correlated_covariance, noise_covariance, noise_from_config,  # noqa: E402
                    noise_halfwidth, noise_logpdf, noise_mean, noise_sample, noise_sample_rows)
from .kde import KdeModel, kde_fit, kde_logpdf, scott_bandwidth  # noqa: E402
from .kl import GridSpec, MonteCarloKL, kl_gaussian_closed, kl_monte_carlo, kl_riemann, kl_riemann_1d  # noqa: E402
