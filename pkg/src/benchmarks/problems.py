from collections import OrderedDict

import numpy as np

from density.noise import HETEROSCEDASTIC, NoiseSpec
from utils.errors import ConfigError, ShapeError

PROBLEM_KINDS = ("1d", "hd")


class Problem1D:
    """y = f(x) + eps(x), x uniform on [0, 1]. ``noise`` None means no noise."""

    kind = "1d"
    d = 1
    s = 1

    def __init__(self, function, noise=None):
        from benchmarks import REGISTRY
        if function not in REGISTRY:
            raise ConfigError("problem.function", "unknown function {}".format(function))
        if noise is not None and noise.s != 1:
            raise ShapeError("1-D problems need 1-D noise, got s = {}".format(noise.s))
        self.function = function
        self.fn = REGISTRY[function]
        self.noise = noise

    def f(self, x):
        x = np.asarray(x, dtype=np.float64)
        return self.fn(x.reshape(-1, 1) if x.ndim <= 1 else x)

    @property
    def heteroscedastic(self):
        return self.noise is not None and self.noise.mode == HETEROSCEDASTIC

    def near_zero(self, x, tol):
        return self.fn.distance_to_zero(x) < tol

    def to_dict(self):
        return OrderedDict(kind=self.kind, function=self.function,
                           noise=None if self.noise is None else self.noise.to_dict())


class ProblemHD:
    """y = A x + eps with A (s x d) uniform on [0, 1] drawn from ``matrix_seed``."""

    kind = "hd"

    def __init__(self, d, s, noise=None, matrix_seed=0):
        self.d = int(d)
        self.s = int(s)
        if self.d < 1 or self.s < 1:
            raise ConfigError("problem.d", "dimensions must be positive, got d = {}, s = {}".format(d, s))
        if noise is not None and noise.s != self.s:
            raise ShapeError("noise dimension {} for s = {}".format(noise.s, self.s))
        self.noise = noise
        self.matrix_seed = matrix_seed
        self.A = np.random.default_rng(matrix_seed).uniform(0.0, 1.0, size=(self.s, self.d))
        self.A.setflags(write=False)

    def f(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return x @ self.A.T

    @property
    def heteroscedastic(self):
        return self.noise is not None and self.noise.mode == HETEROSCEDASTIC

    def to_dict(self):
        return OrderedDict(kind=self.kind, d=self.d, s=self.s, matrix_seed=self.matrix_seed,
                           noise=None if self.noise is None else self.noise.to_dict())


def problem_from_config(problem):
    """Build a problem from the ``problem`` config section (or a ``to_dict`` echo)."""
    kind = problem.get("kind", "1d")
    noise = problem.get("noise")
    if kind == "1d":
        return Problem1D(problem.get("function", "sin"), None if noise is None else NoiseSpec.from_dict(noise, s=1))
    if kind == "hd":
        s = int(problem.get("s", 5))
        return ProblemHD(problem.get("d", 20), s, None if noise is None else NoiseSpec.from_dict(noise, s=s),
                         problem.get("matrix_seed", 0))
    raise ConfigError("problem.kind", "unknown problem kind {}".format(kind))
