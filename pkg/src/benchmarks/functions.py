import numpy as np


class BenchmarkFunction:
    """Scalar test function on [0, 1] together with the x where it vanishes."""

    def __init__(self, name, fn, zeros):
        self.name = name
        self.fn = fn
        self.zeros = tuple(zeros)

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=np.float64))

    def distance_to_zero(self, x):
        return float(np.min(np.abs(float(x) - np.asarray(self.zeros))))


def _sin(x):
    return np.sin(2.0 * np.pi * x)


def _quadratic(x):
    return 4.0 * (x - 0.5) ** 2


SIN = BenchmarkFunction("sin", _sin, (0.0, 0.5, 1.0))
QUADRATIC = BenchmarkFunction("quadratic", _quadratic, (0.5,))
