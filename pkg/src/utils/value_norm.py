import numpy as np

from autodiff.tape import Node
from utils.errors import ShapeError


class NormalizationStats:
    """Per-coordinate z-score statistics for the conditioning and target blocks.

    Statistics come from the training set. A coordinate with zero spread
    (e.g. a constant condition) gets std 1 so every std stays positive.
    """

    def __init__(self, cond_mean, cond_std, target_mean, target_std):
        self.cond_mean = np.array(cond_mean, dtype=np.float64).reshape(-1)
        self.cond_std = np.array(cond_std, dtype=np.float64).reshape(-1)
        self.target_mean = np.array(target_mean, dtype=np.float64).reshape(-1)
        self.target_std = np.array(target_std, dtype=np.float64).reshape(-1)
        if self.cond_mean.shape != self.cond_std.shape or self.target_mean.shape != self.target_std.shape:
            raise ShapeError("mean and std shapes differ")
        if not (np.all(self.cond_std > 0) and np.all(self.target_std > 0)):
            raise ShapeError("normalization standard deviations must be positive")
        for a in (self.cond_mean, self.cond_std, self.target_mean, self.target_std):
            a.setflags(write=False)

    @classmethod
    def from_data(cls, cond, target):
        cond = np.asarray(cond, dtype=np.float64)
        target = np.asarray(target, dtype=np.float64)
        return cls(cond.mean(axis=0), _positive(cond.std(axis=0)),
                   target.mean(axis=0), _positive(target.std(axis=0)))

    @classmethod
    def identity(cls, d, s):
        return cls(np.zeros(d), np.ones(d), np.zeros(s), np.ones(s))

    @property
    def d(self):
        return self.cond_mean.shape[0]

    @property
    def s(self):
        return self.target_mean.shape[0]

    def normalize_cond(self, cond):
        return (np.asarray(cond, dtype=np.float64) - self.cond_mean) / self.cond_std

    def normalize_target(self, target):
        return (np.asarray(target, dtype=np.float64) - self.target_mean) / self.target_std

    def denormalize_target(self, target):
        """Normalized targets back to raw units. Tape nodes stay on their tape."""
        if not isinstance(target, Node):
            target = np.asarray(target, dtype=np.float64)
        return target * self.target_std + self.target_mean

    def target_log_scale(self):
        """sum_i log sigma_i over target coordinates: log|det| of the denormalization map."""
        return float(np.sum(np.log(self.target_std)))


def _positive(std):
    std = np.array(std, dtype=np.float64)
    std[~(std > 0)] = 1.0
    return std
