from collections import OrderedDict

import numpy as np

from autodiff.tape import GradientBundle
from utils.errors import ContractError


def finite_difference_gradient(f, params, step=1e-5):
    """Central-difference gradient of the scalar ``f(params)``.

    ``params`` maps names to arrays; each entry is perturbed by +-step while
    the others stay fixed. Used as a test oracle only.
    """
    if not step > 0:
        raise ContractError("finite difference step must be positive, got {}".format(step))
    base = OrderedDict((k, np.array(v, dtype=np.float64)) for k, v in params.items())
    grads = OrderedDict()
    for name, value in base.items():
        g = np.zeros_like(value)
        flat = value.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            f_plus = float(f(base))
            flat[i] = orig - step
            f_minus = float(f(base))
            flat[i] = orig
            gflat[i] = (f_plus - f_minus) / (2.0 * step)
        grads[name] = g
    return GradientBundle(grads)


def relative_error(a, b):
    """||a - b|| / max(||a||, ||b||) over all entries (0 when both vanish)."""
    if isinstance(a, GradientBundle) or isinstance(b, GradientBundle):
        names = list(a)
        a, b = a.flat(names), b.flat(names)
    a, b = np.ravel(a), np.ravel(b)
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - b) / scale)
