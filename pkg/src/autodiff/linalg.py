"""QR based log-determinants for stacks of square matrices."""
import numpy as np

from utils.errors import ShapeError, SingularJacobianError

SINGULARITY_FLOOR = 1e-300
LOG_SINGULARITY_FLOOR = float(np.log(SINGULARITY_FLOOR))


def _as_stack(a):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.shape[-1] != a.shape[-2] or a.shape[-1] < 1:
        raise ShapeError("expected square matrices, got shape {}".format(a.shape))
    return a


def householder_q(g, tau):
    """Q = H_0 H_1 ... H_{n-1} from the reflectors ``geqrf`` leaves below the diagonal."""
    n = g.shape[-1]
    q = np.broadcast_to(np.eye(n), g.shape).copy()
    for i in range(n):
        v = np.zeros(g.shape[:-1])
        v[..., i] = 1.0
        v[..., i + 1:] = g[..., i + 1:, i]
        qv = np.einsum("...ij,...j->...i", q, v)
        q -= tau[..., i, None, None] * qv[..., :, None] * v[..., None, :]
    return q


def qr_logabsdet(a, what="Jacobian"):
    """log|det A| and sign(det A) for every matrix of a stack.

    One Householder QR (LAPACK ``geqrf`` through ``numpy.linalg.qr(mode="raw")``):
    log|det A| = sum_i log|R_ii|. Every reflector with a nonzero scale has
    determinant -1, which fixes sign(det Q) without another factorization.
    Returns ``(logabsdet, sign, q, r)``; the factors are kept for the adjoint.
    """
    a = _as_stack(a)
    if not np.all(np.isfinite(a)):
        bad = np.flatnonzero(~np.all(np.isfinite(a), axis=(-2, -1)))
        raise SingularJacobianError(bad, what)
    h, tau = np.linalg.qr(a, mode="raw")
    g = np.swapaxes(h, -1, -2)
    r = np.triu(g)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(diag)).sum(axis=-1)
    singular = ~(logabs >= LOG_SINGULARITY_FLOOR)
    if np.any(singular):
        raise SingularJacobianError(np.flatnonzero(singular), what)
    reflections = np.count_nonzero(tau, axis=-1)
    sign = np.prod(np.sign(diag), axis=-1) * np.where(reflections % 2 == 0, 1.0, -1.0)
    return logabs, sign, householder_q(g, tau), r


def back_substitute(r, b):
    """Solve R X = B for upper triangular R, vectorized over the stack."""
    n = r.shape[-1]
    x = np.zeros(np.broadcast_shapes(r.shape[:-2], b.shape[:-2]) + b.shape[-2:])
    for i in range(n - 1, -1, -1):
        rhs = b[..., i, :] - np.einsum("...j,...jk->...k", r[..., i, i + 1:], x[..., i + 1:, :])
        x[..., i, :] = rhs / r[..., i, i, None]
    return x


def inverse_transpose(q, r):
    """(A^-1)^T from the QR factors of A: A^-1 = R^-1 Q^T."""
    a_inv = back_substitute(r, np.swapaxes(q, -1, -2))
    return np.swapaxes(a_inv, -1, -2)
