"""Differentiable primitives.

Each ``record_*`` evaluates its value, appends one node to the tape and
registers the adjoint map from the output gradient to the input gradients.
Inputs may be tape nodes or plain arrays (recorded as constants).
"""
import numpy as np

from autodiff.linalg import inverse_transpose, qr_logabsdet
from utils.errors import ShapeError


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (reverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def record_matmul(tape, a, b):
    a, b = tape.lift(a), tape.lift(b)
    A, B = a.value, b.value
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ShapeError("matmul of {} by {}".format(A.shape, B.shape))

    def adjoint(g):
        return g @ B.T, A.T @ g
    return tape.record(A @ B, (a, b), adjoint)


def record_transpose(tape, a):
    a = tape.lift(a)
    return tape.record(a.value.T, (a,), lambda g: (g.T,))


def record_add(tape, a, b):
    a, b = tape.lift(a), tape.lift(b)
    sa, sb = a.value.shape, b.value.shape
    try:
        out = a.value + b.value
    except ValueError:
        raise ShapeError("cannot add shapes {} and {}".format(sa, sb))
    return tape.record(out, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def record_sub(tape, a, b):
    a, b = tape.lift(a), tape.lift(b)
    sa, sb = a.value.shape, b.value.shape
    try:
        out = a.value - b.value
    except ValueError:
        raise ShapeError("cannot subtract shapes {} and {}".format(sa, sb))
    return tape.record(out, (a, b), lambda g: (_unbroadcast(g, sa), -_unbroadcast(g, sb)))


def record_mul(tape, a, b):
    a, b = tape.lift(a), tape.lift(b)
    A, B = a.value, b.value
    try:
        out = A * B
    except ValueError:
        raise ShapeError("cannot multiply shapes {} and {}".format(A.shape, B.shape))
    return tape.record(out, (a, b), lambda g: (_unbroadcast(g * B, A.shape), _unbroadcast(g * A, B.shape)))


def record_scale(tape, a, c):
    a = tape.lift(a)
    c = float(c)
    return tape.record(c * a.value, (a,), lambda g: (c * g,))


def record_tanh(tape, a):
    a = tape.lift(a)
    t = np.tanh(a.value)
    return tape.record(t, (a,), lambda g: (g * (1.0 - t * t),))


def record_square(tape, a):
    a = tape.lift(a)
    A = a.value
    return tape.record(A * A, (a,), lambda g: (2.0 * A * g,))


def record_exp(tape, a):
    a = tape.lift(a)
    e = np.exp(a.value)
    return tape.record(e, (a,), lambda g: (g * e,))


def record_abs(tape, a):
    # subgradient 0 at exactly 0
    a = tape.lift(a)
    s = np.sign(a.value)
    return tape.record(np.abs(a.value), (a,), lambda g: (g * s,))


def record_sum(tape, a, axis=None):
    a = tape.lift(a)
    shape = a.value.shape

    def adjoint(g):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)
    return tape.record(a.value.sum(axis=axis), (a,), adjoint)


def record_mean(tape, a, axis=None):
    a = tape.lift(a)
    n = a.value.size if axis is None else a.value.shape[axis]
    return record_scale(tape, record_sum(tape, a, axis), 1.0 / n)


def record_columns(tape, a, cols):
    """Select columns ``cols`` (a slice) of a batch matrix."""
    a = tape.lift(a)
    shape = a.value.shape

    def adjoint(g):
        full = np.zeros(shape)
        full[:, cols] = g
        return (full,)
    return tape.record(a.value[:, cols], (a,), adjoint)


def record_concat_columns(tape, parts):
    parts = [tape.lift(p) for p in parts]
    widths = [p.value.shape[1] for p in parts]
    bounds = np.cumsum([0] + widths)

    def adjoint(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(parts)))
    return tape.record(np.concatenate([p.value for p in parts], axis=1), parts, adjoint)


def record_batch_logabsdet(tape, a, what="Jacobian"):
    """log|det| of each matrix in an (N, s, s) stack. Returns ``(node, signs)``."""
    a = tape.lift(a)
    logabs, sign, q, r = qr_logabsdet(a.value, what)

    def adjoint(g):
        return (g[:, None, None] * inverse_transpose(q, r),)
    return tape.record(logabs, (a,), adjoint), sign


def record_logabsdet(tape, a):
    """log|det A| of one square matrix. Returns ``(scalar node, sign)``."""
    a = tape.lift(a)
    if a.value.ndim != 2 or a.value.shape[0] != a.value.shape[1]:
        raise ShapeError("logabsdet needs a square matrix, got {}".format(a.value.shape))
    logabs, sign, q, r = qr_logabsdet(a.value[None])

    def adjoint(g):
        return (g * inverse_transpose(q, r)[0],)
    return tape.record(logabs[0], (a,), adjoint), float(sign[0])


def record_jacobian_product(tape, w2, dact, w1, cols):
    """Stack of J_n = W2 diag(dact_n) W1[:, cols] for every row n of ``dact``.

    Shapes: W2 (out, H), dact (N, H), W1 (H, in); result (N, out, |cols|).
    """
    w2, dact, w1 = tape.lift(w2), tape.lift(dact), tape.lift(w1)
    W2, D, W1 = w2.value, dact.value, w1.value
    W1c = W1[:, cols]
    if W2.shape[1] != D.shape[1] or W1.shape[0] != D.shape[1]:
        raise ShapeError("jacobian factors {} {} {} do not chain".format(W2.shape, D.shape, W1.shape))
    J = np.einsum("oh,nh,hc->noc", W2, D, W1c, optimize=True)

    def adjoint(G):
        gw2 = np.einsum("noc,nh,hc->oh", G, D, W1c, optimize=True)
        gd = np.einsum("noc,oh,hc->nh", G, W2, W1c, optimize=True)
        gw1 = np.zeros_like(W1)
        gw1[:, cols] = np.einsum("noc,oh,nh->hc", G, W2, D, optimize=True)
        return gw2, gd, gw1
    return tape.record(J, (w2, dact, w1), adjoint)
