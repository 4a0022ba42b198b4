from collections import OrderedDict

import numpy as np

from autodiff import Tape, ops
from utils.errors import ContractError, ShapeError

ACTIVATIONS = ("tanh",)


class MlpSpec:
    """Dimensions of a single hidden layer fully-connected network."""

    def __init__(self, input_dim, hidden_dim, output_dim, activation="tanh"):
        for name, v in (("input_dim", input_dim), ("hidden_dim", hidden_dim), ("output_dim", output_dim)):
            if int(v) != v or v < 1:
                raise ContractError("{} must be a positive integer, got {}".format(name, v))
        if activation not in ACTIVATIONS:
            raise ContractError("unsupported activation {}".format(activation))
        self.input_dim = int(input_dim)
        self.hidden_dim = int(hidden_dim)
        self.output_dim = int(output_dim)
        self.activation = activation

    def __eq__(self, other):
        return isinstance(other, MlpSpec) and self.as_tuple() == other.as_tuple()

    def as_tuple(self):
        return self.input_dim, self.hidden_dim, self.output_dim, self.activation

    def __repr__(self):
        return "MlpSpec(input_dim={}, hidden_dim={}, output_dim={})".format(*self.as_tuple()[:3])


class MlpParams:
    """W1 (H x in), b1 (H), W2 (out x H), b2 (out). Read-only after construction."""

    names = ("W1", "b1", "W2", "b2")

    def __init__(self, W1, b1, W2, b2):
        arrays = []
        for name, value in zip(self.names, (W1, b1, W2, b2)):
            a = np.array(value, dtype=np.float64)
            if not np.all(np.isfinite(a)):
                raise ShapeError("{} has non-finite entries".format(name))
            a.setflags(write=False)
            arrays.append(a)
        self.W1, self.b1, self.W2, self.b2 = arrays
        if self.W1.ndim != 2 or self.W2.ndim != 2 or self.b1.ndim != 1 or self.b2.ndim != 1:
            raise ShapeError("weights must be matrices and biases vectors")
        if self.b1.shape[0] != self.W1.shape[0] or self.W2.shape[1] != self.W1.shape[0] \
                or self.b2.shape[0] != self.W2.shape[0]:
            raise ShapeError("inconsistent layer shapes W1{} b1{} W2{} b2{}".format(
                self.W1.shape, self.b1.shape, self.W2.shape, self.b2.shape))

    @property
    def spec(self):
        return MlpSpec(self.W1.shape[1], self.W1.shape[0], self.W2.shape[0])

    @classmethod
    def zeros(cls, spec):
        return cls(np.zeros((spec.hidden_dim, spec.input_dim)), np.zeros(spec.hidden_dim),
                   np.zeros((spec.output_dim, spec.hidden_dim)), np.zeros(spec.output_dim))

    def as_dict(self, prefix):
        return OrderedDict(("{}.{}".format(prefix, n), getattr(self, n)) for n in self.names)

    @classmethod
    def from_dict(cls, values, prefix):
        return cls(*(values["{}.{}".format(prefix, n)] for n in cls.names))

    def on_tape(self, tape, prefix):
        return tuple(tape.parameter(k, v) for k, v in self.as_dict(prefix).items())


def init(spec, seed):
    """Glorot-uniform weights, zero biases; deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    a1 = np.sqrt(6.0 / (spec.input_dim + spec.hidden_dim))
    W1 = rng.uniform(-a1, a1, size=(spec.hidden_dim, spec.input_dim))
    a2 = np.sqrt(6.0 / (spec.hidden_dim + spec.output_dim))
    W2 = rng.uniform(-a2, a2, size=(spec.output_dim, spec.hidden_dim))
    return MlpParams(W1, np.zeros(spec.hidden_dim), W2, np.zeros(spec.output_dim))


def forward_on_tape(params, inputs, tape, prefix):
    """Record tanh(x W1^T + b1) W2^T + b2. Returns ``(output, hidden)`` nodes."""
    w1, b1, w2, b2 = params.on_tape(tape, prefix)
    x = tape.lift(inputs)
    if x.value.ndim != 2 or x.value.shape[1] != params.W1.shape[1]:
        raise ShapeError("input of shape {} for a network with input_dim {}".format(
            x.value.shape, params.W1.shape[1]))
    hidden = ops.record_tanh(tape, x @ w1.T + b1)
    return hidden @ w2.T + b2, hidden


def jacobian_on_tape(params, hidden, tape, prefix, cols):
    """Record W2 diag(1 - tanh^2) W1[:, cols] for every row of a recorded forward pass."""
    w1, _, w2, _ = params.on_tape(tape, prefix)
    dact = 1.0 - ops.record_square(tape, hidden)
    return ops.record_jacobian_product(tape, w2, dact, w1, cols)


def _as_batch(inputs):
    if hasattr(inputs, "tape"):
        return inputs, False
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def _col_slice(col_range, input_dim):
    if isinstance(col_range, slice):
        start, stop, step = col_range.indices(input_dim)
        if step != 1:
            raise ContractError("column range must be contiguous")
    else:
        start, stop = (col_range.start, col_range.stop) if isinstance(col_range, range) else col_range
    if not 0 <= start < stop <= input_dim:
        raise ContractError("column range [{}, {}) empty or outside [0, {})".format(start, stop, input_dim))
    return slice(start, stop)


def forward(params, inputs, tape=None, prefix="mlp"):
    """Evaluate the network on a batch (or one vector).

    With a tape the output node is returned, otherwise a plain array.
    """
    x, single = _as_batch(inputs)
    rec = Tape() if tape is None else tape
    out, _ = forward_on_tape(params, x, rec, prefix)
    if tape is not None:
        return out
    return out.value[0] if single else out.value


def input_jacobian_block(params, inputs, col_range, tape=None, prefix="mlp"):
    """Analytic d(output)/d(input[col_range]) at each input row."""
    cols = _col_slice(col_range, params.W1.shape[1])
    x, single = _as_batch(inputs)
    rec = Tape() if tape is None else tape
    _, hidden = forward_on_tape(params, x, rec, prefix)
    jac = jacobian_on_tape(params, hidden, rec, prefix, cols)
    if tape is not None:
        return jac
    return jac.value[0] if single else jac.value
