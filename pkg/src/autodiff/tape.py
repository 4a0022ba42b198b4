from collections import OrderedDict
from collections.abc import Mapping

import numpy as np

from utils.errors import ContractError, NumericalError, ShapeError


def as_matrix(x, name="matrix"):
    """Coerce ``x`` to a finite 2-D float64 array (the Matrix carrier)."""
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError("{} must be a non-empty 2-D matrix, got shape {}".format(name, m.shape))
    if not np.all(np.isfinite(m)):
        raise ShapeError("{} has non-finite entries".format(name))
    return m


class Node:
    """Handle to one recorded value on a :class:`Tape`."""

    __slots__ = ("tape", "index", "value")
    # make ndarray <op> Node defer to the reflected Node operator
    __array_ufunc__ = None

    def __init__(self, tape, index, value):
        self.tape = tape
        self.index = index
        self.value = value

    @property
    def shape(self):
        return self.value.shape

    @property
    def T(self):
        from autodiff import ops
        return ops.record_transpose(self.tape, self)

    def __add__(self, other):
        from autodiff import ops
        return ops.record_add(self.tape, self, other)

    def __radd__(self, other):
        from autodiff import ops
        return ops.record_add(self.tape, other, self)

    def __sub__(self, other):
        from autodiff import ops
        return ops.record_sub(self.tape, self, other)

    def __rsub__(self, other):
        from autodiff import ops
        return ops.record_sub(self.tape, other, self)

    def __mul__(self, other):
        from autodiff import ops
        if np.isscalar(other):
            return ops.record_scale(self.tape, self, other)
        return ops.record_mul(self.tape, self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        from autodiff import ops
        return ops.record_scale(self.tape, self, -1.0)

    def __matmul__(self, other):
        from autodiff import ops
        return ops.record_matmul(self.tape, self, other)

    def __rmatmul__(self, other):
        from autodiff import ops
        return ops.record_matmul(self.tape, other, self)

    def __repr__(self):
        return "Node(index={}, shape={})".format(self.index, self.value.shape)


class GradientBundle(Mapping):
    """Gradients of a scalar with respect to every named leaf of a tape."""

    def __init__(self, grads):
        self._grads = OrderedDict(grads)

    def __getitem__(self, name):
        return self._grads[name]

    def __iter__(self):
        return iter(self._grads)

    def __len__(self):
        return len(self._grads)

    def all_finite(self):
        return all(np.all(np.isfinite(g)) for g in self._grads.values())

    def global_norm(self):
        return float(np.sqrt(sum(float(np.sum(g * g)) for g in self._grads.values())))

    def flat(self, names=None):
        names = list(self._grads) if names is None else names
        return np.concatenate([np.ravel(self._grads[k]) for k in names])

    def __repr__(self):
        return "GradientBundle({})".format({k: v.shape for k, v in self._grads.items()})


class Tape:
    """Wengert list for reverse-mode differentiation.

    Nodes are appended in evaluation order, so the list is topologically
    sorted by construction. A tape has a single owner while recording.
    """

    def __init__(self):
        self.values = []
        self.parents = []
        self.adjoints = []
        self.leaves = OrderedDict()

    def __len__(self):
        return len(self.values)

    def record(self, value, parents=(), adjoint=None):
        value = np.asarray(value, dtype=np.float64)
        parent_idx = tuple(p.index for p in parents)
        for i in parent_idx:
            if i >= len(self.values):
                raise ContractError("node inputs must precede it on the tape")
        node = Node(self, len(self.values), value)
        self.values.append(value)
        self.parents.append(parent_idx)
        self.adjoints.append(adjoint)
        return node

    def parameter(self, name, value):
        """Register a named leaf. Registering the same name twice returns the first node."""
        if name in self.leaves:
            return Node(self, self.leaves[name], self.values[self.leaves[name]])
        value = np.array(value, dtype=np.float64)
        if not np.all(np.isfinite(value)):
            raise ShapeError("parameter {} has non-finite entries".format(name))
        node = self.record(value)
        self.leaves[name] = node.index
        return node

    def constant(self, value):
        return self.record(value)

    def lift(self, x):
        if isinstance(x, Node):
            if x.tape is not self:
                raise ContractError("node belongs to a different tape")
            return x
        return self.constant(x)

    def backward(self, root, seed=1.0):
        """Accumulate d(root)/d(leaf) for every leaf, visiting each node once in reverse order."""
        root = self.lift(root)
        if root.value.size != 1:
            raise ContractError("backward needs a scalar root, got shape {}".format(root.value.shape))

        grads = [None] * (root.index + 1)
        grads[root.index] = np.full(root.value.shape, float(seed))
        for i in range(root.index, -1, -1):
            g = grads[i]
            if g is None or self.adjoints[i] is None:
                continue
            for p, pg in zip(self.parents[i], self.adjoints[i](g)):
                if pg is None:
                    continue
                grads[p] = pg if grads[p] is None else grads[p] + pg

        bundle = OrderedDict()
        for name, idx in self.leaves.items():
            g = grads[idx] if idx <= root.index else None
            bundle[name] = np.zeros_like(self.values[idx]) if g is None else np.asarray(g, dtype=np.float64)
            if not np.all(np.isfinite(bundle[name])):
                raise NumericalError("non-finite gradient for parameter {}".format(name))
        return GradientBundle(bundle)


def backward(tape, seed_scalar):
    """Gradients of the last node on ``tape`` (which must be a scalar)."""
    if len(tape) == 0:
        raise ContractError("backward on an empty tape")
    last = Node(tape, len(tape) - 1, tape.values[-1])
    return tape.backward(last, seed_scalar)
