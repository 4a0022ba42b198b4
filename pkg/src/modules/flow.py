"""Conditional pseudo-reversible normalizing flow.

Encoder h(cond, target) = (cond, h2(cond, target)) and decoder
g(z1, z2) = (z1, g2(z1, z2)), where h2 and g2 are independent single hidden
layer networks (d + s) -> s. Both networks see z-scored inputs; the constant
log-Jacobian of the normalization is folded into the log-determinants so
densities are reported in raw units.
"""
import math
from collections import OrderedDict, namedtuple

import numpy as np

from autodiff import Node, Tape, ops
from modules import mlp
from utils.errors import ContractError, ShapeError

FORWARD = "forward"
INVERSE = "inverse"
DIRECTIONS = (FORWARD, INVERSE)

LOG_2PI = math.log(2.0 * math.pi)

LatentSample = namedtuple("LatentSample", ["z1", "z2"])
EncoderPass = namedtuple("EncoderPass", ["u", "v", "z2", "logdet", "sign"])
DecoderPass = namedtuple("DecoderPass", ["vhat", "logdet", "sign"])


class PrNfModel:
    """Trained surrogate: dimensions, the two parameter sets, lambda and normalization."""

    def __init__(self, d, s, theta_h, theta_g, lam, norm, direction=FORWARD, info=None):
        self.d = int(d)
        self.s = int(s)
        for name, theta in (("theta_h", theta_h), ("theta_g", theta_g)):
            spec = theta.spec
            if spec.input_dim != self.d + self.s or spec.output_dim != self.s:
                raise ShapeError("{} maps {} -> {}, expected {} -> {}".format(
                    name, spec.input_dim, spec.output_dim, self.d + self.s, self.s))
        if theta_h.spec.hidden_dim != theta_g.spec.hidden_dim:
            raise ShapeError("theta_h and theta_g hidden sizes differ")
        if not lam >= 0:
            raise ContractError("lambda must be nonnegative, got {}".format(lam))
        if norm.d != self.d or norm.s != self.s:
            raise ShapeError("normalization statistics are for ({}, {}), model is ({}, {})".format(
                norm.d, norm.s, self.d, self.s))
        if direction not in DIRECTIONS:
            raise ContractError("unknown direction {}".format(direction))
        self.theta_h = theta_h
        self.theta_g = theta_g
        self.lam = float(lam)
        self.norm = norm
        self.direction = direction
        # training config echo and seeds, carried into checkpoints
        self.info = OrderedDict(info or {})

    @classmethod
    def init(cls, d, s, hidden_dim, lam, norm, direction=FORWARD, seed=0, info=None):
        spec = mlp.MlpSpec(d + s, hidden_dim, s)
        return cls(d, s, mlp.init(spec, [seed, 0]), mlp.init(spec, [seed, 1]), lam, norm, direction, info)

    @property
    def hidden_dim(self):
        return self.theta_h.spec.hidden_dim

    def parameters(self):
        params = self.theta_h.as_dict("theta_h")
        params.update(self.theta_g.as_dict("theta_g"))
        return params

    def with_parameters(self, values):
        return PrNfModel(self.d, self.s, mlp.MlpParams.from_dict(values, "theta_h"),
                         mlp.MlpParams.from_dict(values, "theta_g"), self.lam, self.norm, self.direction, self.info)

    def sample(self, cond, n, seed):
        return sample_conditional(self, cond, n, seed)

    def log_density(self, cond, target):
        return log_density(self, cond, target)


def _rows(x, width, name):
    a = np.array(x, dtype=np.float64)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] != width:
        raise ShapeError("{} must have {} columns, got shape {}".format(name, width, np.shape(x)))
    if not np.all(np.isfinite(a)):
        raise ContractError("{} has non-finite entries".format(name))
    return a, single


def _pair(model, cond, target):
    c, c_single = _rows(cond, model.d, "cond")
    t, t_single = _rows(target, model.s, "target")
    if c.shape[0] == 1 and t.shape[0] > 1:
        c = np.repeat(c, t.shape[0], axis=0)
    elif t.shape[0] == 1 and c.shape[0] > 1:
        t = np.repeat(t, c.shape[0], axis=0)
    if c.shape[0] != t.shape[0]:
        raise ShapeError("cond has {} rows but target has {}".format(c.shape[0], t.shape[0]))
    return c, t, c_single and t_single


def encoder_pass(model, cond, target, tape, jacobian=True):
    """Record z2 = h2(u, v) and, optionally, log|det dz2/dv| of the network (normalized units)."""
    u = model.norm.normalize_cond(cond)
    v = model.norm.normalize_target(target)
    z2, hidden = mlp.forward_on_tape(model.theta_h, np.concatenate([u, v], axis=1), tape, "theta_h")
    logdet, sign = None, None
    if jacobian:
        jac = mlp.jacobian_on_tape(model.theta_h, hidden, tape, "theta_h", slice(model.d, model.d + model.s))
        logdet, sign = ops.record_batch_logabsdet(tape, jac, "encoder Jacobian")
    return EncoderPass(u, v, z2, logdet, sign)


def decoder_pass(model, u, z2, tape, jacobian=True):
    """Record vhat = g2(u, z2) and, optionally, log|det dvhat/dz2| of the network."""
    g_in = ops.record_concat_columns(tape, [u, z2])
    vhat, hidden = mlp.forward_on_tape(model.theta_g, g_in, tape, "theta_g")
    logdet, sign = None, None
    if jacobian:
        jac = mlp.jacobian_on_tape(model.theta_g, hidden, tape, "theta_g", slice(model.d, model.d + model.s))
        logdet, sign = ops.record_batch_logabsdet(tape, jac, "decoder Jacobian")
    return DecoderPass(vhat, logdet, sign)


def _out(node, tape, single):
    if tape is not None:
        return node
    value = node.value
    return value[0] if single else value


def encode(model, cond, target, tape=None):
    c, t, single = _pair(model, cond, target)
    rec = Tape() if tape is None else tape
    enc = encoder_pass(model, c, t, rec, jacobian=False)
    z1 = c[0].copy() if single else c.copy()
    return LatentSample(z1, _out(enc.z2, tape, single))


def _latent(model, z):
    z1, single = _rows(z.z1, model.d, "z1")
    if isinstance(z.z2, Node):
        z2 = z.z2
        rows = z2.value.shape[0]
    else:
        z2, z2_single = _rows(z.z2, model.s, "z2")
        single = single and z2_single
        rows = z2.shape[0]
    if z1.shape[0] == 1 and rows > 1:
        z1 = np.repeat(z1, rows, axis=0)
    if z1.shape[0] != rows:
        raise ShapeError("z1 has {} rows but z2 has {}".format(z1.shape[0], rows))
    return z1, z2, single


def decode(model, z, tape=None):
    z1, z2, single = _latent(model, z)
    rec = Tape() if tape is None else tape
    dec = decoder_pass(model, model.norm.normalize_cond(z1), z2, rec, jacobian=False)
    target_hat = model.norm.denormalize_target(dec.vhat)
    cond_hat = z1[0].copy() if single else z1.copy()
    return cond_hat, _out(target_hat, tape, single)


def logabsdet_jh(model, cond, target, tape=None, return_sign=False):
    """log|det dz2/d target| in raw units (network block minus sum log sigma_target)."""
    c, t, single = _pair(model, cond, target)
    rec = Tape() if tape is None else tape
    enc = encoder_pass(model, c, t, rec)
    out = _out(enc.logdet - model.norm.target_log_scale(), tape, single)
    if return_sign:
        return out, (enc.sign[0] if single and tape is None else enc.sign)
    return out


def logabsdet_jg(model, z, tape=None, return_sign=False):
    """log|det d target_hat / d z2| in raw units (network block plus sum log sigma_target)."""
    z1, z2, single = _latent(model, z)
    rec = Tape() if tape is None else tape
    dec = decoder_pass(model, model.norm.normalize_cond(z1), z2, rec)
    out = _out(dec.logdet + model.norm.target_log_scale(), tape, single)
    if return_sign:
        return out, (dec.sign[0] if single and tape is None else dec.sign)
    return out


def sample_conditional(model, cond, n, seed):
    """Push n standard normal draws of z2 through the decoder at a fixed condition."""
    if int(n) != n or n < 1:
        raise ContractError("sample count must be >= 1, got {}".format(n))
    c, _ = _rows(cond, model.d, "cond")
    if c.shape[0] != 1:
        raise ShapeError("sample_conditional takes one conditioning vector")
    rng = np.random.default_rng(seed)
    z2 = rng.standard_normal((int(n), model.s))
    _, target_hat = decode(model, LatentSample(np.repeat(c, int(n), axis=0), z2))
    return np.atleast_2d(target_hat)


def log_density(model, cond, target):
    """log p(target | cond) = log N(z2; 0, I) + log|det J_h|."""
    c, t, single = _pair(model, cond, target)
    enc = encoder_pass(model, c, t, Tape())
    z2 = enc.z2.value
    value = -0.5 * np.sum(z2 * z2, axis=1) - 0.5 * model.s * LOG_2PI \
        + enc.logdet.value - model.norm.target_log_scale()
    return float(value[0]) if single else value
