"""Training objective L = L1 + lambda * L2.

L1 is the negative log-likelihood of the encoder under the standard normal
latent prior. L2 penalizes the reconstruction error of g(h(w)) in
normalized units plus |det J_g det J_h - 1|, with the determinant product
formed as exp(log|det J_g| + log|det J_h|) times the sign product.
"""
import math
from collections import namedtuple

import numpy as np

from autodiff import Tape, ops
from modules import flow
from utils.errors import ContractError

LossTerms = namedtuple("LossTerms", ["nll", "rev", "total"])


def _unpack(batch):
    if hasattr(batch, "cond") and hasattr(batch, "target"):
        cond, target = batch.cond, batch.target
    else:
        cond, target = batch
    cond = np.asarray(cond, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if cond.ndim != 2 or cond.shape[0] == 0:
        raise ContractError("loss needs a nonempty batch of rows")
    return cond, target


def _check(model, cond, target):
    if cond.shape[1] != model.d or target.shape != (cond.shape[0], model.s):
        raise ContractError("batch of shape {} / {} for a ({}, {}) model".format(
            cond.shape, target.shape, model.d, model.s))


def _nll(model, enc, tape):
    s = model.s
    sq = ops.record_sum(tape, ops.record_square(tape, enc.z2), axis=1)
    log_pz = ops.record_scale(tape, sq, -0.5) - 0.5 * s * math.log(2.0 * math.pi)
    log_p = log_pz + enc.logdet - model.norm.target_log_scale()
    return ops.record_scale(tape, ops.record_mean(tape, log_p), -1.0)


def _rev(model, enc, tape):
    dec = flow.decoder_pass(model, enc.u, enc.z2, tape)
    # cond block of g(h(w)) is an exact copy, so only target coordinates contribute
    resid = ops.record_sub(tape, enc.v, dec.vhat)
    recon = ops.record_sum(tape, ops.record_square(tape, resid), axis=1)
    # normalization constants of log|det J_h| and log|det J_g| cancel
    det_prod = ops.record_mul(tape, ops.record_exp(tape, enc.logdet + dec.logdet), enc.sign * dec.sign)
    det_term = ops.record_abs(tape, det_prod - 1.0)
    return ops.record_mean(tape, recon + det_term)


def flow_losses(model, cond, target, tape):
    """Record L1, L2 and L on ``tape`` sharing one encoder pass."""
    _check(model, cond, target)
    enc = flow.encoder_pass(model, cond, target, tape)
    nll = _nll(model, enc, tape)
    rev = _rev(model, enc, tape)
    total = nll + ops.record_scale(tape, rev, model.lam)
    return LossTerms(nll, rev, total)


def loss_nll(model, batch, tape=None):
    cond, target = _unpack(batch)
    _check(model, cond, target)
    tape = Tape() if tape is None else tape
    return _nll(model, flow.encoder_pass(model, cond, target, tape), tape)


def loss_rev(model, batch, tape=None):
    cond, target = _unpack(batch)
    _check(model, cond, target)
    tape = Tape() if tape is None else tape
    return _rev(model, flow.encoder_pass(model, cond, target, tape), tape)


def loss_total(model, batch, tape=None):
    cond, target = _unpack(batch)
    return flow_losses(model, cond, target, Tape() if tape is None else tape).total
