import logging
import time
from collections import namedtuple
from types import SimpleNamespace as SN

import numpy as np

from autodiff import Tape
from components.adam import Adam
from learners.losses import flow_losses
from modules.flow import PrNfModel
from utils.errors import ContractError, NumericalError, SingularJacobianError, TrainingDivergedError
from utils.timing import time_left, time_str
from utils.value_norm import NormalizationStats

log = logging.getLogger(__name__)

LossRecord = namedtuple("LossRecord", ["epoch", "l1", "l2", "total", "singular_skipped"])

TRAIN_DEFAULTS = dict(
    epochs=2000,
    batch_size=0,
    lr=1e-3,
    adam_beta1=0.9,
    adam_beta2=0.999,
    adam_eps=1e-8,
    seed=1,
    lam=80.0,
    hidden_dim=256,
    on_singular="skip",
    direction="forward",
    log_interval=100,
    metric_interval=0,
    learner="prnf_learner",
)

TRAIN_ECHO_KEYS = ("epochs", "batch_size", "lr", "adam_beta1", "adam_beta2", "adam_eps", "seed", "on_singular")


def train_args(config):
    """TrainConfig view of a config dict or namespace, with defaults filled in."""
    values = dict(TRAIN_DEFAULTS)
    values.update(vars(config) if isinstance(config, SN) else dict(config))
    return SN(**values)


class PrNfLearner:
    """One Adam step per batch on L = L1 + lambda * L2."""

    def __init__(self, model, logger, args):
        self.model = model
        self.logger = logger
        self.args = args
        self.optimiser = Adam(model.parameters(), lr=args.lr, b1=args.adam_beta1,
                              b2=args.adam_beta2, eps=args.adam_eps)

    def losses_and_grads(self, cond, target):
        """Record the losses, dropping singular samples until the batch goes through."""
        keep = np.arange(cond.shape[0])
        skipped = 0
        while True:
            tape = Tape()
            try:
                terms = flow_losses(self.model, cond[keep], target[keep], tape)
            except SingularJacobianError as e:
                if self.args.on_singular == "abort":
                    raise
                bad = keep[e.indices]
                log.warning("skipping %d sample(s) with a singular %s, first at %d", len(bad), e.what, bad[0])
                keep = np.delete(keep, e.indices)
                skipped += len(bad)
                if keep.size == 0:
                    raise
                continue
            return terms, tape, skipped

    def train_batch(self, cond, target, epoch):
        terms, tape, skipped = self.losses_and_grads(cond, target)
        l1, l2 = float(terms.nll.value), float(terms.rev.value)
        if not np.isfinite(terms.total.value):
            raise TrainingDivergedError(epoch, float(terms.total.value))
        try:
            grads = tape.backward(terms.total)
        except NumericalError:
            raise TrainingDivergedError(epoch, float(terms.total.value))
        params = self.optimiser.step(grads)
        self.model = self.model.with_parameters(params)
        return l1, l2, skipped, grads.global_norm()

    def train_epoch(self, dataset, epoch, rng):
        n = len(dataset)
        l1_sum, l2_sum, skipped, norms = 0.0, 0.0, 0, []
        for idx in dataset.batches(self.args.batch_size, rng):
            l1, l2, k, gnorm = self.train_batch(dataset.cond[idx], dataset.target[idx], epoch)
            l1_sum += l1 * len(idx)
            l2_sum += l2 * len(idx)
            skipped += k
            norms.append(gnorm)
        l1, l2 = l1_sum / n, l2_sum / n
        record = LossRecord(epoch, l1, l2, l1 + self.model.lam * l2, skipped)

        if self.logger is not None:
            self.logger.log_stat("loss", record.total, epoch)
            self.logger.log_stat("loss_nll", l1, epoch)
            self.logger.log_stat("loss_rev", l2, epoch)
            self.logger.log_stat("grad_norm", float(np.mean(norms)), epoch)
            self.logger.log_stat("singular_skipped", skipped, epoch)
        return record


def train(dataset, config, logger=None, callback=None):
    """Fit a PR-NF model to ``dataset``. Returns ``(model, [LossRecord])``.

    ``callback(epoch, model)`` runs every ``metric_interval`` epochs when set.
    """
    args = train_args(config)
    if len(dataset) < 2:
        raise ContractError("training needs at least 2 samples, got {}".format(len(dataset)))
    if int(args.epochs) != args.epochs or args.epochs < 1:
        raise ContractError("epochs must be >= 1, got {}".format(args.epochs))
    dataset = dataset.with_direction(args.direction)

    norm = NormalizationStats.from_data(dataset.cond, dataset.target)
    info = {k: getattr(args, k) for k in TRAIN_ECHO_KEYS}
    model = PrNfModel.init(dataset.d, dataset.s, args.hidden_dim, args.lam, norm,
                           args.direction, seed=args.seed, info=info)
    from learners import REGISTRY as le_REGISTRY
    learner = le_REGISTRY[args.learner](model, logger, args)
    rng = np.random.default_rng([args.seed, 2])

    history = []
    start_time = time.time()
    last_log = 0
    for epoch in range(int(args.epochs)):
        history.append(learner.train_epoch(dataset, epoch, rng))
        if callback is not None and args.metric_interval and (epoch + 1) % args.metric_interval == 0:
            callback(epoch, learner.model)
        if logger is not None and (epoch + 1 - last_log >= args.log_interval or epoch + 1 == args.epochs):
            log.info("epoch %d / %d, elapsed %s, left %s", epoch + 1, args.epochs,
                     time_str(time.time() - start_time), time_left(start_time, 0, epoch + 1, args.epochs))
            logger.print_recent_stats()
            last_log = epoch + 1
    return learner.model, history
