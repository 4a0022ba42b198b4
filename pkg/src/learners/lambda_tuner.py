import logging

import numpy as np

from density.kde import kde_fit, kde_logpdf
from learners.prnf_learner import train, train_args
from modules import flow
from utils.errors import ContractError

log = logging.getLogger(__name__)


class LambdaGrid:
    """Cross-entropy H(lambda_j) for every candidate and the index of the minimum."""

    def __init__(self, values, entropies, models=(), histories=()):
        self.values = [float(v) for v in values]
        self.entropies = [float(h) for h in entropies]
        if len(self.values) != len(self.entropies) or not self.values:
            raise ContractError("lambda grid needs one entropy per candidate")
        self.argmin = int(np.argmin(self.entropies))
        self.models = tuple(models)
        self.histories = tuple(histories)

    @property
    def best_lambda(self):
        return self.values[self.argmin]

    @property
    def best_model(self):
        return self.models[self.argmin] if self.models else None

    def to_dict(self):
        return dict(values=self.values, entropies=self.entropies, argmin=self.argmin,
                    best_lambda=self.best_lambda)


def generate_joint(model, cond_low, cond_high, m_samples, seed):
    """M joint samples (z1, g2(z1, z2)) with z1 uniform over the box and z2 standard normal."""
    rng = np.random.default_rng(seed)
    z1 = rng.uniform(cond_low, cond_high, size=(m_samples, model.d))
    z2 = rng.standard_normal((m_samples, model.s))
    _, target_hat = flow.decode(model, flow.LatentSample(z1, z2))
    return np.concatenate([z1, target_hat], axis=1)


def kde_cross_entropy(model, dataset, m_samples, seed, bandwidth="scott"):
    """H = -(1/N) sum log p_KDE(w_n) over the training set, KDE fitted on generated samples.

    The conditioning domain is the bounding box of the training conditions.
    """
    dataset = dataset.with_direction(model.direction)
    low, high = dataset.cond.min(axis=0), dataset.cond.max(axis=0)
    joint = generate_joint(model, low, high, int(m_samples), seed)
    kde = kde_fit(joint, bandwidth)
    return float(-np.mean(kde_logpdf(kde, dataset.joint())))


def tune_lambda(dataset, grid, config, m_samples, logger=None, bandwidth="scott"):
    """Train one model per lambda from scratch and pick the lowest KDE cross-entropy."""
    grid = list(grid)
    if not grid:
        raise ContractError("lambda grid is empty")
    if any(not lam >= 0 for lam in grid):
        raise ContractError("lambda candidates must be nonnegative, got {}".format(grid))
    if int(m_samples) != m_samples or m_samples < 100:
        raise ContractError("m_samples must be >= 100, got {}".format(m_samples))
    base = vars(train_args(config))

    models, histories, entropies = [], [], []
    for lam in grid:
        model, history = train(dataset, dict(base, lam=lam), logger=logger)
        h = kde_cross_entropy(model, dataset, m_samples, [base["seed"], 3], bandwidth)
        log.info("lambda %g: H = %.6g", lam, h)
        models.append(model)
        histories.append(history)
        entropies.append(h)
    return LambdaGrid(grid, entropies, models, histories)
