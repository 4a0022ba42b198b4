import math

import numpy as np
import pytest
import torch
from conftest import random_model

from autodiff import Tape, finite_difference_gradient, relative_error
from learners import flow_losses, loss_nll, loss_rev, loss_total
from modules import flow
from modules.flow import PrNfModel
from modules.mlp import MlpParams, MlpSpec
from utils.errors import ContractError, SingularJacobianError
from utils.value_norm import NormalizationStats


def random_batch(seed, model, n=8):
    rng = np.random.default_rng([seed, 5])
    return rng.normal(0.3, 0.7, (n, model.d)), rng.normal(-0.2, 1.3, (n, model.s))


def det_distance(model, cond, target):
    """min over the batch of |det J_g det J_h - 1|, the kink of the reversibility penalty."""
    z = flow.encode(model, cond, target)
    ldh, sh = flow.logabsdet_jh(model, cond, target, return_sign=True)
    ldg, sg = flow.logabsdet_jg(model, z, return_sign=True)
    return np.min(np.abs(np.exp(ldh + ldg) * sh * sg - 1.0))


@pytest.mark.parametrize("loss", [loss_nll, loss_rev, loss_total])
def test_loss_gradients_match_finite_differences(loss):
    checked = 0
    for seed in range(100):
        d, s, hidden = 1 + seed % 4, 1 + (seed // 4) % 4, 2 + seed % 15
        model = random_model(seed, d=d, s=s, hidden=hidden, lam=0.5 + seed % 5)
        batch = random_batch(seed, model)
        if det_distance(model, *batch) < 1e-6:
            continue

        tape = Tape()
        grads = tape.backward(loss(model, batch, tape))

        def f(values):
            return loss(model.with_parameters(values), batch).value

        fd = finite_difference_gradient(f, model.parameters(), step=1e-5)
        assert relative_error(grads, fd) < 1e-5, "seed {}".format(seed)
        checked += 1
    assert checked >= 90


def test_total_is_nll_plus_lambda_times_rev():
    model = random_model(1, d=2, s=2, lam=7.5)
    batch = random_batch(1, model)
    terms = flow_losses(model, *batch, Tape())
    assert float(terms.total.value) == pytest.approx(float(terms.nll.value) + 7.5 * float(terms.rev.value),
                                                     rel=1e-14)
    assert float(loss_total(model, batch).value) == pytest.approx(float(terms.total.value), rel=1e-14)


def test_nll_is_mean_negative_log_density():
    model = random_model(2, d=1, s=2)
    cond, target = random_batch(2, model)
    expected = -np.mean(flow.log_density(model, cond, target))
    assert float(loss_nll(model, (cond, target)).value) == pytest.approx(expected, rel=1e-12)


def test_rev_is_nonnegative_and_accepts_datasets():
    from components import Dataset
    model = random_model(3, d=1, s=1)
    cond, target = random_batch(3, model)
    value = float(loss_rev(model, Dataset(cond, target)).value)
    assert value >= 0.0
    assert value == float(loss_rev(model, (cond, target)).value)


def test_empty_or_mismatched_batches_are_rejected():
    model = random_model(4, d=1, s=1)
    with pytest.raises(ContractError):
        loss_total(model, (np.zeros((0, 1)), np.zeros((0, 1))))
    with pytest.raises(ContractError):
        loss_total(model, (np.zeros((3, 2)), np.zeros((3, 1))))


def test_loss_gradients_match_torch():
    model = random_model(5, d=2, s=3, hidden=7, lam=4.0)
    cond, target = random_batch(5, model, n=11)
    tape = Tape()
    total = loss_total(model, (cond, target), tape)
    grads = tape.backward(total)

    P = {k: torch.tensor(v, dtype=torch.float64, requires_grad=True) for k, v in model.parameters().items()}
    u = torch.tensor(model.norm.normalize_cond(cond))
    v = torch.tensor(model.norm.normalize_target(target))
    d, s = model.d, model.s

    def net(prefix, x):
        hidden = torch.tanh(x @ P[prefix + ".W1"].T + P[prefix + ".b1"])
        jac = torch.einsum("oh,nh,hc->noc", P[prefix + ".W2"], 1 - hidden ** 2, P[prefix + ".W1"][:, d:])
        sign, logabs = torch.linalg.slogdet(jac)
        return hidden @ P[prefix + ".W2"].T + P[prefix + ".b2"], logabs, sign

    z2, ldh, sh = net("theta_h", torch.cat([u, v], 1))
    log_p = -0.5 * (z2 ** 2).sum(1) - 0.5 * s * math.log(2 * math.pi) + ldh - model.norm.target_log_scale()
    vhat, ldg, sg = net("theta_g", torch.cat([u, z2], 1))
    rev = (((v - vhat) ** 2).sum(1) + torch.abs(torch.exp(ldh + ldg) * sh * sg - 1)).mean()
    expected = -log_p.mean() + model.lam * rev
    expected.backward()

    assert float(total.value) == pytest.approx(expected.item(), rel=1e-12)
    for name, p in P.items():
        np.testing.assert_allclose(grads[name], p.grad.numpy(), rtol=1e-8, atol=1e-11)


def unit_slope_model(norm):
    """h2 = g2 = 0.5 tanh(2 v): the identity to first order, so z2 = 0 and both Jacobians are 1 at v = 0."""
    theta = MlpParams([[0.0, 2.0]], [0.0], [[0.5]], [0.0])
    return PrNfModel(1, 1, theta, theta, 1.0, norm)


def test_nll_at_the_gaussian_mode():
    cond = np.array([[0.1], [0.7], [-0.3]])
    model = unit_slope_model(NormalizationStats.identity(1, 1))
    value = float(loss_nll(model, (cond, np.zeros((3, 1)))).value)
    assert value == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-15)

    scaled = unit_slope_model(NormalizationStats([0.0], [1.0], [0.5], [2.0]))
    value = float(loss_nll(scaled, (cond, np.full((3, 1), 0.5))).value)
    assert value == pytest.approx(0.5 * math.log(2 * math.pi) + math.log(2.0), abs=1e-15)


def test_rev_vanishes_when_g_inverts_h_on_the_batch():
    model = unit_slope_model(NormalizationStats.identity(1, 1))
    cond = np.linspace(-1.0, 1.0, 5)[:, None]
    assert float(loss_rev(model, (cond, np.zeros((5, 1)))).value) == 0.0


def test_zero_networks_hit_the_singular_jacobian_path():
    zeros = MlpParams.zeros(MlpSpec(3, 4, 2))
    model = PrNfModel(1, 2, zeros, zeros, 1.0, NormalizationStats.identity(1, 2))
    cond, target = np.zeros((4, 1)), np.random.default_rng(0).standard_normal((4, 2))
    with pytest.raises(SingularJacobianError) as info:
        loss_rev(model, (cond, target))
    assert list(info.value.indices) == [0, 1, 2, 3]
    assert info.value.exit_code == 8
