import numpy as np
import pytest
from conftest import random_model

from benchmarks import Problem1D, gen_1d
from density import NoiseSpec
from learners import LambdaGrid, kde_cross_entropy, train, tune_lambda
from learners.lambda_tuner import generate_joint
from modules.flow import PrNfModel
from utils.errors import ContractError
from utils.value_norm import NormalizationStats


@pytest.fixture(scope="module")
def data():
    return gen_1d(Problem1D("sin", NoiseSpec("gaussian", scale=0.15)), 300, 0)


def test_generated_conditions_stay_in_the_box():
    model = random_model(0, d=2, s=1)
    joint = generate_joint(model, [0.0, -1.0], [1.0, 2.0], 500, 0)
    assert joint.shape == (500, 3)
    assert np.all(joint[:, 0] >= 0.0) and np.all(joint[:, 0] <= 1.0)
    assert np.all(joint[:, 1] >= -1.0) and np.all(joint[:, 1] <= 2.0)


def test_cross_entropy_is_deterministic_in_the_seed(data):
    model = random_model(1)
    a = kde_cross_entropy(model, data, 500, [1, 3])
    assert a == kde_cross_entropy(model, data, 500, [1, 3])
    assert a != kde_cross_entropy(model, data, 500, [2, 3])
    assert np.isfinite(a)


def test_tuning_picks_the_lowest_cross_entropy(data):
    grid = tune_lambda(data, [0.0, 5.0, 50.0], dict(epochs=20, hidden_dim=8, lr=1e-2, log_interval=1000), 200)
    assert isinstance(grid, LambdaGrid)
    assert grid.values == [0.0, 5.0, 50.0]
    assert grid.argmin == int(np.argmin(grid.entropies))
    assert grid.best_model.lam == grid.best_lambda
    assert len(grid.histories) == 3 and len(grid.histories[0]) == 20
    summary = grid.to_dict()
    assert summary["best_lambda"] == grid.best_lambda


def test_tuning_preconditions(data):
    with pytest.raises(ContractError):
        tune_lambda(data, [], {}, 200)
    with pytest.raises(ContractError):
        tune_lambda(data, [1.0], {}, 50)
    with pytest.raises(ContractError):
        tune_lambda(data, [-1.0], {}, 200)


def test_lambda_grid_argmin_and_validation():
    grid = LambdaGrid([1, 50, 100], [2.0, -1.0, 0.5])
    assert grid.argmin == 1 and grid.best_lambda == 50.0 and grid.best_model is None
    with pytest.raises(ContractError):
        LambdaGrid([1, 2], [0.0])


def test_trained_model_has_lower_cross_entropy_than_its_initialization(data):
    config = dict(epochs=300, hidden_dim=16, lam=10.0, lr=1e-2, seed=5, log_interval=1000)
    trained, _ = train(data, config)
    untrained = PrNfModel.init(data.d, data.s, 16, 10.0, NormalizationStats.from_data(data.cond, data.target),
                               seed=5)
    assert kde_cross_entropy(trained, data, 2000, [0, 3]) < kde_cross_entropy(untrained, data, 2000, [0, 3])
