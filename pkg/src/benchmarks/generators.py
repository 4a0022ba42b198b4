from collections import OrderedDict

import numpy as np

from components.dataset import Dataset
from density.noise import noise_sample_rows
from modules.flow import FORWARD
from utils.errors import ContractError, CorruptFileError

GENERATOR_VERSION = 1


def _streams(seed):
    # independent streams for inputs and noise
    x_seq, noise_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(x_seq), np.random.default_rng(noise_seq)


def _generate(problem, n, seed, generator):
    if int(n) != n or n < 1:
        raise ContractError("sample count must be >= 1, got {}".format(n))
    x_rng, noise_rng = _streams(seed)
    x = x_rng.uniform(0.0, 1.0, size=(int(n), problem.d))
    fx = problem.f(x)
    y = fx.copy() if problem.noise is None else noise_sample_rows(problem.noise, fx, noise_rng)
    provenance = OrderedDict(generator=generator, version=GENERATOR_VERSION, problem=problem.to_dict(),
                             n=int(n), seed=seed)
    return Dataset(x, y, FORWARD, provenance)


def gen_1d(problem, n, seed):
    """x uniform on [0, 1], y = f(x) + eps(x)."""
    return _generate(problem, n, seed, "gen_1d")


def gen_hd(problem, n, seed):
    """x uniform on [0, 1]^d, y = A x + eps."""
    return _generate(problem, n, seed, "gen_hd")


def generate(problem, n, seed):
    return gen_1d(problem, n, seed) if problem.kind == "1d" else gen_hd(problem, n, seed)


def regenerate(provenance):
    """Rebuild a dataset from its provenance record."""
    from benchmarks.problems import problem_from_config
    try:
        if provenance["version"] != GENERATOR_VERSION:
            raise CorruptFileError("<provenance>", "generator version {} is not {}".format(
                provenance["version"], GENERATOR_VERSION))
        problem = problem_from_config(provenance["problem"])
        fn = {"gen_1d": gen_1d, "gen_hd": gen_hd}[provenance["generator"]]
        return fn(problem, provenance["n"], provenance["seed"])
    except KeyError as e:
        raise CorruptFileError("<provenance>", "missing provenance field {}".format(e))
