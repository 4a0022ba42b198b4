import numpy as np

from benchmarks import generate, problem_from_config
from components.dataset import load_dataset, save_dataset
from run.common import check_writable, dataset_path, setup
from utils.errors import CorruptFileError


def run(_run, _config, _log):
    args, logger = setup(_run, _config, _log)
    path = check_writable(args, dataset_path(args))

    problem = problem_from_config(args.problem)
    dataset = generate(problem, args.n_train, args.data_seed)
    save_dataset(dataset, path)

    back = load_dataset(path)
    if not (np.array_equal(back.cond, dataset.cond) and np.array_equal(back.target, dataset.target)):
        raise CorruptFileError(path, "dataset does not read back bitwise")
    _log.info("Wrote %d samples (d = %d, s = %d) to %s", len(dataset), dataset.d, dataset.s, path)
    return path
