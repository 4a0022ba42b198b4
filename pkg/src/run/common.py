import os
import pprint
from types import SimpleNamespace as SN

import numpy as np
import pandas as pd

from utils.config import args_sanity_check
from utils.errors import CorruptFileError, OutputExistsError
from utils.logging import Logger

FLOAT_FORMAT = "%.17g"


def setup(_run, _config, _log):
    """Validate the config and build ``args`` and the stats logger for a command."""
    _config = args_sanity_check(_config, _log)
    args = SN(**_config)
    logger = Logger(_log)

    _log.info("Experiment Parameters:")
    experiment_params = pprint.pformat(_config, indent=4, width=1)
    _log.info("\n\n" + experiment_params + "\n")

    os.makedirs(args.local_results_path, exist_ok=True)
    if args.use_tensorboard:
        logger.setup_tb(os.path.join(args.local_results_path, "tb_logs"))
    if _run is not None:
        logger.setup_sacred(_run)
    return args, logger


def check_writable(args, path):
    if os.path.exists(path) and not args.force:
        raise OutputExistsError(path)
    return path


def output_paths(args, *names):
    """Paths of a command's outputs; refuses to clobber existing files unless forced."""
    paths = [check_writable(args, os.path.join(args.local_results_path, n)) for n in names]
    return paths if len(paths) > 1 else paths[0]


def dataset_path(args):
    return args.dataset_path or os.path.join(args.local_results_path, "dataset.csv")


def checkpoint_path(args):
    return args.checkpoint_path or os.path.join(args.local_results_path, "model.ckpt")


def write_csv(frame, path):
    """Write a frame with round-trip float precision and check it reads back intact."""
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    back = pd.read_csv(path, float_precision="round_trip")
    if back.shape != frame.shape or list(back.columns) != [str(c) for c in frame.columns]:
        raise CorruptFileError(path, "written CSV does not read back with shape {}".format(frame.shape))
    return path


def samples_frame(samples, prefix="target"):
    samples = np.atleast_2d(samples)
    return pd.DataFrame(samples, columns=["{}_{}".format(prefix, i) for i in range(samples.shape[1])])
