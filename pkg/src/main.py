"""Command line entry point.

    python src/main.py <command> [--config=<preset|path>] [--seed=N] [--out=DIR] [--force] [--threads=N]
                       [with key=value ...]

Commands: generate, train, tune, sample, eval, sweep. The config is
default.yaml, then the preset, then the front-end flags, then the ``with``
overrides; the merged dict runs as a sacred experiment.
"""
import os
import sys

from sacred import SETTINGS, Experiment
from sacred.arg_parser import get_config_updates
from sacred.observers import FileStorageObserver
from sacred.utils import SacredError, apply_backspaces_and_linefeeds

from run import REGISTRY as run_REGISTRY
from utils.config import COMMANDS, config_copy, load_config, recursive_dict_update
from utils.errors import ConfigError, PrnfError
from utils.logging import get_logger

SETTINGS['CAPTURE_MODE'] = "sys"  # set to "no" if you want to see stdout/stderr in console
logger = get_logger()

FLAGS = {
    "--config": ("config", str),
    "--seed": ("seed", int),
    "--out": ("local_results_path", str),
    "--threads": ("threads", int),
}
# --seed also seeds these unless a `with` override names them
SEED_FLAG_KEYS = ("data_seed", "sample_seed")


def build_experiment(config_dict):
    ex = Experiment("prnf", save_git_info=False)
    ex.logger = logger
    ex.captured_out_filter = apply_backspaces_and_linefeeds
    ex.add_config(config_dict)

    @ex.main
    def my_main(_run, _config, _log):
        config = config_copy(_config)
        return run_REGISTRY[config["run"]](_run, config, _log)

    return ex


def parse_argv(params):
    """Split argv into (command, front-end flag values, ``with`` overrides)."""
    params = list(params)
    if not params or params[0] not in COMMANDS:
        raise ConfigError("run", "first argument must be one of {}, got {!r}".format(
            ", ".join(COMMANDS), params[0] if params else None))
    command, rest = params[0], params[1:]
    updates = []
    if "with" in rest:
        pos = rest.index("with")
        rest, updates = rest[:pos], rest[pos + 1:]

    flags = {}
    i = 0
    while i < len(rest):
        arg = rest[i]
        i += 1
        if arg == "--force":
            flags["force"] = True
            continue
        name, sep, value = arg.partition("=")
        if name not in FLAGS:
            raise ConfigError(name, "unknown option")
        if not sep:
            if i >= len(rest):
                raise ConfigError(name, "missing value")
            value = rest[i]
            i += 1
        key, kind = FLAGS[name]
        try:
            flags[key] = kind(value)
        except ValueError:
            raise ConfigError(key, "expected {}, got {!r}".format(kind.__name__, value))
    return command, flags, updates


def build_config(params):
    command, flags, updates = parse_argv(params)
    experiment = flags.pop("config", None)
    if "seed" in flags:
        for key in SEED_FLAG_KEYS:
            flags[key] = flags["seed"]
    overrides, _ = get_config_updates(updates)
    config = load_config(experiment, recursive_dict_update(flags, overrides))
    config["run"] = command
    return config


def main(argv=None):
    params = sys.argv[1:] if argv is None else argv
    try:
        config_dict = build_config(params)
        ex = build_experiment(config_dict)
        file_obs_path = os.path.join(config_dict["local_results_path"], "sacred")
        logger.info("Saving to FileStorageObserver in {}.".format(file_obs_path))
        ex.observers.append(FileStorageObserver(file_obs_path))
        ex.run()
    except PrnfError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code
    except SacredError as e:
        logger.error("config error: %s", e)
        return ConfigError.exit_code
    finally:
        # flush
        sys.stdout.flush()
    return 0


if __name__ == '__main__':
    sys.exit(main())
