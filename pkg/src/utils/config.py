import collections.abc
import os
from copy import deepcopy

import yaml

from utils.errors import ConfigError, MissingFileError

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "config")

COMMANDS = ("generate", "train", "tune", "sample", "eval", "sweep")
NOISE_FAMILIES = ("gaussian", "laplace", "gaussian_mixture2", "correlated_gaussian")
SCALE_MODES = ("homoscedastic", "heteroscedastic")
DIRECTIONS = ("forward", "inverse")
SINGULAR_POLICIES = ("skip", "abort")
BANDWIDTH_RULES = ("scott",)
FUNCTIONS = ("sin", "quadratic")


def recursive_dict_update(d, u):
    for k, v in u.items():
        if isinstance(v, collections.abc.Mapping):
            d[k] = recursive_dict_update(d.get(k, {}), v)
        else:
            d[k] = v
    return d


def config_copy(config):
    if isinstance(config, dict):
        return {k: config_copy(v) for k, v in config.items()}
    elif isinstance(config, list):
        return [config_copy(v) for v in config]
    else:
        return deepcopy(config)


def load_yaml(path, what="config"):
    if not os.path.isfile(path):
        raise MissingFileError(path, what)
    with open(path, "r") as f:
        try:
            return yaml.load(f, Loader=yaml.FullLoader) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(os.path.basename(path), "YAML error: {}".format(exc))


def resolve_experiment(name):
    """A preset name under config/experiments or a path to a YAML file."""
    if os.path.isfile(name):
        return name
    return os.path.join(CONFIG_DIR, "experiments", "{}.yaml".format(name))


def load_config(experiment=None, overrides=None):
    """default.yaml, then the experiment preset, then ``overrides``."""
    config = load_yaml(os.path.join(CONFIG_DIR, "default.yaml"))
    if experiment:
        config = recursive_dict_update(config, load_yaml(resolve_experiment(experiment), "experiment config"))
    if overrides:
        config = recursive_dict_update(config, overrides)
    return config


def _require(ok, field, message):
    if not ok:
        raise ConfigError(field, message)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _positive_int(config, field, minimum=1):
    v = _lookup(config, field)
    _require(_is_int(v) and v >= minimum, field, "must be an integer >= {}, got {!r}".format(minimum, v))


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _lookup(config, field):
    node = config
    for part in field.split("."):
        if not isinstance(node, collections.abc.Mapping) or part not in node:
            raise ConfigError(field, "missing")
        node = node[part]
    return node


def _choice(config, field, choices):
    v = _lookup(config, field)
    _require(v in choices, field, "must be one of {}, got {!r}".format(", ".join(choices), v))


def args_sanity_check(config, _log=None):
    """Validate a merged config. Raises ConfigError naming the first bad field."""
    _choice(config, "run", COMMANDS)
    _require(_is_int(config.get("seed")), "seed", "must be an integer")
    _require(_is_int(config.get("threads")) and config["threads"] >= 1, "threads", "must be >= 1")

    _choice(config, "problem.kind", ("1d", "hd"))
    if config["problem"]["kind"] == "1d":
        _choice(config, "problem.function", FUNCTIONS)
    else:
        _positive_int(config, "problem.d")
        _positive_int(config, "problem.s")
    _choice(config, "problem.noise.family", NOISE_FAMILIES)
    _choice(config, "problem.noise.mode", SCALE_MODES)
    scale = _lookup(config, "problem.noise.scale")
    _require(_number(scale) and scale > 0, "problem.noise.scale", "must be positive, got {!r}".format(scale))
    noise = config["problem"]["noise"]
    if noise["family"] == "correlated_gaussian":
        _require(noise["mode"] == "homoscedastic", "problem.noise.mode",
                 "correlated_gaussian noise is homoscedastic only")
    if noise["family"] == "gaussian_mixture2":
        offset = _lookup(config, "problem.noise.offset")
        _require(_number(offset), "problem.noise.offset", "must be a number")
    if config["problem"]["kind"] == "1d":
        _require(noise["family"] != "correlated_gaussian", "problem.noise.family",
                 "correlated_gaussian needs a multi-output problem")

    _positive_int(config, "n_train")
    _choice(config, "direction", DIRECTIONS)
    _choice(config, "on_singular", SINGULAR_POLICIES)
    _positive_int(config, "epochs")
    _positive_int(config, "hidden_dim")
    _positive_int(config, "batch_size", minimum=0)
    for field in ("lr", "adam_eps"):
        v = config.get(field)
        _require(_number(v) and v > 0, field, "must be positive, got {!r}".format(v))
    for field in ("adam_beta1", "adam_beta2"):
        v = config.get(field)
        _require(_number(v) and 0 <= v < 1, field, "must be in [0, 1), got {!r}".format(v))
    lam = config.get("lam")
    _require(_number(lam) and lam >= 0, "lam", "must be nonnegative, got {!r}".format(lam))

    for field in ("lambda_grid", "sweep.lambda_grid"):
        grid = _lookup(config, field)
        _require(isinstance(grid, list) and grid and all(_number(v) and v >= 0 for v in grid), field,
                 "must be a nonempty list of nonnegative numbers, got {!r}".format(grid))
    hidden = _lookup(config, "sweep.hidden_grid")
    _require(isinstance(hidden, list) and hidden and all(_is_int(v) and v >= 1 for v in hidden),
             "sweep.hidden_grid", "must be a nonempty list of positive integers, got {!r}".format(hidden))
    if config["run"] == "tune":
        _positive_int(config, "m_samples", minimum=100)
    _choice(config, "kde_bandwidth", BANDWIDTH_RULES)

    _positive_int(config, "n_samples")
    for field in ("eval.n_samples", "eval.n_test", "eval.n_grid", "eval.hist_bins"):
        _positive_int(config, field)
    _positive_int(config, "eval.n_grid", minimum=2)
    _positive_int(config, "eval.kl_samples", minimum=1000)
    bw = _lookup(config, "eval.kde_bandwidth")
    _require(bw in BANDWIDTH_RULES or (_number(bw) and bw > 0), "eval.kde_bandwidth",
             "must be a rule name ({}) or a positive width, got {!r}".format(", ".join(BANDWIDTH_RULES), bw))
    tail = _lookup(config, "eval.tail_mass")
    _require(_number(tail) and 0 < tail < 1, "eval.tail_mass", "must be in (0, 1), got {!r}".format(tail))
    if config["run"] == "sample":
        cond = config.get("cond")
        _require(isinstance(cond, list) and cond and all(_number(v) for v in cond), "cond",
                 "sample needs the conditioning values, e.g. with cond=[0.25]")

    if _log is not None:
        _log.debug("config passed sanity checks")
    return config
