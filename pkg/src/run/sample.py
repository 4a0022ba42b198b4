from run.common import checkpoint_path, output_paths, samples_frame, setup, write_csv
from utils.checkpoint import load_checkpoint
from utils.errors import ConfigError


def run(_run, _config, _log):
    args, logger = setup(_run, _config, _log)
    path = output_paths(args, "samples.csv")

    model = load_checkpoint(checkpoint_path(args))
    if len(args.cond) != model.d:
        raise ConfigError("cond", "the model conditions on {} value(s), got {}".format(model.d, len(args.cond)))
    samples = model.sample(args.cond, args.n_samples, args.sample_seed)
    write_csv(samples_frame(samples, "x" if model.direction == "inverse" else "y"), path)
    _log.info("Wrote %d samples at cond = %s to %s", args.n_samples, args.cond, path)
    return path
