import os

import pandas as pd

from benchmarks import (BenchmarkReport, eval_forward_1d, eval_hd, eval_inverse_1d, forward_histograms,
                        problem_from_config)
from density.kl import GridSpec
from run.common import checkpoint_path, output_paths, setup, write_csv
from utils.checkpoint import load_checkpoint
from utils.config import config_copy
from utils.timing import Stopwatch


def _loss_history(args):
    path = os.path.join(args.local_results_path, "loss_history.csv")
    if not os.path.isfile(path):
        return []
    return pd.read_csv(path, float_precision="round_trip").to_dict("records")


def evaluate(model, problem, ev):
    """Run the pipeline matching the problem and the model direction. Returns (report, {csv name: frame})."""
    frames = {}
    if problem.kind == "hd":
        report = eval_hd(model, problem, ev["n_test"], ev["n_samples"], ev["seed"], ev["kl_samples"])
        frames["per_point.csv"] = report.per_point_frame()
    elif model.direction == "inverse":
        report, hists = eval_inverse_1d(model, problem, ev["y_points"], ev["n_samples"],
                                        GridSpec(0.0, 1.0, ev["n_grid"]), ev["seed"], ev["kde_bandwidth"],
                                        ev["hist_bins"])
        frames["kl_vs_y.csv"] = report.per_point_frame()
        frames["histograms.csv"] = hists
    else:
        report = eval_forward_1d(model, problem, ev["x_points"] or None, ev["n_samples"], ev["seed"],
                                 ev["n_grid"], ev["tail_mass"], ev["zero_exclusion"], ev["kde_bandwidth"])
        frames["kl_vs_x.csv"] = report.per_point_frame()
        frames["histograms.csv"] = forward_histograms(model, problem, ev["hist_points"], ev["n_samples"],
                                                      ev["seed"], ev["hist_bins"], ev["zero_exclusion"])
    return report, frames


def run(_run, _config, _log):
    args, logger = setup(_run, _config, _log)
    problem = problem_from_config(args.problem)
    model = load_checkpoint(checkpoint_path(args))
    if problem.kind == "hd":
        names = ["per_point.csv"]
    else:
        names = ["kl_vs_y.csv" if model.direction == "inverse" else "kl_vs_x.csv", "histograms.csv"]
    report_path = output_paths(args, "report.json")
    output_paths(args, *names)

    watch = Stopwatch()
    with watch.phase("eval"):
        report, frames = evaluate(model, problem, args.eval)

    report.loss_history = _loss_history(args)
    report.timings.update(watch.as_dict())
    report.config = config_copy(_config)
    report.seeds.update(seed=args.seed, data_seed=args.data_seed)
    report.save(report_path)
    BenchmarkReport.load(report_path)

    for name, frame in frames.items():
        write_csv(frame, os.path.join(args.local_results_path, name))
    for name, value in report.aggregates.items():
        _log.info("%s = %.6g", name, value)
    return dict(report.aggregates)
