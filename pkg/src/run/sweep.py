"""Hyperparameter sweep over the lambda x hidden-size grid.

Every cell trains from the same dataset and seed into its own subdirectory
``lam_<lambda>_hidden_<h>`` and gets a full evaluation. The sweep directory
then holds the per-cell table, the best cell and confidence bands over the
loss and metric histories of all cells.
"""
import itertools
import json
import logging
import os
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor

import pandas as pd

from benchmarks import (confidence_bands, eval_forward_1d, eval_hd, eval_inverse_1d, loss_history_frame,
                        problem_from_config)
from components.dataset import load_dataset
from density.kl import GridSpec
from learners import train
from run.common import check_writable, dataset_path, output_paths, setup, write_csv
from run.evaluate import evaluate
from utils.checkpoint import save_checkpoint
from utils.config import config_copy
from utils.logging import Logger
from utils.timing import Stopwatch

log = logging.getLogger(__name__)


def cell_name(lam, hidden):
    return "lam_{:g}_hidden_{}".format(lam, hidden)


def history_metrics(model, problem, config):
    """Aggregates on the reduced test set used while training."""
    ev, sw = config["eval"], config["sweep"]
    n = sw["history_n_samples"]
    if problem.kind == "hd":
        report = eval_hd(model, problem, sw["history_n_test"], n, ev["seed"], ev["kl_samples"])
    elif model.direction == "inverse":
        report, _ = eval_inverse_1d(model, problem, ev["y_points"], n, GridSpec(0.0, 1.0, ev["n_grid"]), ev["seed"],
                                    ev["kde_bandwidth"], ev["hist_bins"])
    else:
        report = eval_forward_1d(model, problem, ev["hist_points"], n, ev["seed"], ev["n_grid"], ev["tail_mass"],
                                 ev["zero_exclusion"], ev["kde_bandwidth"])
    return report.aggregates


def run_cell(config, lam, hidden):
    """Train and evaluate one cell. Top level so worker processes can unpickle it."""
    config = config_copy(config)
    config.update(lam=lam, hidden_dim=hidden)
    cell_dir = os.path.join(config["local_results_path"], cell_name(lam, hidden))
    os.makedirs(cell_dir, exist_ok=True)
    problem = problem_from_config(config["problem"])
    dataset = load_dataset(config["dataset_path"])
    cell_log = logging.getLogger("{}.{}".format(__name__, cell_name(lam, hidden)))

    metric_history = []

    def record_metrics(epoch, model):
        metric_history.append(OrderedDict(epoch=epoch, **history_metrics(model, problem, config)))

    watch = Stopwatch()
    with watch.phase("train"):
        model, history = train(dataset, config, Logger(cell_log), callback=record_metrics)
    with watch.phase("eval"):
        report, frames = evaluate(model, problem, config["eval"])

    save_checkpoint(model, os.path.join(cell_dir, "model.ckpt"))
    write_csv(loss_history_frame(history), os.path.join(cell_dir, "loss_history.csv"))
    if metric_history:
        write_csv(pd.DataFrame(metric_history), os.path.join(cell_dir, "metric_history.csv"))
    for name, frame in frames.items():
        write_csv(frame, os.path.join(cell_dir, name))
    report.loss_history = [r._asdict() for r in history]
    report.timings.update(watch.as_dict())
    report.config = config
    report.seeds.update(seed=config["seed"])
    report.save(os.path.join(cell_dir, "report.json"))

    cell_log.info("done: %s", ", ".join("{} = {:.4g}".format(k, v) for k, v in report.aggregates.items()))
    return OrderedDict(lam=lam, hidden_dim=hidden, aggregates=report.aggregates,
                       loss=[r.total for r in history], metric_history=metric_history)


def run(_run, _config, _log):
    args, logger = setup(_run, _config, _log)
    json_path, cells_path, bands_path = output_paths(args, "sweep.json", "cells.csv", "loss_bands.csv")
    cells = list(itertools.product(args.sweep["lambda_grid"], args.sweep["hidden_grid"]))
    for lam, hidden in cells:
        check_writable(args, os.path.join(args.local_results_path, cell_name(lam, hidden)))

    config = config_copy(_config)
    config["dataset_path"] = dataset_path(args)
    load_dataset(config["dataset_path"])
    _log.info("Sweeping %d cells with %d worker(s)", len(cells), args.threads)

    watch = Stopwatch()
    with watch.phase("sweep"):
        if args.threads > 1:
            with ProcessPoolExecutor(max_workers=args.threads) as ex:
                futures = [ex.submit(run_cell, config, lam, hidden) for lam, hidden in cells]
                results = [f.result() for f in futures]
        else:
            results = [run_cell(config, lam, hidden) for lam, hidden in cells]

    table = pd.DataFrame([OrderedDict(lam=r["lam"], hidden_dim=r["hidden_dim"], **r["aggregates"]) for r in results])
    write_csv(table, cells_path)
    labels = [cell_name(r["lam"], r["hidden_dim"]) for r in results]
    write_csv(confidence_bands(dict(zip(labels, (r["loss"] for r in results)))), bands_path)

    metrics = [m for m in table.columns if m not in ("lam", "hidden_dim")]
    for metric in metrics:
        curves = {label: pd.Series([h[metric] for h in r["metric_history"]],
                                   index=[h["epoch"] for h in r["metric_history"]])
                  for label, r in zip(labels, results) if r["metric_history"]}
        if curves:
            write_csv(confidence_bands(curves), os.path.join(args.local_results_path, "{}_bands.csv".format(metric)))

    key = "avg_kl" if "avg_kl" in table.columns else "kl"
    best = table.loc[table[key].idxmin()]
    summary = OrderedDict(
        selected_by=key,
        best=OrderedDict(cell=cell_name(best["lam"], int(best["hidden_dim"])), lam=float(best["lam"]),
                         hidden_dim=int(best["hidden_dim"]), **{m: float(best[m]) for m in metrics}),
        minima=OrderedDict((m, OrderedDict(value=float(table[m].min()),
                                           cell=labels[int(table[m].values.argmin())])) for m in metrics),
        cells=labels,
        timings=watch.as_dict(),
    )
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    _log.info("Best cell by %s: %s", key, summary["best"]["cell"])
    return summary["best"]
