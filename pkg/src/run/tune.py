import json
from collections import OrderedDict

import pandas as pd

from components.dataset import load_dataset
from learners import tune_lambda
from run.common import check_writable, checkpoint_path, dataset_path, output_paths, setup, write_csv
from utils.checkpoint import save_checkpoint
from utils.timing import Stopwatch


def run(_run, _config, _log):
    args, logger = setup(_run, _config, _log)
    ckpt_path = check_writable(args, checkpoint_path(args))
    json_path, csv_path = output_paths(args, "lambda_grid.json", "lambda_grid.csv")

    dataset = load_dataset(dataset_path(args))
    watch = Stopwatch()
    with watch.phase("tune"):
        grid = tune_lambda(dataset, args.lambda_grid, vars(args), args.m_samples, logger, args.kde_bandwidth)

    save_checkpoint(grid.best_model, ckpt_path)
    write_csv(pd.DataFrame(OrderedDict(lam=grid.values, cross_entropy=grid.entropies)), csv_path)
    summary = grid.to_dict()
    summary.update(m_samples=args.m_samples, kde_bandwidth=args.kde_bandwidth, kde_seed=[args.seed, 3],
                   timings=watch.as_dict(), checkpoint=ckpt_path)
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")

    for lam, h in zip(grid.values, grid.entropies):
        _log.info("lambda %-8g H = %.6g%s", lam, h, "  <- best" if lam == grid.best_lambda else "")
    return grid.best_lambda
