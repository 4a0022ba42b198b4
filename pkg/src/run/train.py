from benchmarks import loss_history_frame
from components.dataset import load_dataset
from learners import train
from run.common import check_writable, checkpoint_path, dataset_path, output_paths, setup, write_csv
from utils.checkpoint import save_checkpoint
from utils.timing import Stopwatch, time_str


def run(_run, _config, _log):
    args, logger = setup(_run, _config, _log)
    ckpt_path = check_writable(args, checkpoint_path(args))
    history_path = output_paths(args, "loss_history.csv")

    dataset = load_dataset(dataset_path(args))
    _log.info("Training on %d samples from %s (direction %s, lambda %g, hidden %d)",
              len(dataset), dataset_path(args), args.direction, args.lam, args.hidden_dim)

    watch = Stopwatch()
    with watch.phase("train"):
        model, history = train(dataset, vars(args), logger)

    save_checkpoint(model, ckpt_path)
    write_csv(loss_history_frame(history), history_path)
    _log.info("Finished training after %s; final loss %.6g", time_str(watch.timings["train"]), history[-1].total)
    return ckpt_path
