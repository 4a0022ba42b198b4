from .generate import run as generate_run
from .train import run as train_run
from .tune import run as tune_run
from .sample import run as sample_run
from .evaluate import run as eval_run
from .sweep import run as sweep_run

REGISTRY = {}
REGISTRY["generate"] = generate_run
REGISTRY["train"] = train_run
REGISTRY["tune"] = tune_run
REGISTRY["sample"] = sample_run
REGISTRY["eval"] = eval_run
REGISTRY["sweep"] = sweep_run
