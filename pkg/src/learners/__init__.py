from .prnf_learner import LossRecord, PrNfLearner, train, train_args
from .losses import LossTerms, flow_losses, loss_nll, loss_rev, loss_total
from .lambda_tuner import LambdaGrid, kde_cross_entropy, tune_lambda

REGISTRY = {}

REGISTRY["prnf_learner"] = PrNfLearner
