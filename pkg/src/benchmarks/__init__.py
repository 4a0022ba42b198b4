from .functions import QUADRATIC, SIN, BenchmarkFunction

REGISTRY = {}

REGISTRY["sin"] = SIN
REGISTRY["quadratic"] = QUADRATIC

from .problems import PROBLEM_KINDS, Problem1D, ProblemHD, problem_from_config  # noqa: E402
from .generators import GENERATOR_VERSION, gen_1d, gen_hd, generate, regenerate  # noqa: E402
from .oracles import ExactForwardSampler, ExactInverseSampler, true_conditional_1d, true_inverse_1d  # noqa: E402
from .report import BenchmarkReport, confidence_bands, loss_history_frame  # noqa: E402
from .evaluation import (DEFAULT_X_POINTS, HIST_X_POINTS, INVERSE_Y_POINTS, eval_forward_1d,  # noqa: E402
                         eval_hd, eval_inverse_1d, forward_histograms, forward_y_grid, hd_test_points)
