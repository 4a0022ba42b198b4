from .tape import GradientBundle, Node, Tape, as_matrix, backward
from .ops import (record_abs, record_add, record_batch_logabsdet, record_columns, record_concat_columns,
                  record_exp, record_jacobian_product, record_logabsdet, record_matmul, record_mean,
                  record_mul, record_scale, record_square, record_sub, record_sum, record_tanh,
                  record_transpose)
from .gradcheck import finite_difference_gradient, relative_error
