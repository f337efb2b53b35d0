"""Minimal reverse-mode automatic differentiation."""

from src.autodiff.tensor import (
    Node,
    add,
    add_bias,
    as_node,
    backward,
    clip,
    concat_rows,
    constant,
    elementwise_add,
    elementwise_mul,
    exp,
    l2_normalize_rowwise,
    log,
    logsumexp_rowwise,
    matmul,
    mean,
    mul,
    parameter,
    relu,
    scalar_mul,
    sigmoid,
    softmax_rowwise,
    square,
    sub,
    sum,
    take_rows,
    transpose,
)
from src.autodiff.gradcheck import check_gradients, numeric_gradient, relative_error
