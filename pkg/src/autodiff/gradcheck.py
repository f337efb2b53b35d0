"""Finite-difference gradient checking."""

from typing import Callable, List, Sequence

import numpy as np

from src.autodiff.tensor import Node, backward, parameter

RELATIVE_FLOOR = 1e-6


def numeric_gradient(
    fn: Callable[[Sequence[np.ndarray]], float],
    inputs: Sequence[np.ndarray],
    index: int,
    h: float = 1e-5,
) -> np.ndarray:
    """Central-difference gradient of scalar ``fn`` w.r.t. ``inputs[index]``."""
    values = [np.array(x, dtype=np.float64) for x in inputs]
    target = values[index]
    grad = np.zeros_like(target)
    it = np.nditer(target, flags=["multi_index"])
    for _ in it:
        pos = it.multi_index
        original = target[pos]
        target[pos] = original + h
        plus = fn(values)
        target[pos] = original - h
        minus = fn(values)
        target[pos] = original
        grad[pos] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), RELATIVE_FLOOR)
    return np.abs(analytic - numeric) / scale


def check_gradients(
    build: Callable[[List[Node]], Node], inputs: Sequence[np.ndarray], h: float = 1e-5
) -> float:
    """Largest elementwise relative error between backward() and finite differences.

    ``build`` maps a list of nodes (one per input) to a scalar node.
    """
    nodes = [parameter(np.array(x, dtype=np.float64)) for x in inputs]
    root = build(nodes)
    backward(root)

    def evaluate(values: Sequence[np.ndarray]) -> float:
        return build([parameter(v) for v in values]).item()

    worst = 0.0
    for i, node in enumerate(nodes):
        numeric = numeric_gradient(evaluate, inputs, i, h)
        if node.grad.size:
            worst = max(worst, float(relative_error(node.grad, numeric).max()))
    return worst
