"""Reverse-mode automatic differentiation over dense float64 arrays.

Graphs are rebuilt on every forward pass. Each ``Node`` keeps its value, an
accumulated gradient and a closure mapping the output adjoint to the adjoints
of its parents. Only bias-row broadcasting is supported.
"""

from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit, softmax

from src.core.exceptions import ContractError, MathDomainError, ShapeError

Array = np.ndarray
BackwardFn = Callable[[Array], Tuple[Optional[Array], ...]]
Scalar = Union[int, float]

NORM_FLOOR = 1e-12


class Node:
    """A value in the computation graph."""

    __slots__ = ("value", "grad", "parents", "requires_grad", "op", "_backward")

    def __init__(
        self,
        value,
        parents: Sequence["Node"] = (),
        backward: Optional[BackwardFn] = None,
        requires_grad: bool = False,
        op: str = "leaf",
    ):
        value = np.asarray(value, dtype=np.float64).view()
        value.flags.writeable = False
        self.value = value
        self.grad = np.zeros(value.shape, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = tuple(parents) if requires_grad else ()
        self._backward = backward if requires_grad else None
        self.op = op

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def item(self) -> float:
        if self.value.size != 1:
            raise ContractError(f"item() needs a single-element node, got shape {self.shape}")
        return float(self.value.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = np.zeros(self.value.shape, dtype=np.float64)

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        return f"Node(op={self.op}, shape={self.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, _lift_like(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, _lift_like(other, self))

    def __rsub__(self, other):
        return sub(_lift_like(other, self), self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scalar_mul(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scalar_mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def constant(value) -> Node:
    """Leaf that never receives gradient."""
    return Node(value, requires_grad=False, op="constant")


def parameter(value) -> Node:
    """Leaf whose gradient is accumulated by ``backward``."""
    return Node(value, requires_grad=True, op="parameter")


def as_node(value) -> Node:
    return value if isinstance(value, Node) else constant(value)


def _lift_like(other, like: Node) -> Node:
    if isinstance(other, Node):
        return other
    return constant(np.full(like.shape, float(other)))


def _result(value: Array, parents: Sequence[Node], backward_fn: BackwardFn, op: str) -> Node:
    requires_grad = any(p.requires_grad for p in parents)
    return Node(value, parents, backward_fn, requires_grad=requires_grad, op=op)


def _require_same_shape(a: Node, b: Node, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def _require_matrix(x: Node, op: str) -> None:
    if x.value.ndim != 2:
        raise ShapeError(f"{op}: expected a 2-D input, got shape {x.shape}")


# Linear algebra


def matmul(a: Node, b: Node) -> Node:
    _require_matrix(a, "matmul")
    _require_matrix(b, "matmul")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions {a.shape} x {b.shape} disagree")
    av, bv = a.value, b.value

    def _backward(g: Array):
        return g @ bv.T, av.T @ g

    return _result(av @ bv, (a, b), _backward, "matmul")


def transpose(x: Node) -> Node:
    _require_matrix(x, "transpose")
    return _result(x.value.T.copy(), (x,), lambda g: (g.T,), "transpose")


def concat_rows(*parts: Node) -> Node:
    if not parts:
        raise ContractError("concat_rows needs at least one input")
    for part in parts:
        _require_matrix(part, "concat_rows")
    if len({p.shape[1] for p in parts}) != 1:
        raise ShapeError("concat_rows: column counts differ")
    bounds = np.cumsum([0] + [p.shape[0] for p in parts])

    def _backward(g: Array):
        return tuple(g[bounds[i] : bounds[i + 1]] for i in range(len(parts)))

    return _result(np.vstack([p.value for p in parts]), parts, _backward, "concat_rows")


def take_rows(x: Node, indices) -> Node:
    _require_matrix(x, "take_rows")
    idx = np.asarray(indices, dtype=np.int64)
    n_rows = x.shape[0]

    def _backward(g: Array):
        out = np.zeros((n_rows, g.shape[1]))
        np.add.at(out, idx, g)
        return (out,)

    return _result(x.value[idx], (x,), _backward, "take_rows")


# Elementwise


def add(a: Node, b: Node) -> Node:
    _require_same_shape(a, b, "add")
    return _result(a.value + b.value, (a, b), lambda g: (g, g), "add")


elementwise_add = add


def sub(a: Node, b: Node) -> Node:
    _require_same_shape(a, b, "sub")
    return _result(a.value - b.value, (a, b), lambda g: (g, -g), "sub")


def mul(a: Node, b: Node) -> Node:
    _require_same_shape(a, b, "mul")
    av, bv = a.value, b.value
    return _result(av * bv, (a, b), lambda g: (g * bv, g * av), "mul")


elementwise_mul = mul


def scalar_mul(x: Node, c: Scalar) -> Node:
    c = float(c)
    return _result(x.value * c, (x,), lambda g: (g * c,), "scalar_mul")


def add_bias(x: Node, bias: Node) -> Node:
    """Add a bias row to every row of ``x``."""
    _require_matrix(x, "add_bias")
    if bias.value.size != x.shape[1] or bias.value.ndim > 2:
        raise ShapeError(f"add_bias: bias {bias.shape} does not match {x.shape[1]} columns")
    if bias.value.ndim == 2 and bias.shape[0] != 1:
        raise ShapeError(f"add_bias: bias must be a single row, got {bias.shape}")
    bias_shape = bias.shape

    def _backward(g: Array):
        return g, g.sum(axis=0).reshape(bias_shape)

    return _result(x.value + bias.value.reshape(1, -1), (x, bias), _backward, "add_bias")


def sigmoid(x: Node) -> Node:
    s = expit(x.value)
    return _result(s, (x,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def relu(x: Node) -> Node:
    mask = x.value > 0
    return _result(np.where(mask, x.value, 0.0), (x,), lambda g: (g * mask,), "relu")


def exp(x: Node) -> Node:
    out = np.exp(x.value)
    return _result(out, (x,), lambda g: (g * out,), "exp")


def log(x: Node) -> Node:
    xv = x.value
    if np.any(xv <= 0):
        raise MathDomainError("log: input contains non-positive values")
    return _result(np.log(xv), (x,), lambda g: (g / xv,), "log")


def square(x: Node) -> Node:
    xv = x.value
    return _result(xv * xv, (x,), lambda g: (2.0 * xv * g,), "square")


def clip(x: Node, low: float, high: float) -> Node:
    """Clamp into ``[low, high]``; gradient passes only inside the interval."""
    xv = x.value
    inside = (xv >= low) & (xv <= high)
    return _result(np.clip(xv, low, high), (x,), lambda g: (g * inside,), "clip")


# Reductions


def sum(x: Node) -> Node:  # noqa: A001
    shape = x.shape
    return _result(np.sum(x.value), (x,), lambda g: (np.full(shape, float(g)),), "sum")


def mean(x: Node) -> Node:
    shape, size = x.shape, x.value.size
    return _result(
        np.mean(x.value), (x,), lambda g: (np.full(shape, float(g) / size),), "mean"
    )


# Row-wise


def softmax_rowwise(x: Node) -> Node:
    _require_matrix(x, "softmax_rowwise")
    s = softmax(x.value, axis=1)

    def _backward(g: Array):
        return (s * (g - np.sum(g * s, axis=1, keepdims=True)),)

    return _result(s, (x,), _backward, "softmax_rowwise")


def logsumexp_rowwise(x: Node) -> Node:
    """Row-wise log-sum-exp with max subtraction; output is a column."""
    _require_matrix(x, "logsumexp_rowwise")
    row_max = np.max(x.value, axis=1, keepdims=True)
    shifted = np.exp(x.value - row_max)
    totals = np.sum(shifted, axis=1, keepdims=True)
    weights = shifted / totals
    return _result(
        row_max + np.log(totals), (x,), lambda g: (g * weights,), "logsumexp_rowwise"
    )


def l2_normalize_rowwise(x: Node) -> Node:
    _require_matrix(x, "l2_normalize_rowwise")
    norms = np.maximum(np.linalg.norm(x.value, axis=1, keepdims=True), NORM_FLOOR)
    y = x.value / norms

    def _backward(g: Array):
        return ((g - y * np.sum(g * y, axis=1, keepdims=True)) / norms,)

    return _result(y, (x,), _backward, "l2_normalize_rowwise")


# Reverse pass


def _topological_order(root: Node) -> List[Node]:
    order: List[Node] = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(root: Node) -> None:
    """Accumulate d(root)/d(node) into ``grad`` of every reachable node.

    Adjoints of one call are summed over fan-out first and then added to
    the stored gradients, so repeated calls accumulate.
    """
    if root.value.size != 1:
        raise ContractError(f"backward needs a scalar root, got shape {root.shape}")
    if not root.requires_grad:
        return

    adjoints = {id(root): np.ones(root.shape)}
    for node in reversed(_topological_order(root)):
        g = adjoints.pop(id(node), None)
        if g is None:
            continue
        node.grad = node.grad + g
        if node._backward is None:
            continue
        for parent, parent_grad in zip(node.parents, node._backward(g)):
            if parent_grad is None or not parent.requires_grad:
                continue
            key = id(parent)
            adjoints[key] = adjoints[key] + parent_grad if key in adjoints else parent_grad
