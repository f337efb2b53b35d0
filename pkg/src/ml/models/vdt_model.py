"""Variational encoder, per-domain heads, variance gate, decoder and classifier.

The encoder trunk and decoder are single shared parameter sets; each domain path
owns its own mean and log-variance heads. All forward functions accept either
plain ``ModelParams`` (inference, no gradients) or a ``ParamBinding`` that wraps
chosen parameters as differentiable leaves.
"""

from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from src.autodiff import (
    Node,
    add_bias,
    as_node,
    constant,
    exp,
    matmul,
    mul,
    relu,
    scalar_mul,
    sigmoid,
    softmax_rowwise,
)
from src.autodiff import add as node_add
from src.core.exceptions import ContractError, ShapeError
from src.core.types import DomainPath

PARAMETER_GROUPS: Dict[str, Tuple[str, ...]] = {
    "encoder": ("encoder.",),
    "source_heads": ("source_mu.", "source_logvar."),
    "target_heads": ("target_mu.", "target_logvar."),
    "decoder": ("decoder.",),
    "classifier": ("classifier.",),
}

_HEADS = {DomainPath.SOURCE: "source", DomainPath.TARGET: "target"}


@dataclass(frozen=True)
class Architecture:
    input_dim: int
    encoder_hidden: Tuple[int, ...] = (64, 64)
    latent_dim: int = 128
    classifier_hidden: int = 500
    num_classes: int = 2

    def __post_init__(self):
        object.__setattr__(self, "encoder_hidden", tuple(int(w) for w in self.encoder_hidden))
        if self.input_dim < 1 or self.latent_dim < 1 or self.classifier_hidden < 1:
            raise ContractError("layer widths must be positive")
        if not self.encoder_hidden or min(self.encoder_hidden) < 1:
            raise ContractError("encoder needs at least one positive hidden width")

    def layer_dims(self) -> "OrderedDict[str, Tuple[int, int]]":
        """(fan_in, fan_out) of every dense layer in declaration order."""
        layers: "OrderedDict[str, Tuple[int, int]]" = OrderedDict()
        enc = (self.input_dim,) + self.encoder_hidden
        for i in range(len(enc) - 1):
            layers[f"encoder.{i}"] = (enc[i], enc[i + 1])
        for head in ("source_mu", "source_logvar", "target_mu", "target_logvar"):
            layers[head] = (self.encoder_hidden[-1], self.latent_dim)
        dec = (self.latent_dim,) + tuple(reversed(self.encoder_hidden)) + (self.input_dim,)
        for i in range(len(dec) - 1):
            layers[f"decoder.{i}"] = (dec[i], dec[i + 1])
        layers["classifier.0"] = (self.latent_dim, self.classifier_hidden)
        layers["classifier.1"] = (self.classifier_hidden, self.num_classes)
        return layers

    def tensor_shapes(self) -> "OrderedDict[str, Tuple[int, ...]]":
        shapes: "OrderedDict[str, Tuple[int, ...]]" = OrderedDict()
        for layer, (fan_in, fan_out) in self.layer_dims().items():
            shapes[f"{layer}.weight"] = (fan_in, fan_out)
            shapes[f"{layer}.bias"] = (fan_out,)
        return shapes

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["encoder_hidden"] = list(self.encoder_hidden)
        return data


class ModelParams:
    """All trainable tensors, addressed by name in declaration order."""

    def __init__(self, arch: Architecture, tensors: Dict[str, np.ndarray]):
        shapes = arch.tensor_shapes()
        if set(tensors) != set(shapes):
            missing = sorted(set(shapes) - set(tensors))
            extra = sorted(set(tensors) - set(shapes))
            raise ContractError(
                f"parameters do not match architecture: missing {missing}, unexpected {extra}"
            )
        for name, shape in shapes.items():
            if tuple(tensors[name].shape) != shape:
                raise ShapeError(f"{name}: expected {shape}, got {tensors[name].shape}")
        self.arch = arch
        self._tensors: "OrderedDict[str, np.ndarray]" = OrderedDict(
            (name, np.asarray(tensors[name], dtype=np.float64)) for name in shapes
        )

    @classmethod
    def initialize(cls, arch: Architecture, seed: int) -> "ModelParams":
        """Xavier-uniform weights from a seeded generator; zero biases.

        The target heads start as copies of the source heads, so both paths
        compute the same posterior until training separates them.
        """
        rng = np.random.default_rng(seed)
        tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
        for layer, (fan_in, fan_out) in arch.layer_dims().items():
            if layer.startswith("target_"):
                source = "source_" + layer[len("target_") :]
                tensors[f"{layer}.weight"] = tensors[f"{source}.weight"].copy()
                tensors[f"{layer}.bias"] = tensors[f"{source}.bias"].copy()
                continue
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            tensors[f"{layer}.weight"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            tensors[f"{layer}.bias"] = np.zeros(fan_out)
        return cls(arch, tensors)

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def names(self, groups: Optional[Iterable[str]] = None) -> List[str]:
        if groups is None:
            return list(self._tensors)
        prefixes = tuple(p for g in groups for p in PARAMETER_GROUPS[g])
        return [n for n in self._tensors if n.startswith(prefixes)]

    def items(self):
        return self._tensors.items()

    def update(self, new_values: Dict[str, np.ndarray]) -> None:
        """Replace tensors by name; arrays are swapped, never written in place."""
        for name, value in new_values.items():
            if name not in self._tensors:
                raise ContractError(f"unknown parameter {name}")
            if value.shape != self._tensors[name].shape:
                expected = self._tensors[name].shape
                raise ShapeError(f"{name}: update shape {value.shape} != {expected}")
            self._tensors[name] = value

    def copy(self) -> "ModelParams":
        return ModelParams(self.arch, {n: t.copy() for n, t in self._tensors.items()})

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self._tensors.values()))


class ParamBinding:
    """Leaf nodes for one forward/backward pass; only ``trainable`` ones get gradients."""

    def __init__(self, params: ModelParams, trainable: Iterable[str] = ()):
        self.params = params
        self.trainable = set(trainable)
        unknown = self.trainable - set(params.names())
        if unknown:
            raise ContractError(f"unknown trainable parameters {sorted(unknown)}")
        self._nodes: Dict[str, Node] = {}

    @property
    def arch(self) -> Architecture:
        return self.params.arch

    def __getitem__(self, name: str) -> Node:
        node = self._nodes.get(name)
        if node is None:
            node = Node(self.params[name], requires_grad=name in self.trainable, op=name)
            self._nodes[name] = node
        return node

    def gradients(self) -> Dict[str, np.ndarray]:
        """Gradient for every trainable tensor; untouched ones are zero."""
        grads = {}
        for name in self.params.names():
            if name in self.trainable:
                node = self._nodes.get(name)
                grads[name] = node.grad if node is not None else np.zeros_like(self.params[name])
        return grads


ParamsLike = Union[ModelParams, ParamBinding]


@dataclass
class LatentStats:
    """Posterior mean and log-variance for a batch."""

    mu: Node
    logvar: Node

    def __post_init__(self):
        if self.mu.shape != self.logvar.shape:
            raise ShapeError(f"mu {self.mu.shape} and logvar {self.logvar.shape} differ")


def _bind(params: ParamsLike) -> ParamBinding:
    return params if isinstance(params, ParamBinding) else ParamBinding(params)


def _dense(binding: ParamBinding, layer: str, x: Node) -> Node:
    return add_bias(matmul(x, binding[f"{layer}.weight"]), binding[f"{layer}.bias"])


def _mlp(binding: ParamBinding, prefix: str, n_layers: int, x: Node, relu_last: bool) -> Node:
    for i in range(n_layers):
        x = _dense(binding, f"{prefix}.{i}", x)
        if i < n_layers - 1 or relu_last:
            x = relu(x)
    return x


def _as_batch(X, width: int, what: str) -> Node:
    node = as_node(X)
    if node.value.ndim != 2 or node.shape[1] != width:
        raise ShapeError(f"{what}: expected batch x {width}, got {node.shape}")
    return node


def encode(params: ParamsLike, X, path: DomainPath) -> LatentStats:
    """Shared trunk, then the path's linear mean and log-variance heads."""
    binding = _bind(params)
    x = _as_batch(X, binding.arch.input_dim, "encode")
    h = _mlp(binding, "encoder", len(binding.arch.encoder_hidden), x, relu_last=True)
    head = _HEADS[path]
    return LatentStats(
        mu=_dense(binding, f"{head}_mu", h), logvar=_dense(binding, f"{head}_logvar", h)
    )


def gate_features(stats: LatentStats, use_gate: bool = True) -> Node:
    """F = mu * (1 - sigmoid(logvar)); with the gate disabled F = mu."""
    if not use_gate:
        return stats.mu
    # 1 - sigmoid(a) == sigmoid(-a), which stays accurate when logvar is large
    return mul(stats.mu, sigmoid(scalar_mul(stats.logvar, -1.0)))


def reparameterize(stats: LatentStats, rng: np.random.Generator) -> Node:
    """z = mu + exp(logvar / 2) * eps with fresh eps ~ N(0, I)."""
    eps = constant(rng.standard_normal(stats.mu.shape))
    sigma = exp(scalar_mul(stats.logvar, 0.5))
    return node_add(stats.mu, mul(sigma, eps))


def decode(params: ParamsLike, z) -> Node:
    binding = _bind(params)
    z = _as_batch(z, binding.arch.latent_dim, "decode")
    return _mlp(binding, "decoder", len(binding.arch.encoder_hidden) + 1, z, relu_last=False)


def classify(params: ParamsLike, F) -> Node:
    """Class probabilities, one row per sample."""
    binding = _bind(params)
    F = _as_batch(F, binding.arch.latent_dim, "classify")
    return softmax_rowwise(_mlp(binding, "classifier", 2, F, relu_last=False))


def predict(
    params: ParamsLike, X, path: DomainPath, use_gate: bool = True
) -> Tuple[np.ndarray, np.ndarray]:
    """Argmax labels (ties go to class 0) and probabilities."""
    probs = classify(params, gate_features(encode(params, X, path), use_gate)).value
    return np.argmax(probs, axis=1), np.array(probs)


def gated_features(params: ParamsLike, X, path: DomainPath, use_gate: bool = True) -> np.ndarray:
    return np.array(gate_features(encode(params, X, path), use_gate).value)
