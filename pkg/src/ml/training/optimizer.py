"""Adam with bias correction over named parameter tensors."""

from dataclasses import dataclass, field
from typing import Dict, Iterable

import numpy as np

from src.core.exceptions import ShapeError
from src.ml.models.vdt_model import ModelParams


@dataclass
class OptimState:
    """First/second moment accumulators keyed by parameter name."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams, names: Iterable[str]) -> "OptimState":
        names = list(names)
        return cls(
            m={n: np.zeros_like(params[n]) for n in names},
            v={n: np.zeros_like(params[n]) for n in names},
        )


def adam_step(
    params: ModelParams,
    grads: Dict[str, np.ndarray],
    state: OptimState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One Adam update of every tensor named in ``grads``; increments ``state.step``."""
    state.step += 1
    t = state.step
    correction1 = 1.0 - beta1**t
    correction2 = 1.0 - beta2**t

    updated = {}
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ShapeError(
                f"gradient for {name} has shape {g.shape}, expected {params[name].shape}"
            )
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        state.m[name] = beta1 * m + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g * g

        m_hat = state.m[name] / correction1
        v_hat = state.v[name] / correction2
        updated[name] = params[name] - lr * m_hat / (np.sqrt(v_hat) + eps)

    params.update(updated)


class AdamOptimizer:
    """Binds Adam hyperparameters and state to a fixed subset of parameters."""

    def __init__(
        self,
        params: ModelParams,
        names: Iterable[str],
        lr: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.names = list(names)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = OptimState.zeros_like(params, self.names)

    @classmethod
    def from_config(
        cls, params: ModelParams, names: Iterable[str], lr: float, config
    ) -> "AdamOptimizer":
        return cls(params, names, lr, config.adam_beta1, config.adam_beta2, config.adam_eps)

    def step(self, grads: Dict[str, np.ndarray]) -> None:
        adam_step(
            self.params,
            {n: grads[n] for n in self.names},
            self.state,
            self.lr,
            self.beta1,
            self.beta2,
            self.eps,
        )
