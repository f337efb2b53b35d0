"""Training objectives.

Every function takes and returns autodiff ``Node`` objects so the combined
objective can be differentiated in one backward pass.
"""

from dataclasses import dataclass

import numpy as np

from src.autodiff import (
    Node,
    add,
    as_node,
    clip,
    concat_rows,
    constant,
    exp,
    l2_normalize_rowwise,
    log,
    logsumexp_rowwise,
    matmul,
    mean,
    mul,
    scalar_mul,
    square,
    sub,
    transpose,
)
from src.autodiff import sum as node_sum
from src.core.exceptions import ConfigError, ContractError, ShapeError
from src.core.types import Label
from src.ml.models.vdt_model import LatentStats

PROB_FLOOR = 1e-12
_SELF_MASK = -1e9


@dataclass(frozen=True)
class LossWeights:
    lambda1: float = 2.0
    lambda2: float = 0.5
    lambda3: float = 1.0
    beta: float = 1.5
    tau: float = 0.5

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")

    @classmethod
    def from_config(cls, config) -> "LossWeights":
        return cls(config.lambda1, config.lambda2, config.lambda3, config.beta, config.tau)


def diva_loss(mu_s, mu_t, tau: float) -> Node:
    """Symmetric InfoNCE over the 2N union of source and target means.

    Row i of ``mu_s`` and row i of ``mu_t`` form a positive pair; every other
    row in the union is a negative. Similarity is cosine over ``tau``.
    """
    mu_s, mu_t = as_node(mu_s), as_node(mu_t)
    if mu_s.shape != mu_t.shape:
        raise ShapeError(f"diva_loss: {mu_s.shape} and {mu_t.shape} differ")
    n = mu_s.shape[0]
    if n < 2:
        raise ContractError("diva_loss needs at least two pairs for negatives")
    if not tau > 0:
        raise ContractError(f"tau must be positive, got {tau}")

    z = l2_normalize_rowwise(concat_rows(mu_s, mu_t))
    sims = scalar_mul(matmul(z, transpose(z)), 1.0 / tau)

    self_mask = np.eye(2 * n) * _SELF_MASK
    positives = np.zeros((2 * n, 2 * n))
    positives[np.arange(n), np.arange(n) + n] = 1.0
    positives[np.arange(n) + n, np.arange(n)] = 1.0

    log_denominators = logsumexp_rowwise(add(sims, constant(self_mask)))
    positive_logits = node_sum(mul(sims, constant(positives)))
    return scalar_mul(sub(node_sum(log_denominators), positive_logits), 1.0 / (2 * n))


def mse_loss(X, Xhat) -> Node:
    X, Xhat = as_node(X), as_node(Xhat)
    if X.shape != Xhat.shape:
        raise ShapeError(f"mse_loss: {X.shape} and {Xhat.shape} differ")
    return mean(square(sub(Xhat, X)))


def recon_loss(X_s, Xhat_s, X_t, Xhat_t) -> Node:
    """Per-element mean squared error of each domain, summed over domains."""
    return add(mse_loss(X_s, Xhat_s), mse_loss(X_t, Xhat_t))


def kl_divergence(stats: LatentStats) -> Node:
    """KL(N(mu, sigma^2) || N(0, I)): summed over latent dims, averaged over the batch."""
    mu, logvar = stats.mu, stats.logvar
    batch = mu.shape[0]
    per_entry = sub(add(square(mu), exp(logvar)), logvar)
    total = sub(node_sum(per_entry), constant(float(per_entry.value.size)))
    return scalar_mul(total, 0.5 / batch)


def kl_loss(*stats: LatentStats) -> Node:
    """KL regulariser averaged over the given domains."""
    if not stats:
        raise ContractError("kl_loss needs at least one set of latent stats")
    total = kl_divergence(stats[0])
    for s in stats[1:]:
        total = add(total, kl_divergence(s))
    return scalar_mul(total, 1.0 / len(stats))


def dcc_loss(recon, kl, beta: float) -> Node:
    return add(as_node(recon), scalar_mul(as_node(kl), beta))


def cls_loss(probs, labels) -> Node:
    """Mean binary cross-entropy against class-1 probability."""
    probs = as_node(probs)
    y = np.asarray(labels)
    if probs.value.ndim != 2 or probs.shape[1] != 2 or probs.shape[0] != len(y):
        raise ShapeError(f"cls_loss: probabilities {probs.shape} do not match {len(y)} labels")
    if np.any(y == Label.UNKNOWN):
        raise ContractError("cls_loss: UNKNOWN labels cannot be scored")
    if not np.isin(y, (Label.PRISTINE, Label.OUT_OF_CONTEXT)).all():
        raise ContractError("cls_loss: labels must be 0 or 1")

    onehot = np.zeros(probs.shape)
    onehot[np.arange(len(y)), y.astype(np.int64)] = 1.0
    log_p = log(clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR))
    return scalar_mul(node_sum(mul(log_p, constant(onehot))), -1.0 / len(y))


def total_loss(cls, diva, dcc, weights: LossWeights) -> Node:
    combined = scalar_mul(as_node(cls), weights.lambda1)
    if weights.lambda2 != 0.0:
        combined = add(combined, scalar_mul(as_node(diva), weights.lambda2))
    if weights.lambda3 != 0.0:
        combined = add(combined, scalar_mul(as_node(dcc), weights.lambda3))
    return combined


def ttt_loss(cls_pseudo, dcc) -> Node:
    return add(as_node(cls_pseudo), as_node(dcc))
