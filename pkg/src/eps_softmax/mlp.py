"""A small fully connected ReLU network with manual backprop, plus its optimizer.

Weights are stored (fan_out, fan_in) so a layer computes x @ W.T + b. The
update rule is SGD with classical momentum and decoupled-from-nothing weight
decay folded into the gradient:

    v <- momentum * v + (grad + weight_decay * param)
    param <- param - lr * v

All updates happen in place for speed; callers that need snapshots should
copy. Identical seeds give bitwise identical parameters and trajectories in
single-threaded use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import make_rng
from .errors import ConfigError


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths from input to output, e.g. (8, 64, 64, 4), and an init seed."""

    layer_sizes: tuple[int, ...]
    init_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layer_sizes", tuple(int(s) for s in self.layer_sizes))
        if len(self.layer_sizes) < 2:
            raise ConfigError("need at least an input and an output layer")
        if any(s < 1 for s in self.layer_sizes):
            raise ConfigError("layer sizes must be positive")

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class OptimSpec:
    lr0: float = 0.01
    momentum: float = 0.9
    weight_decay: float = 1e-4
    clip_norm: float = 5.0
    epochs: int = 100
    batch_size: int = 128

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ConfigError("lr0 must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be nonnegative")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be positive")


@dataclass
class ParamSet:
    """Per-layer weights and biases; also the container for grads and velocity."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self):
        yield from self.weights
        yield from self.biases


@dataclass
class ForwardCache:
    params: ParamSet
    inputs: list[np.ndarray] = field(default_factory=list)
    preacts: list[np.ndarray] = field(default_factory=list)
    batch_size: int = 0


def init_params(spec: MlpSpec) -> ParamSet:
    """He-normal weights (std sqrt(2 / fan_in)) and zero biases."""
    rng = make_rng(spec.init_seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(spec.layer_sizes[:-1], spec.layer_sizes[1:]):
        weights.append(rng.standard_normal((fan_out, fan_in)) * math.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return ParamSet(weights, biases)


def zeros_like_params(params: ParamSet) -> ParamSet:
    return ParamSet(
        [np.zeros_like(w) for w in params.weights],
        [np.zeros_like(b) for b in params.biases],
    )


def forward(params: ParamSet, x) -> tuple[np.ndarray, ForwardCache]:
    """Logits for a batch plus the cache needed by backward."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D batch, got shape {a.shape}")
    if a.shape[1] != params.weights[0].shape[1]:
        raise ValueError(
            f"input dim {a.shape[1]} does not match first layer fan-in "
            f"{params.weights[0].shape[1]}"
        )
    cache = ForwardCache(params=params, batch_size=a.shape[0])
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.inputs.append(a)
        z = a @ w.T + b
        cache.preacts.append(z)
        a = z if i == last else np.maximum(z, 0.0)
    return a, cache


def backward(cache: ForwardCache, grad_logits: np.ndarray) -> ParamSet:
    """Exact parameter gradients given d(loss)/d(logits) for the same batch.

    Pass the gradient of the batch-mean loss to get batch-mean parameter
    gradients.
    """
    params = cache.params
    g = np.asarray(grad_logits, dtype=np.float64)
    if g.shape != cache.preacts[-1].shape:
        raise ValueError(
            f"grad_logits shape {g.shape} does not match cached logits "
            f"{cache.preacts[-1].shape}; stale cache?"
        )
    grads = ParamSet([None] * len(params.weights), [None] * len(params.biases))
    for i in range(len(params.weights) - 1, -1, -1):
        grads.weights[i] = g.T @ cache.inputs[i]
        grads.biases[i] = g.sum(axis=0)
        if i > 0:
            g = (g @ params.weights[i]) * (cache.preacts[i - 1] > 0.0)
    return grads


def clip_grad_norm(grads: ParamSet, max_norm: float = 5.0) -> tuple[ParamSet, float]:
    """Rescale all gradients in place if their global L2 norm exceeds max_norm.

    Returns the grads and the scale factor applied (1.0 when no clipping).
    """
    total = 0.0
    for g in grads.arrays():
        total += float((g * g).sum())
    norm = math.sqrt(total)
    scale = 1.0
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.arrays():
            g *= scale
    return grads, scale


def cosine_lr(epoch: int, total_epochs: int, lr0: float) -> float:
    """Half-cosine decay from lr0 at epoch 0 toward 0 at epoch total_epochs."""
    if not 0 <= epoch < total_epochs:
        raise ValueError(f"epoch {epoch} outside [0, {total_epochs})")
    return lr0 * 0.5 * (1.0 + math.cos(math.pi * epoch / total_epochs))


def sgd_step(
    params: ParamSet,
    grads: ParamSet,
    velocity: ParamSet,
    lr: float,
    momentum: float = 0.0,
    weight_decay: float = 0.0,
) -> tuple[ParamSet, ParamSet]:
    """One momentum-SGD update, in place; returns (params, velocity)."""
    for p, g, v in zip(params.arrays(), grads.arrays(), velocity.arrays()):
        v *= momentum
        v += g + weight_decay * p
        p -= lr * v
    return params, velocity


def evaluate(params: ParamSet, x, labels, max_k: int = 5) -> dict:
    """Top-1 accuracy and top-k error rates for k = 1..min(max_k, K).

    Ranking ties go to the lower class index, and top-k error is nonincreasing
    in k by construction.
    """
    y = np.asarray(labels)
    if y.size == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    logits, _ = forward(params, x)
    k_max = min(max_k, logits.shape[1])
    order = np.argsort(-logits, axis=1, kind="stable")
    rank = np.argmax(order == y[:, None], axis=1)  # position of the true label
    topk_errors = [float((rank >= k).mean()) for k in range(1, k_max + 1)]
    return {"top1_accuracy": 1.0 - topk_errors[0], "topk_errors": topk_errors}
