"""The eps-softmax transform: amplify the winning probability, renormalize.

Adding m to the largest softmax probability and dividing everything by m + 1
pulls the output within sqrt(1 - 1/K) / (m + 1) of a one-hot vector while
preserving the argmax. m = 0 leaves the softmax output untouched; growing m
lets the output approximate a hard one-hot decision as closely as desired
while the map stays differentiable almost everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import softmax_rows, stable_softmax
from .errors import ConfigError


@dataclass(frozen=True)
class EpsConfig:
    """Transform hyperparameters. Argmax ties always go to the lowest index."""

    m: float = 0.0
    tie_break: str = "lowest_index"

    def __post_init__(self):
        if self.m < 0:
            raise ConfigError("m must be nonnegative")
        if self.tie_break != "lowest_index":
            raise ConfigError(f"unsupported tie_break rule: {self.tie_break!r}")


def _amplification(cfg) -> float:
    if isinstance(cfg, EpsConfig):
        return cfg.m
    m = float(cfg)
    if m < 0:
        raise ConfigError("m must be nonnegative")
    return m


def eps_softmax(logits, cfg: EpsConfig | float = 0.0) -> np.ndarray:
    """Softmax, then add m to the largest probability and divide all by m + 1."""
    return eps_transform_probs(stable_softmax(logits), _amplification(cfg))


def eps_transform_probs(p, m: float) -> np.ndarray:
    """Apply the amplification step to an existing probability vector."""
    arr = np.asarray(p, dtype=np.float64)
    t = int(np.argmax(arr))  # first occurrence: lowest index wins ties
    out = arr / (m + 1.0)
    out[t] = (arr[t] + m) / (m + 1.0)
    return out


def eps_softmax_rows(logits: np.ndarray, m: float) -> np.ndarray:
    """Batched transform over rows of logits. No input validation."""
    p = softmax_rows(logits)
    t = np.argmax(p, axis=1)
    out = p / (m + 1.0)
    rows = np.arange(p.shape[0])
    out[rows, t] = (p[rows, t] + m) / (m + 1.0)
    return out


def eps_bound(n_classes: int, m: float) -> float:
    """Worst-case distance from the transformed output to the one-hot set."""
    if n_classes < 2:
        raise ConfigError("need at least 2 classes")
    if m < 0:
        raise ConfigError("m must be nonnegative")
    return math.sqrt(1.0 - 1.0 / n_classes) / (m + 1.0)


def distance_to_one_hot(p) -> float:
    """Distance from a probability vector to the nearest one-hot vector.

    The nearest vertex is the one at the argmax, so the squared distance
    collapses to 1 - 2 p_t + sum(p^2).
    """
    # delegate so the scalar and row forms share one reduction order: the
    # squared term cancels almost completely near a vertex, where even a
    # one-ulp summation difference is visible after the square root
    arr = np.asarray(p, dtype=np.float64)
    return float(distances_to_one_hot_rows(arr[None, :])[0])


def distances_to_one_hot_rows(p: np.ndarray) -> np.ndarray:
    """Row-wise distance_to_one_hot for a batch of probability vectors."""
    pt = p.max(axis=1)
    sq = 1.0 - 2.0 * pt + np.einsum("ij,ij->i", p, p)
    return np.sqrt(np.maximum(sq, 0.0))
