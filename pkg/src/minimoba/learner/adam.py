"""Adam optimizer on the flat parameter vector, and shard-mean gradients.

All state is float64 numpy so that a shard-split update and the equivalent
full-batch update agree to well below 1e-8 per parameter.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LearnerError


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n, dtype=np.float64), np.zeros(n, dtype=np.float64))


def adam_step(params: np.ndarray, gradients: np.ndarray, state: AdamState,
              lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> np.ndarray:
    """One bias-corrected Adam step; mutates `state`, returns new params."""
    g = np.asarray(gradients, dtype=np.float64)
    p = np.asarray(params, dtype=np.float64)
    if g.shape != p.shape or g.shape != state.m.shape:
        raise LearnerError(
            f"adam_step: params {p.shape}, gradients {g.shape}, "
            f"state {state.m.shape} must agree")
    if not np.isfinite(g).all():
        raise LearnerError("adam_step: non-finite gradient")
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * g
    state.v = beta2 * state.v + (1.0 - beta2) * g * g
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = state.v / (1.0 - beta2 ** state.t)
    return p - lr * m_hat / (np.sqrt(v_hat) + eps)


def average_gradients(shard_gradients) -> np.ndarray:
    """Element-wise arithmetic mean across shards (float64, fixed order)."""
    grads = [np.asarray(g, dtype=np.float64) for g in shard_gradients]
    if not grads:
        raise LearnerError("average_gradients: no shards")
    n = grads[0].shape
    if any(g.shape != n for g in grads):
        raise LearnerError(
            f"average_gradients: shard lengths differ: "
            f"{[g.shape for g in grads]}")
    total = np.zeros_like(grads[0])
    for g in grads:  # fixed left-to-right summation order
        total += g
    return total / len(grads)
