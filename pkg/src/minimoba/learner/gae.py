"""Generalized advantage estimation over one trajectory segment."""
from __future__ import annotations

import numpy as np

from .errors import LearnerError


def gae(rewards, values, bootstrap: float, dones, gamma: float,
        lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and returns for a segment, truncated with a bootstrap.

    delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t), where
    V(s_{t+1}) is values[t+1] inside the segment and `bootstrap` past its
    end. Advantages accumulate deltas backwards with factor gamma*lam,
    cut at done steps; returns_t = adv_t + V(s_t). All math is float64.
    """
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    d = np.asarray(dones, dtype=bool)
    if not (r.shape == v.shape == d.shape) or r.ndim != 1 or r.shape[0] < 1:
        raise LearnerError(
            f"gae: need equal-length 1-D sequences of length >= 1, got "
            f"rewards {r.shape}, values {v.shape}, dones {d.shape}")
    T = r.shape[0]
    adv = np.empty(T, dtype=np.float64)
    next_value = float(bootstrap)
    acc = 0.0
    for t in range(T - 1, -1, -1):
        live = 0.0 if d[t] else 1.0
        delta = r[t] + gamma * next_value * live - v[t]
        acc = delta + gamma * lam * live * acc
        adv[t] = acc
        next_value = v[t]
    return adv, adv + v
