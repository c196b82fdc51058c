"""Distribution ops used on the acting side: masked softmax and sampling.

These run in numpy (no autodiff) because actors and evaluators call them per
tick. The differentiable twin of the masking trick lives in the model, which
substitutes a large negative constant before ``log_softmax``; here masked
probabilities are *exactly* zero by construction.
"""
from __future__ import annotations

import numpy as np

from ..rng import Rng
from .errors import NetError

HEAD_NAMES = ("button", "move_x", "move_y", "offset_x", "offset_y", "target")
N_HEADS = len(HEAD_NAMES)


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over the unmasked entries; masked entries get exactly 0."""
    logits = np.asarray(logits, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if logits.shape != mask.shape or logits.ndim != 1:
        raise NetError(
            f"masked_softmax: logits {logits.shape} vs mask {mask.shape}")
    if not mask.any():
        raise NetError("masked_softmax: every entry is masked")
    out = np.zeros(logits.shape[0], dtype=np.float64)
    sel = logits[mask]
    ex = np.exp(sel - sel.max())
    out[mask] = ex / ex.sum()
    return out


def target_attention(query, keys):
    """Attention logits = keys · query, one dot product per unit.

    Works on numpy arrays and torch tensors alike (only ``@`` and shape
    checks are used), so the same definition serves sampling and training.
    """
    if getattr(keys, "ndim", None) != 2 or getattr(query, "ndim", None) != 1:
        raise NetError("target_attention: keys must be 2-D and query 1-D")
    if keys.shape[1] != query.shape[0]:
        raise NetError(
            f"target_attention: key width {keys.shape[1]} != "
            f"query width {query.shape[0]}")
    return keys @ query


def head_masks(obs) -> tuple[np.ndarray, ...]:
    """Per-head boolean masks for an Observation, in HEAD_NAMES order.

    The target mask is restricted to valid unit rows so it aligns with the
    attention logits (one per unit_registry slot).
    """
    legal = obs.legal
    return (legal.button, legal.move_x, legal.move_y,
            legal.offset_x, legal.offset_y, legal.target[obs.unit_mask])


def sample_categorical(probs: np.ndarray, rng: Rng) -> int:
    """Inverse-CDF draw from a probability vector. Zero entries never win."""
    legal = np.flatnonzero(probs)
    cdf = np.cumsum(probs[legal])
    i = int(np.searchsorted(cdf, rng.uniform(), side="right"))
    return int(legal[min(i, len(legal) - 1)])


def sample_action(logits_by_head, masks_by_head, rng: Rng,
                  temperature: float = 1.0):
    """Draw one label per head independently (Boltzmann at `temperature`).

    Returns ``(labels, probs)`` where labels is one chosen index per head in
    HEAD_NAMES order and probs[i] is the behaviour probability of labels[i]
    under the sampling distribution (1.0 in the greedy temperature=0 limit).
    """
    if temperature < 0:
        raise NetError("sample_action: temperature must be >= 0")
    if len(logits_by_head) != N_HEADS or len(masks_by_head) != N_HEADS:
        raise NetError(f"sample_action: expected {N_HEADS} heads")
    labels = []
    probs = np.empty(N_HEADS, dtype=np.float64)
    for i, (logits, mask) in enumerate(zip(logits_by_head, masks_by_head)):
        if temperature == 0.0:
            p = masked_softmax(np.asarray(logits, dtype=np.float64), mask)
            lab = int(np.argmax(p))
            labels.append(lab)
            probs[i] = 1.0
        else:
            p = masked_softmax(
                np.asarray(logits, dtype=np.float64) / temperature, mask)
            lab = sample_categorical(p, rng)
            labels.append(lab)
            probs[i] = p[lab]
    return tuple(labels), probs


def rng_uniforms(rng: Rng, n: int) -> np.ndarray:
    """n uniform [0,1) draws from the deterministic stream as an array."""
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = rng.uniform()
    return out


def sample_categorical_bulk(probs: np.ndarray, n: int, rng: Rng) -> np.ndarray:
    """n independent draws from one probability vector (vectorized)."""
    legal = np.flatnonzero(probs)
    cdf = np.cumsum(probs[legal])
    idx = np.searchsorted(cdf, rng_uniforms(rng, n), side="right")
    return legal[np.minimum(idx, len(legal) - 1)]
