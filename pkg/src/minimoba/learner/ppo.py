"""Decoupled multi-label dual-clip PPO objective.

Six action heads (button, move bins, offset bins, target unit) contribute
independent probability ratios that all share the same per-step advantage.
Each ratio term is dual-clipped: the usual clipped surrogate, plus a lower
bound of c*advantage when the advantage is negative so a stale sample cannot
push the objective arbitrarily far down.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..net.model import LOGIT_MASK_VALUE, MobaNet
from ..net.ops import HEAD_NAMES
from .errors import LearnerError
from .segment import SegmentBatch


@dataclass(frozen=True)
class PPOConfig:
    gamma: float = 0.997
    lam: float = 0.95
    clip_eps: float = 0.2
    dual_clip: float = 3.0
    learning_rate: float = 1e-4
    minibatch_size: int = 64
    epochs: int = 1
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    normalize_advantages: bool = True
    # heads excluded from the policy/entropy objective (value still trains);
    # their zero-initialized parameters then never move, leaving them as
    # uniform-over-legal samplers — the ablation arms rely on this
    disabled_heads: tuple = ()

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise LearnerError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0 <= self.lam <= 1:
            raise LearnerError(f"lambda must be in [0, 1], got {self.lam}")
        if not 0 < self.clip_eps < 1:
            raise LearnerError(
                f"clip epsilon must be in (0, 1), got {self.clip_eps}")
        if self.dual_clip <= 1:
            raise LearnerError(
                f"dual clip bound must exceed 1, got {self.dual_clip}")
        if self.learning_rate <= 0 or self.minibatch_size < 1 or self.epochs < 1:
            raise LearnerError("learning rate / minibatch / epochs invalid")
        if self.value_coef < 0 or self.entropy_coef < 0:
            raise LearnerError("loss coefficients must be non-negative")
        for name in self.disabled_heads:
            if name not in HEAD_NAMES:
                raise LearnerError(f"unknown head {name!r} in disabled_heads")


def dual_clip_term(r: float, adv: float, eps: float = 0.2,
                   c: float = 3.0) -> float:
    """Per-sample objective term (to be maximized) for one head's ratio."""
    clipped = min(max(r, 1.0 - eps), 1.0 + eps)
    standard = min(r * adv, clipped * adv)
    if adv >= 0:
        return standard
    return max(standard, c * adv)


def dual_clip_terms(ratio: torch.Tensor, adv: torch.Tensor, eps: float,
                    c: float) -> torch.Tensor:
    """Vectorized twin of :func:`dual_clip_term` on torch tensors."""
    standard = torch.minimum(ratio * adv,
                             ratio.clamp(1.0 - eps, 1.0 + eps) * adv)
    return torch.where(adv < 0, torch.maximum(standard, c * adv), standard)


def ppo_loss(net: MobaNet, batch: SegmentBatch, config: PPOConfig):
    """Scalar loss (minimized) and per-head diagnostics for one batch.

    Means run over valid (non-padding) steps. Behaviour probabilities of
    zero are rejected: they cannot arise from legal Boltzmann sampling and
    would make the importance ratio unbounded.
    """
    if np.any(batch.behavior_probs[batch.step_mask] <= 0):
        raise LearnerError("zero behavior probability in batch")
    dt = next(net.parameters()).dtype
    as_t = lambda a: torch.from_numpy(np.ascontiguousarray(a)).to(dt)

    step_mask = torch.from_numpy(batch.step_mask)
    n_steps = int(batch.step_mask.sum())
    out, _ = net.unroll(
        as_t(batch.image), as_t(batch.units),
        torch.from_numpy(batch.unit_mask), as_t(batch.globals),
        (as_t(batch.entry_h), as_t(batch.entry_c)))

    # advantages arrive normalized (if configured) from prepare_batch, so a
    # shard sees exactly the values the full batch would
    adv = as_t(batch.advantages)

    def masked_mean(t):
        return t[step_mask].sum() / n_steps

    policy_term = 0.0
    entropy_term = 0.0
    diag = {}
    actions = torch.from_numpy(batch.actions)
    behavior = as_t(batch.behavior_probs)
    for i, name in enumerate(HEAD_NAMES):
        if name in config.disabled_heads:
            continue
        logits = getattr(out, name)
        mask = torch.from_numpy(batch.masks[i])
        logp_all = torch.log_softmax(
            logits.masked_fill(~mask, LOGIT_MASK_VALUE), dim=-1)
        logp = logp_all.gather(-1, actions[..., i:i + 1]).squeeze(-1)
        ratio = torch.exp(logp - torch.log(behavior[..., i]))
        policy_term = policy_term + masked_mean(
            dual_clip_terms(ratio, adv, config.clip_eps, config.dual_clip))
        p = logp_all.exp()
        entropy = -(p * logp_all.masked_fill(~mask, 0.0)).sum(-1)
        entropy_term = entropy_term + masked_mean(entropy)
        with torch.no_grad():
            clipped = ((ratio < 1 - config.clip_eps)
                       | (ratio > 1 + config.clip_eps)) & step_mask
            diag[f"clip_fraction/{name}"] = float(clipped.sum()) / n_steps
            diag[f"mean_ratio/{name}"] = float(masked_mean(ratio))
            diag[f"entropy/{name}"] = float(masked_mean(entropy))

    value_loss = masked_mean((out.value - as_t(batch.returns)) ** 2)
    loss = (-policy_term + config.value_coef * value_loss
            - config.entropy_coef * entropy_term)
    diag.update({
        "loss": float(loss.detach()), "policy_term": float(policy_term.detach()),
        "value_loss": float(value_loss.detach()),
        "entropy": float(entropy_term.detach()),
        "advantage_mean": float(batch.advantages[batch.step_mask].mean()),
        "steps": n_steps,
    })
    return loss, diag
