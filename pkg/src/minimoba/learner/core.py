"""Learner orchestration: batch preparation, shard gradients, updates.

The learner owns a float64 master copy of the parameters and a float64
network for gradient computation; actors receive float32 snapshots. Shards
are independent gradient computations over a split of one prepared batch,
merged by plain averaging — so a 2-shard update and the single-shard
full-batch update agree to float64 rounding.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import torch

from ..net.model import MobaNet, NetConfig, init_params
from ..net.params import Params
from .adam import AdamState, adam_step, average_gradients
from .errors import LearnerError
from .gae import gae
from .ppo import PPOConfig, ppo_loss
from .segment import SegmentBatch, TrajectorySegment


@dataclass
class Learner:
    net: MobaNet
    master: np.ndarray          # float64 flat parameters
    adam: AdamState
    config: PPOConfig
    net_config: NetConfig
    version: int = 0
    updates: int = 0

    def snapshot(self) -> Params:
        """Float32 view of the master parameters for actors/checkpoints."""
        return Params(self.master.astype(np.float32), self.net.layout,
                      version=self.version)


def make_learner(net_config: NetConfig = NetConfig(),
                 config: PPOConfig = PPOConfig(), seed: int = 0) -> Learner:
    net = MobaNet(net_config, dtype=torch.float64)
    params = init_params(net_config, seed)
    master = params.data.astype(np.float64)
    net.load_flat_array(master)
    return Learner(net, master, AdamState.zeros(master.shape[0]),
                   config, net_config)


def prepare_batch(segments: list[TrajectorySegment],
                  config: PPOConfig) -> SegmentBatch:
    """GAE per segment, pad to the longest window, normalize advantages.

    Normalization happens here, over the whole batch, so that splitting the
    prepared batch into shards cannot change the advantages.
    """
    if not segments:
        raise LearnerError("prepare_batch: empty segment list")
    B = len(segments)
    T = max(s.length for s in segments)
    first = segments[0]
    H = first.entry_h.shape[0]

    def padded(shape, dtype, fill=0):
        a = np.full((B, T) + shape, fill, dtype=dtype)
        return a

    image = padded(first.image.shape[1:], np.float32)
    units = padded(first.units.shape[1:], np.float32)
    unit_mask = padded(first.unit_mask.shape[1:], bool)
    globals_ = padded(first.globals.shape[1:], np.float32)
    masks = tuple(padded(m.shape[1:], bool) for m in first.masks)
    actions = padded((first.actions.shape[1],), np.int64)
    behavior = padded((first.behavior_probs.shape[1],), np.float64, fill=1.0)
    advantages = padded((), np.float64)
    returns = padded((), np.float64)
    step_mask = padded((), bool)
    entry_h = np.zeros((B, H), dtype=np.float32)
    entry_c = np.zeros((B, H), dtype=np.float32)

    for b, seg in enumerate(segments):
        n = seg.length
        image[b, :n] = seg.image
        units[b, :n] = seg.units
        unit_mask[b, :n] = seg.unit_mask
        globals_[b, :n] = seg.globals
        for mi in range(len(masks)):
            masks[mi][b, :n] = seg.masks[mi]
        actions[b, :n] = seg.actions
        behavior[b, :n] = seg.behavior_probs
        adv, ret = gae(seg.rewards, seg.values, seg.bootstrap, seg.dones,
                       config.gamma, config.lam)
        advantages[b, :n] = adv
        returns[b, :n] = ret
        step_mask[b, :n] = True
        entry_h[b] = seg.entry_h
        entry_c[b] = seg.entry_c

    if config.normalize_advantages:
        sel = advantages[step_mask]
        advantages[step_mask] = (sel - sel.mean()) / (sel.std() + 1e-8)

    return SegmentBatch(image, units, unit_mask, globals_, masks, actions,
                        behavior, advantages, returns, entry_h, entry_c,
                        step_mask)


def shard_gradient(learner: Learner, shard: SegmentBatch):
    """Mean loss gradient over one shard, as a float64 flat vector."""
    learner.net.zero_grad(set_to_none=True)
    loss, diag = ppo_loss(learner.net, shard, learner.config)
    loss.backward()
    return learner.net.flat_gradient(), diag


def _merge_diagnostics(diags, weights):
    total = sum(weights)
    out = {}
    for key in diags[0]:
        if key == "steps":
            out[key] = int(sum(d[key] for d in diags))
        else:
            out[key] = float(sum(d[key] * w for d, w in zip(diags, weights))
                             / total)
    return out


def learner_update(learner: Learner, segments: list[TrajectorySegment],
                   n_shards: int = 1) -> dict:
    """One optimization step: shard gradients, average, Adam, new version."""
    batch = prepare_batch(segments, learner.config)
    shards = batch.split(n_shards)
    grads, diags = [], []
    for shard in shards:
        g, d = shard_gradient(learner, shard)
        grads.append(g)
        diags.append(d)
    grad = average_gradients(grads)
    learner.master = adam_step(learner.master, grad, learner.adam,
                               lr=learner.config.learning_rate)
    learner.net.load_flat_array(learner.master)
    learner.version += 1
    learner.updates += 1
    diag = _merge_diagnostics(diags, [d["steps"] for d in diags])
    diag.update({
        "grad_norm": float(np.linalg.norm(grad)),
        "version": learner.version,
        "time": time.time(),
    })
    return diag


def train_on_batch(learner: Learner, segments: list[TrajectorySegment],
                   n_shards: int = 1) -> dict:
    """Epochs × minibatches of updates over one sampled batch."""
    mb = learner.config.minibatch_size
    last = {}
    for _ in range(learner.config.epochs):
        for lo in range(0, len(segments), mb):
            chunk = segments[lo:lo + mb]
            if len(chunk) < n_shards:
                continue
            last = learner_update(learner, chunk, n_shards)
    return last
