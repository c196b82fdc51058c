"""Trajectory segments: the unit of experience moved from actors to learner."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..features.schema import (
    GLOBAL_WIDTH,
    IMAGE_SIZE,
    MAX_UNITS,
    N_IMAGE_CHANNELS,
    UNIT_WIDTH,
)
from ..net.ops import N_HEADS
from .errors import LearnerError

WINDOW = 16  # LSTM time window carried per segment


@dataclass
class TrajectorySegment:
    """Up to WINDOW consecutive steps of one episode from one side.

    The target action label is stored in padded row space (index into the
    22-row unit tensor), matching the padded attention logits the learner
    recomputes. Behaviour probabilities are those of the sampled labels
    under the acting policy (for the target head: the attention probability
    of the chosen unit).
    """

    image: np.ndarray        # (T, C, S, S) float32
    units: np.ndarray        # (T, MAX_UNITS, UNIT_WIDTH) float32
    unit_mask: np.ndarray    # (T, MAX_UNITS) bool
    globals: np.ndarray      # (T, GLOBAL_WIDTH) float32
    masks: tuple             # 6 bool arrays, (T, head_width); target padded
    actions: np.ndarray      # (T, 6) int64
    behavior_probs: np.ndarray  # (T, 6) float32, each in (0, 1]
    rewards: np.ndarray      # (T,) float32
    values: np.ndarray       # (T,) float32: V(s_t) at sampling time
    dones: np.ndarray        # (T,) bool: s_{t+1} is terminal
    entry_h: np.ndarray      # (lstm_width,) float32
    entry_c: np.ndarray      # (lstm_width,) float32
    bootstrap: float         # V(s_T); must be 0 when dones[-1]
    version: int = 0         # producing-model version
    timestamp: float = 0.0   # generation time (unix seconds)
    side: int = 0

    def __post_init__(self):
        T = self.rewards.shape[0]
        if not 1 <= T <= WINDOW:
            raise LearnerError(f"segment length {T} outside 1..{WINDOW}")
        shapes = {
            "image": (T, N_IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE),
            "units": (T, MAX_UNITS, UNIT_WIDTH),
            "unit_mask": (T, MAX_UNITS),
            "globals": (T, GLOBAL_WIDTH),
            "actions": (T, N_HEADS),
            "behavior_probs": (T, N_HEADS),
            "values": (T,),
            "dones": (T,),
        }
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise LearnerError(f"segment field {name}: {got} != {want}")
        if len(self.masks) != N_HEADS:
            raise LearnerError("segment needs one mask per action head")
        if np.any(self.behavior_probs <= 0) or np.any(self.behavior_probs > 1):
            raise LearnerError("behavior probabilities must be in (0, 1]")
        if self.dones[-1] and self.bootstrap != 0.0:
            raise LearnerError("terminal segment must have zero bootstrap")

    @property
    def length(self) -> int:
        return int(self.rewards.shape[0])

    def nbytes(self) -> int:
        arrays = [self.image, self.units, self.unit_mask, self.globals,
                  self.actions, self.behavior_probs, self.rewards,
                  self.values, self.dones, self.entry_h, self.entry_c,
                  *self.masks]
        return int(sum(a.nbytes for a in arrays))


@dataclass
class SegmentBatch:
    """Padded stack of segments plus per-step validity, learner-ready."""

    image: np.ndarray        # (B, T, C, S, S)
    units: np.ndarray
    unit_mask: np.ndarray
    globals: np.ndarray
    masks: tuple             # 6 arrays (B, T, width)
    actions: np.ndarray      # (B, T, 6)
    behavior_probs: np.ndarray
    advantages: np.ndarray   # (B, T) float64
    returns: np.ndarray      # (B, T) float64
    entry_h: np.ndarray      # (B, H)
    entry_c: np.ndarray
    step_mask: np.ndarray    # (B, T) bool: real (non-padding) steps

    @property
    def n_steps(self) -> int:
        return int(self.step_mask.sum())

    def split(self, k: int) -> list["SegmentBatch"]:
        """Split by segment index into k contiguous near-equal shards."""
        B = self.image.shape[0]
        if not 1 <= k <= B:
            raise LearnerError(f"cannot split batch of {B} into {k} shards")
        bounds = np.linspace(0, B, k + 1).astype(int)
        out = []
        for lo, hi in zip(bounds, bounds[1:]):
            out.append(SegmentBatch(
                self.image[lo:hi], self.units[lo:hi], self.unit_mask[lo:hi],
                self.globals[lo:hi], tuple(m[lo:hi] for m in self.masks),
                self.actions[lo:hi], self.behavior_probs[lo:hi],
                self.advantages[lo:hi], self.returns[lo:hi],
                self.entry_h[lo:hi], self.entry_c[lo:hi],
                self.step_mask[lo:hi]))
        return out
