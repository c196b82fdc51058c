"""GAE, decoupled dual-clip PPO, Adam, and shard-averaged updates."""
from .errors import LearnerError
from .gae import gae
from .segment import SegmentBatch, TrajectorySegment, WINDOW
from .ppo import PPOConfig, dual_clip_term, dual_clip_terms, ppo_loss
from .adam import AdamState, adam_step, average_gradients
from .core import (
    Learner,
    learner_update,
    make_learner,
    prepare_batch,
    shard_gradient,
    train_on_batch,
)

__all__ = [
    "AdamState",
    "Learner",
    "LearnerError",
    "PPOConfig",
    "SegmentBatch",
    "TrajectorySegment",
    "WINDOW",
    "adam_step",
    "average_gradients",
    "dual_clip_term",
    "dual_clip_terms",
    "gae",
    "learner_update",
    "make_learner",
    "ppo_loss",
    "prepare_batch",
    "shard_gradient",
    "train_on_batch",
]
