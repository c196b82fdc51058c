"""Desk-scale MOBA 1v1 self-play reinforcement learning stack.

Subpackages:
  env      -- deterministic grid MOBA simulator (heroes, creeps, turrets, bases)
  features -- observation extraction: image planes, per-unit vectors, global vector
  net      -- actor-critic network with target attention, action masking and LSTM
  learner  -- GAE, decoupled multi-label dual-clip PPO, Adam, gradient averaging
  runtime  -- actors, dispatch packing, memory-pool service, model synchronization
  eval     -- Elo tournaments, time-to-defeat and ablation harness
  cli      -- train / eval / ablate / plot / bench entry points
"""

__version__ = "0.1.0"
