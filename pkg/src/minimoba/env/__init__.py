"""Deterministic grid MOBA 1v1 simulator.

One tick is one decision step (nominally 133 ms of game time, used only for
time reporting). All unit quantities are integers; the only floating point
in this package is reward computation, which is exact zero-sum by
construction (``final_i = raw_i - raw_opponent``).
"""
from .types import (
    ActionCommand,
    Button,
    HeroState,
    RewardWeights,
    ScoreState,
    UnitKind,
    UnitState,
    WorldState,
)
from .gamemap import GameMap, MapError, load_map, parse_map, DEFAULT_MAP_TEXT
from .heroes import HeroArchetype, hero_archetype, SKILL_BUTTONS
from .world import (
    EnvConfig,
    EnvError,
    MobaEnv,
    compass_step,
    observable_units,
    state_digest,
    swap_sides,
)
from .reward import RewardComponents, compute_reward, reward_components
from .mask import ActionMask, legal_action_mask, action_is_legal
from .bot import scripted_bot_action, random_bot_action

__all__ = [
    "ActionCommand",
    "ActionMask",
    "Button",
    "DEFAULT_MAP_TEXT",
    "EnvConfig",
    "EnvError",
    "GameMap",
    "HeroArchetype",
    "HeroState",
    "MapError",
    "MobaEnv",
    "RewardComponents",
    "RewardWeights",
    "ScoreState",
    "SKILL_BUTTONS",
    "UnitKind",
    "UnitState",
    "WorldState",
    "action_is_legal",
    "compass_step",
    "compute_reward",
    "hero_archetype",
    "legal_action_mask",
    "load_map",
    "observable_units",
    "parse_map",
    "random_bot_action",
    "reward_components",
    "scripted_bot_action",
    "state_digest",
    "swap_sides",
]
