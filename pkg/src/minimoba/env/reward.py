"""Reward computation from consecutive world states.

Each side first accumulates a raw weighted sum of its own deltas:

  hp_point       own hero hp as a fraction of max hp          (dense)
  tower_hp_point own turret + base hp fractions               (sparse)
  money          own gold delta                               (dense)
  ep_rate        own mana as a fraction of max mana           (dense)
  death          own deaths this tick                         (sparse)
  kill           own kills this tick                          (sparse)
  exp            own experience delta                         (dense)
  last_hit       own last hits this tick                      (sparse)

The published reward is zero-sum: final_i = raw_i - raw_opponent. IEEE
subtraction is sign-symmetric, so final_0 + final_1 == 0.0 holds exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .types import RewardWeights, WorldState

COMPONENT_NAMES = ("hp_point", "tower_hp_point", "money", "ep_rate",
                   "death", "kill", "exp", "last_hit")


@dataclass
class RewardComponents:
    side: int
    components: dict[str, float] = field(default_factory=dict)
    raw: float = 0.0
    final: float = 0.0


def _deltas(prev: WorldState, next_state: WorldState, side: int) -> dict[str, float]:
    hp, hn = prev.heroes[side], next_state.heroes[side]
    sp, sn = prev.scores[side], next_state.scores[side]
    hp_frac = hn.hp / hn.max_hp - hp.hp / hp.max_hp
    mana_frac = hn.mana / hn.max_mana - hp.mana / hp.max_mana
    tower = ((next_state.turrets[side].hp / next_state.turrets[side].max_hp
              + next_state.bases[side].hp / next_state.bases[side].max_hp)
             - (prev.turrets[side].hp / prev.turrets[side].max_hp
                + prev.bases[side].hp / prev.bases[side].max_hp))
    return {
        "hp_point": hp_frac,
        "tower_hp_point": tower,
        "money": float(hn.gold - hp.gold),
        "ep_rate": mana_frac,
        "death": float(sn.deaths - sp.deaths),
        "kill": float(sn.kills - sp.kills),
        "exp": float(hn.exp - hp.exp),
        "last_hit": float(sn.last_hits - sp.last_hits),
    }


def _raw(prev: WorldState, next_state: WorldState, side: int,
         weights: RewardWeights) -> tuple[float, dict[str, float]]:
    deltas = _deltas(prev, next_state, side)
    parts = {name: getattr(weights, name) * deltas[name] for name in COMPONENT_NAMES}
    return sum(parts[name] for name in COMPONENT_NAMES), parts


def reward_components(prev: WorldState, next_state: WorldState, side: int,
                      weights: RewardWeights) -> RewardComponents:
    raw_own, parts = _raw(prev, next_state, side, weights)
    raw_opp, _ = _raw(prev, next_state, 1 - side, weights)
    return RewardComponents(side=side, components=parts, raw=raw_own,
                            final=raw_own - raw_opp)


def compute_reward(prev: WorldState, next_state: WorldState, side: int,
                   weights: RewardWeights) -> float:
    return reward_components(prev, next_state, side, weights).final
