"""Feature schema: field names, slices, and normalization ranges.

The observation is the triple (f_i, f_u, f_g):

  f_i  (2, 16, 16) float32 in {0, 1}; channel 0 obstacle occupancy,
       channel 1 hero positions; egocentric window centered on self hero
  f_u  (MAX_UNITS, UNIT_WIDTH) float32 plus a validity mask; rows are fixed
       type regions (heroes, creeps, turrets, bases) so per-type encoders
       and max-pooling slice the same rows every frame
  f_g  (GLOBAL_WIDTH,) float32

Every scalar field declares a (lo, hi) input range and normalizes by a
clamped affine map to [0, 1], or to [-1, 1] when marked signed. The layout
exports as a JSON manifest so recorded samples are self-describing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from ..env.types import N_BUTTONS, N_MOVE_BINS, N_OFFSET_BINS

IMAGE_SIZE = 16
IMAGE_CHANNELS = ("obstacle", "hero_position")
N_IMAGE_CHANNELS = len(IMAGE_CHANNELS)

# f_u row regions, by unit type
MAX_CREEPS_PER_SIDE = 8
HERO_ROWS = (0, 2)
CREEP_ROWS = (2, 2 + 2 * MAX_CREEPS_PER_SIDE)
TURRET_ROWS = (CREEP_ROWS[1], CREEP_ROWS[1] + 2)
BASE_ROWS = (TURRET_ROWS[1], TURRET_ROWS[1] + 2)
MAX_UNITS = BASE_ROWS[1]

TYPE_REGIONS = {
    "hero": HERO_ROWS,
    "creep": CREEP_ROWS,
    "turret": TURRET_ROWS,
    "base": BASE_ROWS,
}


@dataclass(frozen=True)
class FieldSpec:
    """One scalar feature: name, raw input range, output signedness."""

    name: str
    lo: float
    hi: float
    signed: bool = False

    def normalize(self, value: float) -> float:
        x = (float(value) - self.lo) / (self.hi - self.lo)
        x = 0.0 if x < 0.0 else 1.0 if x > 1.0 else x
        return 2.0 * x - 1.0 if self.signed else x

    @property
    def out_range(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self.signed else (0.0, 1.0)


def _f(name, lo, hi, signed=False):
    return FieldSpec(name, lo, hi, signed)


# Per-unit vector. Positions are canonical (side 1 sees the mirrored board,
# so its own base sits in the same corner as side 0's); enemy hero mana,
# gold, cooldowns and skill readiness are hidden (zeroed).
UNIT_FIELDS: tuple[FieldSpec, ...] = (
    # identity
    _f("is_hero", 0, 1), _f("is_creep", 0, 1),
    _f("is_turret", 0, 1), _f("is_base", 0, 1),
    _f("is_self", 0, 1), _f("is_friend", 0, 1), _f("is_enemy", 0, 1),
    _f("is_warrior", 0, 1), _f("is_mage", 0, 1),
    _f("alive", 0, 1),
    # geometry (canonical frame)
    _f("abs_x", 0, 31), _f("abs_y", 0, 31),
    _f("rel_x", -31, 31, signed=True), _f("rel_y", -31, 31, signed=True),
    _f("distance", 0, 45),
    _f("dist_own_base", 0, 45), _f("dist_enemy_base", 0, 45),
    _f("dist_own_turret", 0, 45), _f("dist_enemy_turret", 0, 45),
    _f("in_my_attack_range", 0, 1), _f("i_am_in_its_range", 0, 1),
    # combat stats
    _f("hp", 0, 1000), _f("max_hp", 0, 1000), _f("hp_frac", 0, 1),
    _f("attack_damage", 0, 100), _f("attack_range", 0, 8),
    _f("attack_cooldown", 0, 24), _f("attack_ready", 0, 1),
    # hero-only block (zero for other types)
    _f("mana", 0, 400), _f("max_mana", 0, 400), _f("mana_frac", 0, 1),
    _f("level", 0, 6),
    _f("level_1", 0, 1), _f("level_2", 0, 1), _f("level_3", 0, 1),
    _f("level_4", 0, 1), _f("level_5", 0, 1), _f("level_6", 0, 1),
    _f("exp", 0, 1200), _f("exp_to_next", 0, 400),
    _f("gold", 0, 10_000),
    _f("kills", 0, 20), _f("deaths", 0, 20), _f("last_hits", 0, 100),
    _f("stunned", 0, 1), _f("stun_ticks", 0, 12),
    _f("respawning", 0, 1), _f("respawn_ticks", 0, 200),
    # self-hero-only block (private information)
    _f("cd_attack", 0, 24),
    _f("cd_skill1", 0, 80), _f("cd_skill2", 0, 80), _f("cd_skill3", 0, 80),
    _f("skill1_unlocked", 0, 1), _f("skill2_unlocked", 0, 1),
    _f("skill3_unlocked", 0, 1),
    _f("skill1_mana_ok", 0, 1), _f("skill2_mana_ok", 0, 1),
    _f("skill3_mana_ok", 0, 1),
    _f("skill1_ready", 0, 1), _f("skill2_ready", 0, 1),
    _f("skill3_ready", 0, 1),
)
UNIT_WIDTH = len(UNIT_FIELDS)

GLOBAL_FIELDS: tuple[FieldSpec, ...] = (
    _f("tick_frac", 0, 1),
    _f("wave_phase", 0, 1),
    _f("own_turret_alive", 0, 1), _f("enemy_turret_alive", 0, 1),
    _f("own_turret_hp_frac", 0, 1), _f("enemy_turret_hp_frac", 0, 1),
    _f("own_base_hp_frac", 0, 1), _f("enemy_base_hp_frac", 0, 1),
    _f("own_creep_count", 0, MAX_CREEPS_PER_SIDE),
    _f("enemy_creep_count", 0, MAX_CREEPS_PER_SIDE),
    _f("kill_lead", -10, 10, signed=True),
    _f("last_hit_lead", -50, 50, signed=True),
    _f("gold_lead", -5000, 5000, signed=True),
    _f("exp_lead", -1000, 1000, signed=True),
    _f("level_lead", -5, 5, signed=True),
    _f("own_level", 1, 6),
)
GLOBAL_WIDTH = len(GLOBAL_FIELDS)

_UNIT_INDEX = {f.name: i for i, f in enumerate(UNIT_FIELDS)}
_GLOBAL_INDEX = {f.name: i for i, f in enumerate(GLOBAL_FIELDS)}


def unit_field(name: str) -> int:
    return _UNIT_INDEX[name]


def global_field(name: str) -> int:
    return _GLOBAL_INDEX[name]


def normalize_field(raw: float, spec: FieldSpec) -> float:
    return spec.normalize(raw)


def unit_row_names() -> list[str]:
    names = ["self_hero", "enemy_hero"]
    names += [f"creep_{i}" for i in range(2 * MAX_CREEPS_PER_SIDE)]
    names += ["turret_a", "turret_b", "base_a", "base_b"]
    return names


def feature_manifest() -> dict:
    """JSON-serializable description of the whole observation layout."""
    def fields(specs):
        return [{"name": f.name, "lo": f.lo, "hi": f.hi,
                 "out": list(f.out_range)} for f in specs]

    return {
        "version": 1,
        "image": {
            "shape": [N_IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE],
            "channels": list(IMAGE_CHANNELS),
        },
        "units": {
            "shape": [MAX_UNITS, UNIT_WIDTH],
            "rows": unit_row_names(),
            "regions": {k: list(v) for k, v in TYPE_REGIONS.items()},
            "fields": fields(UNIT_FIELDS),
        },
        "global": {
            "shape": [GLOBAL_WIDTH],
            "fields": fields(GLOBAL_FIELDS),
        },
        "action_heads": {
            "button": N_BUTTONS,
            "move_x": N_MOVE_BINS, "move_y": N_MOVE_BINS,
            "offset_x": N_OFFSET_BINS, "offset_y": N_OFFSET_BINS,
            "target": MAX_UNITS,
        },
    }


def manifest_json() -> str:
    return json.dumps(feature_manifest(), indent=2, sort_keys=True)
