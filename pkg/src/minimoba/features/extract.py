"""Observation extraction: WorldState -> (f_i, f_u, f_g) for one side.

Both sides are served by one network, so extraction is canonical: side 1's
coordinates are rotated 180 degrees before featurization, which puts its own
base in the same corner side 0 sees its own base in. Enemy mana is hidden;
the self-only block (cooldowns, skill readiness) is populated only on row 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.heroes import LEVEL_EXP, MAX_LEVEL, attack_at
from ..env.mask import legal_action_mask
from ..env.types import (
    ActionCommand,
    Button,
    HeroState,
    N_MOVE_BINS,
    UnitKind,
    WorldState,
)
from ..env.world import MobaEnv, dist, observable_units
from .schema import (
    BASE_ROWS,
    CREEP_ROWS,
    GLOBAL_FIELDS,
    GLOBAL_WIDTH,
    HERO_ROWS,
    IMAGE_SIZE,
    MAX_UNITS,
    N_IMAGE_CHANNELS,
    TURRET_ROWS,
    UNIT_FIELDS,
    UNIT_WIDTH,
    global_field,
    unit_field,
)

_U = unit_field
_G = global_field


@dataclass
class LegalMasks:
    """Per-head legality, padded to fixed head sizes (target to MAX_UNITS)."""

    button: np.ndarray
    move_x: np.ndarray
    move_y: np.ndarray
    offset_x: np.ndarray
    offset_y: np.ndarray
    target: np.ndarray

    def heads(self) -> tuple[np.ndarray, ...]:
        return (self.button, self.move_x, self.move_y,
                self.offset_x, self.offset_y, self.target)


@dataclass
class Observation:
    image: np.ndarray          # (2, 16, 16) float32, values in {0, 1}
    units: np.ndarray          # (MAX_UNITS, UNIT_WIDTH) float32
    unit_mask: np.ndarray      # (MAX_UNITS,) bool, True where a unit sits
    globals: np.ndarray        # (GLOBAL_WIDTH,) float32
    unit_registry: np.ndarray  # (n_observable,) int64 uids, slot order
    legal: LegalMasks


def _canon(gmap, side: int, pos: tuple[int, int]) -> tuple[int, int]:
    return pos if side == 0 else gmap.mirror(pos)


def to_world_command(cmd: "ActionCommand", side: int) -> "ActionCommand":
    """Translate a canonical-frame command into world frame for env.step.

    Side 1's canonical board is the world rotated 180 degrees, so its move
    and aim bins negate: bin index b maps to the bin of the negated value,
    which for the symmetric bin table is index (n-1-b). The mapping is an
    involution, so it also converts world commands back to canonical.
    """
    if side == 0:
        return cmd
    n = N_MOVE_BINS - 1
    return ActionCommand(cmd.button, n - cmd.move_x, n - cmd.move_y,
                         n - cmd.offset_x, n - cmd.offset_y, cmd.target_index)


def extract_observation(env: MobaEnv, state: WorldState, side: int) -> Observation:
    me = state.heroes[side]
    units = observable_units(env, state, side)

    image = _image(env, side, state, me)
    f_u = np.zeros((MAX_UNITS, UNIT_WIDTH), dtype=np.float32)
    unit_mask = np.zeros(MAX_UNITS, dtype=bool)
    registry = np.empty(len(units), dtype=np.int64)

    counters = {UnitKind.HERO: HERO_ROWS[0], UnitKind.CREEP: CREEP_ROWS[0],
                UnitKind.TURRET: TURRET_ROWS[0], UnitKind.BASE: BASE_ROWS[0]}
    rows = np.empty(len(units), dtype=np.int64)
    for i, (kind, unit) in enumerate(units):
        row = counters[kind]
        counters[kind] += 1
        rows[i] = row
        registry[i] = unit.uid
        unit_mask[row] = True
        _fill_unit_row(env, state, side, me, kind, unit, f_u[row],
                       is_self=i == 0)

    f_g = _globals(env, state, side)

    raw = legal_action_mask(env, state, side)
    target = np.zeros(MAX_UNITS, dtype=bool)
    target[rows] = raw.target
    if side == 1:  # canonical frame negates both axes: reverse the bin masks
        flip = (raw.move_x[::-1].copy(), raw.move_y[::-1].copy(),
                raw.offset_x[::-1].copy(), raw.offset_y[::-1].copy())
    else:
        flip = (raw.move_x, raw.move_y, raw.offset_x, raw.offset_y)
    legal = LegalMasks(button=raw.button, move_x=flip[0], move_y=flip[1],
                       offset_x=flip[2], offset_y=flip[3], target=target)
    return Observation(image=image, units=f_u, unit_mask=unit_mask,
                       globals=f_g, unit_registry=registry, legal=legal)


_OBSTACLE_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _padded_obstacles(gmap, side: int) -> np.ndarray:
    """Canonical obstacle grid padded with rock, cached per map and side."""
    key = (id(gmap), side)
    grid = _OBSTACLE_CACHE.get(key)
    if grid is None:
        half = IMAGE_SIZE // 2
        grid = np.ones((gmap.height + IMAGE_SIZE, gmap.width + IMAGE_SIZE),
                       dtype=np.float32)
        inner = np.zeros((gmap.height, gmap.width), dtype=np.float32)
        for (ox, oy) in gmap.obstacles:
            inner[oy, ox] = 1.0
        if side == 1:
            inner = inner[::-1, ::-1]
        grid[half:half + gmap.height, half:half + gmap.width] = inner
        _OBSTACLE_CACHE[key] = grid
    return grid


def _image(env: MobaEnv, side: int, state: WorldState, me: HeroState) -> np.ndarray:
    gmap = env.gmap
    img = np.zeros((N_IMAGE_CHANNELS, IMAGE_SIZE, IMAGE_SIZE), dtype=np.float32)
    cx, cy = _canon(gmap, side, me.position)
    half = IMAGE_SIZE // 2
    x0, y0 = cx - half, cy - half
    padded = _padded_obstacles(gmap, side)
    img[0] = padded[cy:cy + IMAGE_SIZE, cx:cx + IMAGE_SIZE]
    for hero in state.heroes:
        if not hero.alive:
            continue
        hx, hy = _canon(gmap, side, hero.position)
        lx, ly = hx - x0, hy - y0
        if 0 <= lx < IMAGE_SIZE and 0 <= ly < IMAGE_SIZE:
            img[1, ly, lx] = 1.0
    return img


def _fill_unit_row(env: MobaEnv, state: WorldState, side: int, me: HeroState,
                   kind: UnitKind, unit, row: np.ndarray, is_self: bool) -> None:
    gmap = env.gmap
    fields = UNIT_FIELDS

    def put(name: str, raw: float) -> None:
        row[_U(name)] = fields[_U(name)].normalize(raw)

    is_hero = kind == UnitKind.HERO
    put("is_hero", is_hero)
    put("is_creep", kind == UnitKind.CREEP)
    put("is_turret", kind == UnitKind.TURRET)
    put("is_base", kind == UnitKind.BASE)
    put("is_self", is_self)
    put("is_friend", (unit.side == side) and not is_self)
    put("is_enemy", unit.side != side)
    alive = unit.alive if is_hero else unit.hp > 0
    put("alive", alive)

    ux, uy = _canon(gmap, side, unit.position)
    mx, my = _canon(gmap, side, me.position)
    put("abs_x", ux)
    put("abs_y", uy)
    put("rel_x", ux - mx)
    put("rel_y", uy - my)
    d = dist(unit.position, me.position)
    put("distance", d)
    put("dist_own_base", dist(unit.position, state.bases[side].position))
    put("dist_enemy_base", dist(unit.position, state.bases[1 - side].position))
    put("dist_own_turret", dist(unit.position, state.turrets[side].position))
    put("dist_enemy_turret", dist(unit.position, state.turrets[1 - side].position))

    my_arch = env.archetypes[side]
    put("in_my_attack_range", d <= my_arch.attack_range)

    if is_hero:
        arch = env.archetypes[unit.side]
        put("is_warrior", arch.name == "warrior")
        put("is_mage", arch.name == "mage")
        put("i_am_in_its_range", d <= arch.attack_range)
        put("hp", unit.hp)
        put("max_hp", unit.max_hp)
        put("hp_frac", unit.hp / unit.max_hp)
        put("attack_damage", attack_at(arch, unit.level))
        put("attack_range", arch.attack_range)
        put("attack_cooldown", unit.cooldowns[0])
        put("attack_ready", unit.cooldowns[0] == 0)
        put("level", unit.level)
        for lvl in range(1, MAX_LEVEL + 1):
            put(f"level_{lvl}", unit.level == lvl)
        put("exp", unit.exp)
        nxt = LEVEL_EXP[unit.level] if unit.level < MAX_LEVEL else unit.exp
        put("exp_to_next", max(0, nxt - unit.exp))
        put("gold", unit.gold)
        put("kills", state.scores[unit.side].kills)
        put("deaths", state.scores[unit.side].deaths)
        put("last_hits", state.scores[unit.side].last_hits)
        put("stunned", unit.stun_timer > 0)
        put("stun_ticks", unit.stun_timer)
        put("respawning", not unit.alive)
        put("respawn_ticks", unit.respawn_timer)
        if unit.side == side:  # own mana is visible, enemy mana is hidden
            put("mana", unit.mana)
            put("max_mana", unit.max_mana)
            put("mana_frac", unit.mana / unit.max_mana)
        if is_self:
            put("cd_attack", unit.cooldowns[0])
            for s in range(3):
                spec = arch.skills[s]
                unlocked = unit.level >= spec.unlock_level
                mana_ok = unit.mana >= spec.mana_cost
                ready = unlocked and mana_ok and unit.cooldowns[1 + s] == 0
                put(f"cd_skill{s + 1}", unit.cooldowns[1 + s])
                put(f"skill{s + 1}_unlocked", unlocked)
                put(f"skill{s + 1}_mana_ok", mana_ok)
                put(f"skill{s + 1}_ready", ready)
    else:
        put("i_am_in_its_range", d <= unit.attack_range)
        put("hp", unit.hp)
        put("max_hp", unit.max_hp)
        put("hp_frac", unit.hp / unit.max_hp if unit.max_hp else 0.0)
        put("attack_damage", unit.attack_damage)
        put("attack_range", unit.attack_range)
        put("attack_cooldown", unit.attack_cooldown)
        put("attack_ready", unit.attack_cooldown == 0)


def _globals(env: MobaEnv, state: WorldState, side: int) -> np.ndarray:
    cfg = env.config
    g = np.zeros(GLOBAL_WIDTH, dtype=np.float32)
    me, foe = state.heroes[side], state.heroes[1 - side]
    own_t, foe_t = state.turrets[side], state.turrets[1 - side]
    own_b, foe_b = state.bases[side], state.bases[1 - side]
    sc, fc = state.scores[side], state.scores[1 - side]

    def put(name: str, raw: float) -> None:
        g[_G(name)] = GLOBAL_FIELDS[_G(name)].normalize(raw)

    put("tick_frac", state.tick / cfg.tick_cap)
    put("wave_phase", (state.tick % cfg.wave_period) / cfg.wave_period)
    put("own_turret_alive", own_t.hp > 0)
    put("enemy_turret_alive", foe_t.hp > 0)
    put("own_turret_hp_frac", own_t.hp / own_t.max_hp)
    put("enemy_turret_hp_frac", foe_t.hp / foe_t.max_hp)
    put("own_base_hp_frac", own_b.hp / own_b.max_hp)
    put("enemy_base_hp_frac", foe_b.hp / foe_b.max_hp)
    put("own_creep_count", sum(1 for c in state.creeps if c.side == side))
    put("enemy_creep_count", sum(1 for c in state.creeps if c.side != side))
    put("kill_lead", sc.kills - fc.kills)
    put("last_hit_lead", sc.last_hits - fc.last_hits)
    put("gold_lead", me.gold - foe.gold)
    put("exp_lead", me.exp - foe.exp)
    put("level_lead", me.level - foe.level)
    put("own_level", me.level)
    return g
