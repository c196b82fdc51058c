"""Domain types for the simulator state."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class Button(enum.IntEnum):
    NOOP = 0
    MOVE = 1
    ATTACK = 2
    SKILL1 = 3
    SKILL2 = 4
    SKILL3 = 5


N_BUTTONS = len(Button)
N_MOVE_BINS = 8
N_OFFSET_BINS = 8

# Bin value tables: 8 bins per axis, no zero entry; the (x, y) pair is
# quantized by angle to one of 16 compass directions, whose magnitude is
# discarded when mapped onto the 8 grid neighbor steps.
BIN_VALUES = (-4, -3, -2, -1, 1, 2, 3, 4)


class UnitKind(enum.IntEnum):
    HERO = 0
    CREEP = 1
    TURRET = 2
    BASE = 3


@dataclass
class ActionCommand:
    """Decoupled action labels, one per output head."""

    button: int = Button.NOOP
    move_x: int = 0
    move_y: int = 0
    offset_x: int = 0
    offset_y: int = 0
    target_index: int = 0

    def labels(self) -> tuple[int, int, int, int, int, int]:
        return (self.button, self.move_x, self.move_y,
                self.offset_x, self.offset_y, self.target_index)


@dataclass
class UnitState:
    unit_type: UnitKind
    side: int
    uid: int
    position: tuple[int, int]
    hp: int
    max_hp: int
    attack_range: float
    attack_damage: int
    attack_cooldown: int = 0  # ticks until next shot (turrets/creeps)

    @property
    def alive(self) -> bool:
        return self.hp > 0


@dataclass
class HeroState:
    side: int
    uid: int
    archetype: str
    position: tuple[int, int]
    hp: int
    max_hp: int
    mana: int
    max_mana: int
    gold: int = 0
    exp: int = 0
    level: int = 1
    # Slot 0 is the basic attack, slots 1..3 the skills.
    cooldowns: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    alive: bool = True
    respawn_timer: int = 0
    stun_timer: int = 0

    @property
    def control_locked(self) -> bool:
        return self.stun_timer > 0


@dataclass
class ScoreState:
    """Cumulative per-side event counters; reward deltas are derived from
    consecutive world states, so the counters must live inside the state."""

    kills: int = 0
    deaths: int = 0
    last_hits: int = 0


@dataclass
class WorldState:
    tick: int
    heroes: list[HeroState]
    creeps: list[UnitState]
    turrets: list[UnitState]
    bases: list[UnitState]
    scores: list[ScoreState]
    rng_state: int
    terminal: bool = False
    winner: int | None = None
    next_uid: int = 0
    illegal_actions: int = 0  # count of coerced external commands

    def hero(self, side: int) -> HeroState:
        return self.heroes[side]

    def turret(self, side: int) -> UnitState:
        return self.turrets[side]

    def base(self, side: int) -> UnitState:
        return self.bases[side]


@dataclass(frozen=True)
class RewardWeights:
    """Per-component multipliers; defaults match the standard design table."""

    hp_point: float = 2.0
    tower_hp_point: float = 10.0
    money: float = 0.008
    ep_rate: float = 0.8
    death: float = -1.0
    kill: float = -0.5
    exp: float = 0.008
    last_hit: float = 0.5


def clone_hero(h: HeroState) -> HeroState:
    return replace(h, cooldowns=list(h.cooldowns), position=tuple(h.position))


def clone_unit(u: UnitState) -> UnitState:
    return replace(u, position=tuple(u.position))


def clone_state(s: WorldState) -> WorldState:
    return WorldState(
        tick=s.tick,
        heroes=[clone_hero(h) for h in s.heroes],
        creeps=[clone_unit(c) for c in s.creeps],
        turrets=[clone_unit(t) for t in s.turrets],
        bases=[clone_unit(b) for b in s.bases],
        scores=[replace(sc) for sc in s.scores],
        rng_state=s.rng_state,
        terminal=s.terminal,
        winner=s.winner,
        next_uid=s.next_uid,
        illegal_actions=s.illegal_actions,
    )
