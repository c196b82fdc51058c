"""Hero archetypes: stat tables and skill definitions.

Two archetypes are shipped: a melee "warrior" and a ranged "mage". They
differ in base stats, skill effects and unlock levels, which is what the
hero-specific clause of the action mask keys off. All numbers are plain
integers; overrides can be supplied through the [hero.<name>] config section.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class SkillSpec:
    name: str
    cooldown: int
    mana_cost: int
    unlock_level: int
    damage: int
    damage_per_level: int
    # Effect kind dispatched by the world step:
    #   "area"   damage all enemies within `radius` of self
    #   "dash"   move up to `reach` cells along the aim direction, damaging
    #            and stunning the first enemy hero within melee range after
    #   "ray"    hit the first enemy unit within `reach` cells along the aim
    #   "nuke"   damage the chosen target unit within `reach`
    #   "blink"  teleport up to `reach` cells along the aim direction
    effect: str = "area"
    radius: float = 2.2
    reach: int = 4
    stun_ticks: int = 0


@dataclass(frozen=True)
class HeroArchetype:
    name: str
    base_hp: int
    hp_per_level: int
    base_mana: int
    mana_per_level: int
    base_attack: int
    attack_per_level: int
    attack_range: float
    attack_interval: int  # basic-attack cooldown in ticks
    skills: tuple[SkillSpec, SkillSpec, SkillSpec]


WARRIOR = HeroArchetype(
    name="warrior",
    base_hp=320, hp_per_level=50,
    base_mana=100, mana_per_level=10,
    base_attack=32, attack_per_level=4,
    attack_range=1.6, attack_interval=6,
    skills=(
        SkillSpec("cleave", cooldown=30, mana_cost=20, unlock_level=1,
                  damage=40, damage_per_level=6, effect="area", radius=2.2),
        SkillSpec("charge", cooldown=60, mana_cost=25, unlock_level=2,
                  damage=30, damage_per_level=4, effect="dash", reach=4,
                  stun_ticks=8),
        SkillSpec("execute", cooldown=90, mana_cost=35, unlock_level=4,
                  damage=90, damage_per_level=10, effect="nuke", reach=3),
    ),
)

MAGE = HeroArchetype(
    name="mage",
    base_hp=260, hp_per_level=35,
    base_mana=140, mana_per_level=15,
    base_attack=26, attack_per_level=3,
    attack_range=4.2, attack_interval=7,
    skills=(
        SkillSpec("bolt", cooldown=25, mana_cost=22, unlock_level=1,
                  damage=48, damage_per_level=8, effect="ray", reach=6),
        SkillSpec("nova", cooldown=70, mana_cost=40, unlock_level=2,
                  damage=36, damage_per_level=6, effect="area", radius=2.2,
                  stun_ticks=6),
        SkillSpec("blink", cooldown=100, mana_cost=30, unlock_level=4,
                  damage=0, damage_per_level=0, effect="blink", reach=3),
    ),
)

_ARCHETYPES = {"warrior": WARRIOR, "mage": MAGE}

# Buttons 3..5 map to skill slots 0..2 (cooldown slots 1..3).
SKILL_BUTTONS = (3, 4, 5)

# Level-up table: cumulative exp needed to reach each level (index = level).
LEVEL_EXP = (0, 0, 100, 250, 450, 700, 1000)
MAX_LEVEL = len(LEVEL_EXP) - 1


def hero_archetype(name: str, overrides: dict[str, int | float] | None = None) -> HeroArchetype:
    try:
        arch = _ARCHETYPES[name]
    except KeyError:
        raise KeyError(f"unknown hero archetype {name!r}; "
                       f"known: {sorted(_ARCHETYPES)}") from None
    if overrides:
        scalar = {k: v for k, v in overrides.items() if hasattr(arch, k) and k != "skills"}
        arch = replace(arch, **scalar)
    return arch


def level_for_exp(exp: int) -> int:
    lvl = 1
    for level in range(2, MAX_LEVEL + 1):
        if exp >= LEVEL_EXP[level]:
            lvl = level
    return lvl


def max_hp_at(arch: HeroArchetype, level: int) -> int:
    return arch.base_hp + arch.hp_per_level * (level - 1)


def max_mana_at(arch: HeroArchetype, level: int) -> int:
    return arch.base_mana + arch.mana_per_level * (level - 1)


def attack_at(arch: HeroArchetype, level: int) -> int:
    return arch.base_attack + arch.attack_per_level * (level - 1)


def skill_damage(spec: SkillSpec, level: int) -> int:
    return spec.damage + spec.damage_per_level * (level - 1)
