"""Legal-action masks.

Four pruning clauses:
  1. map geometry: move bins whose axis step leads into an obstacle (or off
     the map) are illegal
  2. availability: buttons on cooldown or lacking mana are illegal
  3. incapacitation: everything but noop is illegal while dead or stunned
  4. hero-specific restrictions: skills below their unlock level are illegal

The target head marks enemy units that are alive and inside command range
(the enemy base is always targetable, which keeps every head non-empty).
Offset bins are never pruned. Noop is always legal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .heroes import SKILL_BUTTONS
from .types import (
    ActionCommand,
    BIN_VALUES,
    Button,
    N_BUTTONS,
    N_MOVE_BINS,
    N_OFFSET_BINS,
    UnitKind,
    WorldState,
)
from .world import MobaEnv, dist, observable_units

HEAD_NAMES = ("button", "move_x", "move_y", "offset_x", "offset_y", "target")


@dataclass
class ActionMask:
    button: np.ndarray
    move_x: np.ndarray
    move_y: np.ndarray
    offset_x: np.ndarray
    offset_y: np.ndarray
    target: np.ndarray

    def heads(self) -> tuple[np.ndarray, ...]:
        return (self.button, self.move_x, self.move_y,
                self.offset_x, self.offset_y, self.target)

    def allows(self, cmd: ActionCommand) -> bool:
        for head, label in zip(self.heads(), cmd.labels()):
            if label < 0 or label >= head.shape[0] or not head[label]:
                return False
        return True


def legal_action_mask(env: MobaEnv, state: WorldState, side: int) -> ActionMask:
    if state.terminal:
        raise ValueError("mask of a terminal state")
    hero = state.heroes[side]
    arch = env.archetypes[side]

    button = np.zeros(N_BUTTONS, dtype=bool)
    button[Button.NOOP] = True
    if hero.alive and not hero.control_locked:
        button[Button.MOVE] = True
        button[Button.ATTACK] = hero.cooldowns[0] == 0
        for slot, btn in enumerate(SKILL_BUTTONS):
            spec = arch.skills[slot]
            button[btn] = (hero.level >= spec.unlock_level
                           and hero.cooldowns[1 + slot] == 0
                           and hero.mana >= spec.mana_cost)

    x, y = hero.position
    move_x = np.array([env.gmap.free(x + (1 if v > 0 else -1), y)
                       for v in BIN_VALUES], dtype=bool)
    move_y = np.array([env.gmap.free(x, y + (1 if v > 0 else -1))
                       for v in BIN_VALUES], dtype=bool)
    offset = np.ones(N_OFFSET_BINS, dtype=bool)

    units = observable_units(env, state, side)
    target = np.zeros(len(units), dtype=bool)
    for i, (kind, unit) in enumerate(units):
        if unit.side == side or unit.hp <= 0:
            continue
        if kind == UnitKind.BASE or dist(hero.position, unit.position) <= env.config.command_range:
            target[i] = True

    return ActionMask(button, move_x, move_y, offset, offset.copy(), target)


def action_is_legal(env: MobaEnv, state: WorldState, side: int,
                    cmd: ActionCommand) -> bool:
    """True when the button and every label it consumes are unmasked.

    Labels the button ignores (e.g. the target of a move) are not checked:
    heads are decoupled, so a command is judged only on what it executes.
    """
    mask = legal_action_mask(env, state, side)

    def ok(head: np.ndarray, label: int) -> bool:
        return 0 <= label < head.shape[0] and bool(head[label])

    if not ok(mask.button, cmd.button):
        return False
    if cmd.button == Button.MOVE:
        return ok(mask.move_x, cmd.move_x) and ok(mask.move_y, cmd.move_y)
    if cmd.button == Button.ATTACK:
        return ok(mask.target, cmd.target_index)
    if cmd.button in SKILL_BUTTONS:
        spec = env.archetypes[side].skills[cmd.button - Button.SKILL1]
        if not ok(mask.offset_x, cmd.offset_x) or not ok(mask.offset_y, cmd.offset_y):
            return False
        if spec.effect == "nuke":
            return ok(mask.target, cmd.target_index)
    return True
