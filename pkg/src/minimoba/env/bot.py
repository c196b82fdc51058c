"""Built-in opponents: the scripted priority bot and a random-legal bot.

The scripted bot is a deterministic rule cascade:
  1. retreat toward own spawn below 25% hp
  2. basic-attack the enemy hero when in range
  3. last-hit a killable enemy creep in range
  4. defend: clear enemy creeps that besiege the own turret or base
  5. fire an available skill when the enemy hero is close enough
  6. fight the wave: attack any enemy creep in range once own creeps
     are on the map (never trade with a wave completely alone)
  7. push: attack the enemy turret/base in range, else advance toward it,
     holding position instead of walking into a defended turret alone

Every returned command is legal under the current action mask.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from ..rng import Rng
from .heroes import SKILL_BUTTONS
from .mask import ActionMask, legal_action_mask
from .types import ActionCommand, BIN_VALUES, Button, UnitKind, WorldState
from .world import MobaEnv, compass_step, dist, observable_units

# After this tick the bot stops waiting for creep cover and commits to dives;
# without it two careful bots farm forever and every game times out.
SIEGE_TICK = 1500

# Enemy creeps closer than this to an own structure count as besiegers.
DEFEND_RADIUS = 5.0

_ROUTE_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1),
               (1, 1), (1, -1), (-1, 1), (-1, -1))


def _bin_for(value: int) -> int:
    """Index of the bin whose value is closest to `value` (ties go low)."""
    best, best_err = 0, abs(BIN_VALUES[0] - value)
    for i, v in enumerate(BIN_VALUES):
        err = abs(v - value)
        if err < best_err:
            best, best_err = i, err
    return best


def _aim_bins(dx: int, dy: int) -> tuple[int, int]:
    dx = dx if dx != 0 else 1
    dy = dy if dy != 0 else 1
    return _bin_for(max(-4, min(4, dx))), _bin_for(max(-4, min(4, dy)))


def _move_toward(env: MobaEnv, mask: ActionMask, pos: tuple[int, int],
                 goal: tuple[int, int]) -> ActionCommand | None:
    """Best legal move command by resulting distance to `goal`.

    Greedy first; when no single step strictly improves (the straight line
    runs into an obstacle island) fall back to a BFS over the grid and take
    the first step of the shortest route.
    """
    if not mask.button[Button.MOVE]:
        return None
    best = None
    best_key = (dist(pos, goal), 99, 99)  # standing still is the baseline
    for bx in range(len(BIN_VALUES)):
        if not mask.move_x[bx]:
            continue
        for by in range(len(BIN_VALUES)):
            if not mask.move_y[by]:
                continue
            vx, vy = BIN_VALUES[bx], BIN_VALUES[by]
            nxt = env._walk(pos, compass_step(vx, vy), vx, vy)
            key = (dist(nxt, goal), bx, by)
            if key < best_key:
                best, best_key = ActionCommand(Button.MOVE, bx, by, 0, 0, 0), key
    if best is not None:
        return best
    step = _route_step(env, pos, goal)
    if step is None:
        return None
    return _bins_for_step(env, pos, step)


def _route_step(env: MobaEnv, pos: tuple[int, int],
                goal: tuple[int, int]) -> tuple[int, int] | None:
    """First step of a shortest route from `pos` to `goal`, or None.

    Edges mirror what a single move command can express: axis steps onto a
    free cell, and diagonal steps whose two axis neighbours and landing cell
    are all free (so the per-axis mask and the walk both allow them).
    """
    if pos == goal:
        return None
    gmap = env.gmap
    seen = {pos: None}
    queue = deque([pos])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            break
        x, y = cur
        for dx, dy in _ROUTE_DIRS:
            nxt = (x + dx, y + dy)
            if nxt in seen or not gmap.free(*nxt):
                continue
            if dx and dy and not (gmap.free(x + dx, y) and gmap.free(x, y + dy)):
                continue
            seen[nxt] = cur
            queue.append(nxt)
    if goal not in seen:
        return None
    cell = goal
    while seen[cell] != pos:
        cell = seen[cell]
    return (cell[0] - pos[0], cell[1] - pos[1])


def _bins_for_step(env: MobaEnv, pos: tuple[int, int],
                   step: tuple[int, int]) -> ActionCommand | None:
    """A mask-legal (move_x, move_y) pair whose compass step equals `step`."""
    dx, dy = step
    x, y = pos
    if dx and dy:
        return ActionCommand(Button.MOVE, _bin_for(dx), _bin_for(dy), 0, 0, 0)
    if dx:  # pure horizontal: the vertical bin must still point at a free cell
        for vy in (1, -1):
            if env.gmap.free(x, y + vy):
                return ActionCommand(Button.MOVE, _bin_for(4 * dx), _bin_for(vy), 0, 0, 0)
    elif dy:
        for vx in (1, -1):
            if env.gmap.free(x + vx, y):
                return ActionCommand(Button.MOVE, _bin_for(vx), _bin_for(4 * dy), 0, 0, 0)
    return None


def scripted_bot_action(env: MobaEnv, state: WorldState, side: int) -> ActionCommand:
    mask = legal_action_mask(env, state, side)
    hero = state.heroes[side]
    if not hero.alive or hero.control_locked:
        return ActionCommand()
    arch = env.archetypes[side]
    units = observable_units(env, state, side)
    foe = state.heroes[1 - side]

    def slot_of(unit) -> int | None:
        for i, (_, u) in enumerate(units):
            if u is unit:
                return i
        return None

    # 1. retreat when low
    if hero.hp * 4 < hero.max_hp:
        cmd = _move_toward(env, mask, hero.position, env.gmap.spawns[side])
        return cmd or ActionCommand()

    # 2. attack the enemy hero in range
    foe_slot = slot_of(foe)
    if (foe.alive and mask.button[Button.ATTACK] and foe_slot is not None
            and mask.target[foe_slot]
            and dist(hero.position, foe.position) <= arch.attack_range):
        return ActionCommand(Button.ATTACK, 0, 0, 0, 0, foe_slot)

    # 3. last-hit a killable creep in range
    if mask.button[Button.ATTACK]:
        best = None
        for i, (kind, unit) in enumerate(units):
            if (kind == UnitKind.CREEP and mask.target[i]
                    and dist(hero.position, unit.position) <= arch.attack_range
                    and unit.hp <= arch.base_attack + arch.attack_per_level * (hero.level - 1)):
                if best is None or (unit.hp, unit.uid) < (units[best][1].hp, units[best][1].uid):
                    best = i
        if best is not None:
            return ActionCommand(Button.ATTACK, 0, 0, 0, 0, best)

    # 4. defend: clear besiegers off the own turret/base
    holds = [s for s in (state.turrets[side], state.bases[side]) if s.hp > 0]
    threat = None
    threat_key = None
    for i, (kind, unit) in enumerate(units):
        if kind != UnitKind.CREEP or unit.side == side:
            continue
        siege = min(dist(unit.position, s.position) for s in holds)
        if siege > DEFEND_RADIUS:
            continue
        key = (dist(hero.position, unit.position), unit.uid)
        if threat_key is None or key < threat_key:
            threat, threat_key = i, key
    if threat is not None:
        unit = units[threat][1]
        if (mask.button[Button.ATTACK] and mask.target[threat]
                and dist(hero.position, unit.position) <= arch.attack_range):
            return ActionCommand(Button.ATTACK, 0, 0, 0, 0, threat)
        cmd = _move_toward(env, mask, hero.position, unit.position)
        if cmd is not None:
            return cmd

    # 5. skill at the enemy hero when close
    if foe.alive and foe_slot is not None:
        d = dist(hero.position, foe.position)
        ox, oy = _aim_bins(foe.position[0] - hero.position[0],
                           foe.position[1] - hero.position[1])
        for slot, btn in enumerate(SKILL_BUTTONS):
            spec = arch.skills[slot]
            if not mask.button[btn] or spec.effect == "blink":
                continue
            reach = spec.radius if spec.effect == "area" else float(spec.reach)
            if d <= reach:
                tgt = foe_slot if mask.target[foe_slot] else int(np.argmax(mask.target))
                return ActionCommand(btn, 0, 0, ox, oy, tgt)

    # 6. fight the wave (only with creep backup somewhere on the map)
    if mask.button[Button.ATTACK] and any(c.side == side for c in state.creeps):
        best = None
        for i, (kind, unit) in enumerate(units):
            if (kind == UnitKind.CREEP and unit.side != side and mask.target[i]
                    and dist(hero.position, unit.position) <= arch.attack_range):
                if best is None or (unit.hp, unit.uid) < (units[best][1].hp, units[best][1].uid):
                    best = i
        if best is not None:
            return ActionCommand(Button.ATTACK, 0, 0, 0, 0, best)

    # 7. push the lane
    objective = state.turrets[1 - side] if state.turrets[1 - side].hp > 0 \
        else state.bases[1 - side]
    obj_slot = slot_of(objective)
    if (mask.button[Button.ATTACK] and obj_slot is not None and mask.target[obj_slot]
            and dist(hero.position, objective.position) <= arch.attack_range):
        return ActionCommand(Button.ATTACK, 0, 0, 0, 0, obj_slot)
    turret = state.turrets[1 - side]
    if turret.hp > 0 and state.tick < SIEGE_TICK:
        covered = any(c.side == side and dist(c.position, turret.position)
                      <= env.config.turret_range for c in state.creeps)
        next_d = dist(hero.position, turret.position) - 1.5
        if not covered and next_d <= env.config.turret_range:
            return ActionCommand()  # hold: do not dive an undistracted turret
    cmd = _move_toward(env, mask, hero.position, objective.position)
    return cmd or ActionCommand()


def random_bot_action(env: MobaEnv, state: WorldState, side: int,
                      rng: Rng) -> ActionCommand:
    """Uniform choice over the legal labels of every head."""
    mask = legal_action_mask(env, state, side)

    def pick(head: np.ndarray) -> int:
        legal = np.flatnonzero(head)
        return int(legal[rng.randint(len(legal))])

    return ActionCommand(*(pick(h) for h in mask.heads()))
