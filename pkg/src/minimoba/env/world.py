"""World mechanics: reset and one-tick advancement.

Step order (all decisions are taken on the pre-tick snapshot, so sides are
symmetric; effects are buffered and applied in a fixed deterministic order):

  1. validate both commands against the legal mask; illegal ones are coerced
     to noop and counted in ``illegal_actions``
  2. hero intents: movement (16-compass quantized to an 8-neighbor step with
     axis slide), attacks, skill execution with mana/cooldown bookkeeping
  3. creep intents: aggro, chase, attack; creeps move on even ticks only
  4. turret intents: shoot nearest in-range enemy, creeps first
  5. apply buffered damage/stun events in order (hero 0, hero 1, creeps by
     uid, turret 0, turret 1); process deaths, bounties and respawn timers
  6. housekeeping: creep waves, regen trickle, cooldown/stun decrements,
     respawns, level-ups
  7. advance tick, check base destruction

Hero-dealt damage carries a seeded 90..110 percent roll from the world RNG;
creep and turret damage is fixed. The roll is what breaks the mirror
symmetry of otherwise deterministic scripted-vs-scripted games, so they
actually finish instead of stalemating.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace

from ..rng import Rng
from .gamemap import GameMap, load_map
from .heroes import (
    HeroArchetype,
    LEVEL_EXP,
    MAX_LEVEL,
    SKILL_BUTTONS,
    attack_at,
    hero_archetype,
    level_for_exp,
    max_hp_at,
    max_mana_at,
    skill_damage,
)
from .types import (
    ActionCommand,
    BIN_VALUES,
    Button,
    HeroState,
    RewardWeights,
    ScoreState,
    UnitKind,
    UnitState,
    WorldState,
    clone_state,
)


class EnvError(RuntimeError):
    """Contract violation (e.g. stepping a terminal state)."""


@dataclass(frozen=True)
class EnvConfig:
    map_source: str = "default"
    hero0: str = "mage"
    hero1: str = "mage"
    tick_cap: int = 9000
    wave_period: int = 60
    creeps_per_wave: int = 3
    max_live_creeps: int = 12      # per side; spawns beyond this are skipped
    max_obs_creeps: int = 8        # per side, observable slots
    creep_hp: int = 60
    creep_damage: int = 6
    creep_range: float = 1.6
    creep_aggro: float = 6.0
    creep_attack_interval: int = 4
    turret_hp: int = 350
    turret_damage: int = 30
    turret_range: float = 5.0
    turret_attack_interval: int = 4
    base_hp: int = 600
    command_range: float = 10.0
    hp_regen_period: int = 4
    mana_regen_period: int = 2
    gold_trickle_period: int = 5
    creep_gold: int = 40
    creep_exp: int = 30
    hero_kill_gold: int = 100
    hero_kill_exp: int = 80
    turret_gold: int = 150
    respawn_base: int = 40
    respawn_per_level: int = 20
    spawn_jitter: int = 4          # radius of the position-randomization zone
    reward_weights: RewardWeights = field(default_factory=RewardWeights)
    hero_overrides: dict | None = None


def dist(a: tuple[int, int], b: tuple[int, int]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def compass_step(vx: int, vy: int) -> tuple[int, int]:
    """Quantize a nonzero (vx, vy) aim vector to one of the 8 grid steps.

    Integer-only: axis-dominant when the minor component is less than half
    the major one (the 16-compass sector boundary at tan 22.5 deg falls
    between the representable ratios 1/3 and 1/2)."""
    ax, ay = abs(vx), abs(vy)
    sx = 1 if vx > 0 else -1
    sy = 1 if vy > 0 else -1
    if 2 * ay < ax:
        return (sx, 0)
    if 2 * ax < ay:
        return (0, sy)
    return (sx, sy)


@dataclass
class _Event:
    """Buffered combat effect, applied after all intents are collected."""

    source_side: int
    source_kind: UnitKind
    target_kind: UnitKind
    target_uid: int
    damage: int
    stun: int = 0


class MobaEnv:
    """Deterministic 1v1 environment over a fixed map and config.

    Instances hold no mutable match state; everything lives in WorldState,
    so one env object can serve any number of concurrent playouts.
    """

    def __init__(self, config: EnvConfig | None = None, gmap: GameMap | None = None):
        self.config = config or EnvConfig()
        self.gmap = gmap or load_map(self.config.map_source)
        over = self.config.hero_overrides or {}
        self.archetypes: tuple[HeroArchetype, HeroArchetype] = (
            hero_archetype(self.config.hero0, over.get(self.config.hero0)),
            hero_archetype(self.config.hero1, over.get(self.config.hero1)),
        )

    # ------------------------------------------------------------ reset

    def reset(self, seed: int, start_mode: str = "zero_start",
              randomize_positions: bool = False) -> WorldState:
        if start_mode == "zero_start":
            return self._zero_start(seed, randomize_positions)
        if start_mode == "random_initial_frame":
            return self._random_initial_frame(seed, randomize_positions)
        raise ValueError(f"unknown start_mode {start_mode!r}")

    def _zero_start(self, seed: int, randomize_positions: bool) -> WorldState:
        rng = Rng(seed)
        spawns = list(self.gmap.spawns)
        if randomize_positions:
            spawns = [self._jittered_spawn(rng, s) for s in range(2)]
        heroes = []
        for side in range(2):
            arch = self.archetypes[side]
            heroes.append(HeroState(
                side=side, uid=4 + side, archetype=arch.name,
                position=spawns[side],
                hp=arch.base_hp, max_hp=arch.base_hp,
                mana=arch.base_mana, max_mana=arch.base_mana,
            ))
        cfg = self.config
        turrets = [UnitState(UnitKind.TURRET, s, 2 + s, self.gmap.turrets[s],
                             cfg.turret_hp, cfg.turret_hp,
                             cfg.turret_range, cfg.turret_damage)
                   for s in range(2)]
        bases = [UnitState(UnitKind.BASE, s, s, self.gmap.bases[s],
                           cfg.base_hp, cfg.base_hp, 0.0, 0)
                 for s in range(2)]
        return WorldState(
            tick=0, heroes=heroes, creeps=[], turrets=turrets, bases=bases,
            scores=[ScoreState(), ScoreState()],
            rng_state=rng.state, next_uid=6,
        )

    def _jittered_spawn(self, rng: Rng, side: int) -> tuple[int, int]:
        sx, sy = self.gmap.spawns[side]
        r = self.config.spawn_jitter
        cells = [(x, y)
                 for y in range(sy - r, sy + r + 1)
                 for x in range(sx - r, sx + r + 1)
                 if self.gmap.free(x, y) and dist((x, y), (sx, sy)) <= r]
        return cells[rng.randint(len(cells))]

    def _random_initial_frame(self, seed: int, randomize_positions: bool) -> WorldState:
        """Fast-forward a scripted-vs-scripted game to a uniform tick."""
        from .bot import scripted_bot_action  # local import avoids a cycle

        rng = Rng(seed)
        playout_seed = rng.next_u64()
        state = self._zero_start(playout_seed, randomize_positions)
        trace_len = 0
        probe = state
        while not probe.terminal and probe.tick < self.config.tick_cap:
            acts = (scripted_bot_action(self, probe, 0), scripted_bot_action(self, probe, 1))
            probe, _, _ = self.step(probe, acts)
            trace_len += 1
        target = rng.randint(max(trace_len, 1))
        for _ in range(target):
            acts = (scripted_bot_action(self, state, 0), scripted_bot_action(self, state, 1))
            state, _, _ = self.step(state, acts)
        return state

    # ------------------------------------------------------------ step

    def step(self, state: WorldState, actions: tuple[ActionCommand, ActionCommand]
             ) -> tuple[WorldState, tuple["RewardComponents", "RewardComponents"], bool]:
        from .mask import action_is_legal
        from .reward import reward_components

        if state.terminal:
            raise EnvError("step() called on a terminal state")

        prev = state
        st = clone_state(state)
        rng = Rng(0)
        rng.state = st.rng_state

        cmds: list[ActionCommand] = []
        for side in range(2):
            cmd = actions[side]
            if not action_is_legal(self, st, side, cmd):
                cmd = ActionCommand()
                st.illegal_actions += 1
            cmds.append(cmd)

        events: list[_Event] = []
        # Hero intents on the pre-tick snapshot (prev positions/hp).
        moves: list[tuple[int, tuple[int, int]] ] = []
        for side in range(2):
            self._hero_intent(prev, st, side, cmds[side], events, moves, rng)
        for side, pos in moves:
            st.heroes[side].position = pos
        self._creep_intents(prev, st, events)
        self._turret_intents(prev, st, events)
        self._apply_events(st, events)
        self._housekeeping(st, rng)

        st.tick += 1
        st.rng_state = rng.state
        self._check_termination(st)
        rcs = (reward_components(prev, st, 0, self.config.reward_weights),
               reward_components(prev, st, 1, self.config.reward_weights))
        return st, rcs, st.terminal

    # -- intent helpers -------------------------------------------------

    def _hero_intent(self, prev: WorldState, st: WorldState, side: int,
                     cmd: ActionCommand, events: list[_Event],
                     moves: list, rng: Rng) -> None:
        hero = st.heroes[side]
        if not hero.alive or hero.control_locked or cmd.button == Button.NOOP:
            return
        arch = self.archetypes[side]
        units = observable_units(self, prev, side)

        if cmd.button == Button.MOVE:
            vx, vy = BIN_VALUES[cmd.move_x], BIN_VALUES[cmd.move_y]
            moves.append((side, self._walk(hero.position, compass_step(vx, vy), vx, vy)))
            return

        if cmd.button == Button.ATTACK:
            kind, unit = units[cmd.target_index]
            if dist(hero.position, unit.position) <= arch.attack_range:
                dmg = self._roll(rng, attack_at(arch, hero.level))
                events.append(_Event(side, UnitKind.HERO, kind, unit.uid, dmg))
                hero.cooldowns[0] = arch.attack_interval
            else:
                moves.append((side, self._step_toward(hero.position, unit.position)))
            return

        slot = cmd.button - Button.SKILL1            # 0..2
        spec = arch.skills[slot]
        hero.mana -= spec.mana_cost
        hero.cooldowns[1 + slot] = spec.cooldown
        dmg = self._roll(rng, skill_damage(spec, hero.level)) if spec.damage else 0
        aim = compass_step(BIN_VALUES[cmd.offset_x], BIN_VALUES[cmd.offset_y])

        if spec.effect == "area":
            for kind, unit in _enemy_flesh(prev, side):
                if dist(hero.position, unit.position) <= spec.radius:
                    events.append(_Event(side, UnitKind.HERO, kind, unit.uid,
                                         dmg, stun=spec.stun_ticks if kind == UnitKind.HERO else 0))
        elif spec.effect == "dash":
            pos = self._ray_end(hero.position, aim, spec.reach)
            moves.append((side, pos))
            foe = prev.heroes[1 - side]
            if foe.alive and dist(pos, foe.position) <= 1.6:
                events.append(_Event(side, UnitKind.HERO, UnitKind.HERO, foe.uid,
                                     dmg, stun=spec.stun_ticks))
        elif spec.effect == "ray":
            hit = self._first_on_ray(prev, side, hero.position, aim, spec.reach)
            if hit is not None:
                kind, unit = hit
                events.append(_Event(side, UnitKind.HERO, kind, unit.uid, dmg))
        elif spec.effect == "nuke":
            kind, unit = units[cmd.target_index]
            if kind in (UnitKind.HERO, UnitKind.CREEP) and \
                    dist(hero.position, unit.position) <= spec.reach:
                events.append(_Event(side, UnitKind.HERO, kind, unit.uid, dmg))
        elif spec.effect == "blink":
            moves.append((side, self._ray_end(hero.position, aim, spec.reach)))

    def _roll(self, rng: Rng, base: int) -> int:
        # 90..110 percent, integer floor, never below 1.
        return max(1, base * (90 + rng.randint(21)) // 100)

    def _walk(self, pos: tuple[int, int], step: tuple[int, int],
              vx: int, vy: int) -> tuple[int, int]:
        x, y = pos
        dx, dy = step
        if self.gmap.free(x + dx, y + dy):
            return (x + dx, y + dy)
        if dx and dy:  # diagonal blocked: slide along the dominant axis first
            first, second = ((dx, 0), (0, dy)) if abs(vx) >= abs(vy) else ((0, dy), (dx, 0))
            for cx, cy in (first, second):
                if self.gmap.free(x + cx, y + cy):
                    return (x + cx, y + cy)
        return pos

    def _step_toward(self, pos: tuple[int, int], target: tuple[int, int]) -> tuple[int, int]:
        best = pos
        best_d = dist(pos, target)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                nx, ny = pos[0] + dx, pos[1] + dy
                if (dx or dy) and self.gmap.free(nx, ny):
                    d = dist((nx, ny), target)
                    if d < best_d - 1e-9:
                        best, best_d = (nx, ny), d
        return best

    def _ray_end(self, pos: tuple[int, int], aim: tuple[int, int], reach: int) -> tuple[int, int]:
        x, y = pos
        for _ in range(reach):
            nx, ny = x + aim[0], y + aim[1]
            if not self.gmap.free(nx, ny):
                break
            x, y = nx, ny
        return (x, y)

    def _first_on_ray(self, prev: WorldState, side: int, pos: tuple[int, int],
                      aim: tuple[int, int], reach: int):
        x, y = pos
        for _ in range(reach):
            x, y = x + aim[0], y + aim[1]
            if not self.gmap.free(x, y):
                return None
            for kind, unit in _enemy_flesh(prev, side):
                if unit.position == (x, y):
                    return (kind, unit)
        return None

    def _creep_intents(self, prev: WorldState, st: WorldState, events: list[_Event]) -> None:
        cfg = self.config
        new_pos: dict[int, tuple[int, int]] = {}
        for i, creep in enumerate(prev.creeps):
            live = st.creeps[i]
            target = self._nearest_enemy(prev, creep.side, creep.position, cfg.creep_aggro)
            if target is not None and dist(creep.position, target[1].position) <= cfg.creep_range:
                if live.attack_cooldown == 0:
                    events.append(_Event(creep.side, UnitKind.CREEP,
                                         target[0], target[1].uid, cfg.creep_damage))
                    live.attack_cooldown = cfg.creep_attack_interval
                continue
            if prev.tick % 2 == 0:  # creeps walk at half hero speed
                goal = target[1].position if target is not None \
                    else prev.bases[1 - creep.side].position
                new_pos[i] = self._step_toward(creep.position, goal)
        for i, pos in new_pos.items():
            st.creeps[i].position = pos

    def _nearest_enemy(self, prev: WorldState, side: int, pos: tuple[int, int],
                       radius: float):
        best = None
        best_key = (radius + 1e-9, 1 << 30)
        for kind, unit in _enemy_all(prev, side):
            d = dist(pos, unit.position)
            key = (d, unit.uid)
            if d <= radius and key < best_key:
                best, best_key = (kind, unit), key
        return best

    def _turret_intents(self, prev: WorldState, st: WorldState, events: list[_Event]) -> None:
        cfg = self.config
        for side in range(2):
            turret = prev.turrets[side]
            live = st.turrets[side]
            if turret.hp <= 0 or live.attack_cooldown > 0:
                continue
            target = None
            best = (cfg.turret_range + 1e-9, 1 << 30)
            for kind, unit in _enemy_all(prev, side):
                if kind == UnitKind.BASE or kind == UnitKind.TURRET:
                    continue
                d = dist(turret.position, unit.position)
                # Creeps soak turret fire ahead of heroes.
                key = (0 if kind == UnitKind.CREEP else 1, d, unit.uid)
                if d <= cfg.turret_range and (target is None or key < best):
                    target, best = (kind, unit), key
            if target is not None:
                events.append(_Event(side, UnitKind.TURRET, target[0],
                                     target[1].uid, cfg.turret_damage))
                live.attack_cooldown = cfg.turret_attack_interval

    # -- application ----------------------------------------------------

    def _apply_events(self, st: WorldState, events: list[_Event]) -> None:
        cfg = self.config
        creeps_by_uid = {c.uid: c for c in st.creeps}
        for ev in events:
            if ev.target_kind == UnitKind.HERO:
                hero = next(h for h in st.heroes if h.uid == ev.target_uid)
                if not hero.alive:
                    continue
                if ev.stun:
                    hero.stun_timer = max(hero.stun_timer, ev.stun)
                was = hero.hp
                hero.hp = max(0, hero.hp - ev.damage)
                if was > 0 and hero.hp == 0:
                    self._hero_death(st, hero)
            elif ev.target_kind == UnitKind.CREEP:
                creep = creeps_by_uid.get(ev.target_uid)
                if creep is None or creep.hp <= 0:
                    continue
                creep.hp -= ev.damage
                if creep.hp <= 0:
                    creep.hp = 0
                    if ev.source_kind == UnitKind.HERO:
                        killer = st.heroes[ev.source_side]
                        st.scores[ev.source_side].last_hits += 1
                        killer.gold += cfg.creep_gold
                        killer.exp += cfg.creep_exp
            elif ev.target_kind == UnitKind.TURRET:
                turret = st.turrets[ev.target_uid - 2]
                if turret.hp <= 0:
                    continue
                turret.hp = max(0, turret.hp - ev.damage)
                if turret.hp == 0:
                    st.heroes[1 - turret.side].gold += cfg.turret_gold
            elif ev.target_kind == UnitKind.BASE:
                base = st.bases[ev.target_uid]
                base.hp = max(0, base.hp - ev.damage)
        st.creeps = [c for c in st.creeps if c.hp > 0]

    def _hero_death(self, st: WorldState, hero: HeroState) -> None:
        cfg = self.config
        side = hero.side
        hero.alive = False
        hero.respawn_timer = cfg.respawn_base + cfg.respawn_per_level * (hero.level - 1)
        hero.stun_timer = 0
        st.scores[side].deaths += 1
        st.scores[1 - side].kills += 1
        foe = st.heroes[1 - side]
        foe.gold += cfg.hero_kill_gold
        foe.exp += cfg.hero_kill_exp

    # -- housekeeping ----------------------------------------------------

    def _housekeeping(self, st: WorldState, rng: Rng) -> None:
        cfg = self.config
        next_tick = st.tick + 1
        if next_tick % cfg.wave_period == 0:
            self._spawn_wave(st)
        for side, hero in enumerate(st.heroes):
            arch = self.archetypes[side]
            if hero.alive:
                if next_tick % cfg.hp_regen_period == 0:
                    hero.hp = min(hero.max_hp, hero.hp + 1)
                if next_tick % cfg.mana_regen_period == 0:
                    hero.mana = min(hero.max_mana, hero.mana + 1)
                if next_tick % cfg.gold_trickle_period == 0:
                    hero.gold += 1
            hero.cooldowns = [max(0, c - 1) for c in hero.cooldowns]
            hero.stun_timer = max(0, hero.stun_timer - 1)
            if not hero.alive:
                hero.respawn_timer -= 1
                if hero.respawn_timer <= 0:
                    hero.respawn_timer = 0
                    hero.alive = True
                    hero.position = self.gmap.spawns[side]
                    hero.hp = hero.max_hp
                    hero.mana = hero.max_mana
                    hero.cooldowns = [0, 0, 0, 0]
            new_level = min(level_for_exp(hero.exp), MAX_LEVEL)
            if new_level > hero.level:
                old_hp_max, old_mana_max = hero.max_hp, hero.max_mana
                hero.level = new_level
                hero.max_hp = max_hp_at(arch, new_level)
                hero.max_mana = max_mana_at(arch, new_level)
                if hero.alive:
                    hero.hp += hero.max_hp - old_hp_max
                    hero.mana += hero.max_mana - old_mana_max
        for unit in st.creeps + st.turrets:
            unit.attack_cooldown = max(0, unit.attack_cooldown - 1)

    def _spawn_wave(self, st: WorldState) -> None:
        cfg = self.config
        for side in range(2):
            alive = sum(1 for c in st.creeps if c.side == side)
            room = min(cfg.creeps_per_wave, cfg.max_live_creeps - alive)
            tx, ty = self.gmap.turrets[side]
            fwd = 1 if side == 0 else -1
            offsets = ((fwd, 0), (fwd, fwd), (2 * fwd, 0))
            for k in range(room):
                ox, oy = offsets[k % len(offsets)]
                pos = (tx + ox, ty + oy)
                if not self.gmap.free(*pos):
                    pos = (tx, ty)
                st.creeps.append(UnitState(
                    UnitKind.CREEP, side, st.next_uid, pos,
                    cfg.creep_hp, cfg.creep_hp, cfg.creep_range,
                    cfg.creep_damage))
                st.next_uid += 1

    def _check_termination(self, st: WorldState) -> None:
        dead = [s for s in range(2) if st.bases[s].hp <= 0]
        if dead:
            st.terminal = True
            if len(dead) == 1:
                st.winner = 1 - dead[0]
            else:
                # Simultaneous destruction: higher remaining hp wins, tie -> 0.
                st.winner = 0 if st.bases[0].hp >= st.bases[1].hp else 1
        elif st.tick >= self.config.tick_cap:
            st.terminal = True
            st.winner = None  # draw by time-out


# ---------------------------------------------------------------- helpers

def _enemy_flesh(state: WorldState, side: int):
    """Enemy heroes and creeps (skill-targetable units)."""
    foe = state.heroes[1 - side]
    if foe.alive:
        yield (UnitKind.HERO, foe)
    for c in state.creeps:
        if c.side != side and c.hp > 0:
            yield (UnitKind.CREEP, c)


def _enemy_all(state: WorldState, side: int):
    yield from _enemy_flesh(state, side)
    if state.turrets[1 - side].hp > 0:
        yield (UnitKind.TURRET, state.turrets[1 - side])
    yield (UnitKind.BASE, state.bases[1 - side])


def observable_units(env: MobaEnv, state: WorldState, side: int
                     ) -> list[tuple[UnitKind, object]]:
    """Attention-slot ordering: type-major and viewer-relative. Self hero,
    enemy hero, own creeps then enemy creeps (each capped at the config
    limit keeping the nearest, listed by uid), own turret, enemy turret,
    own base, enemy base. Viewer-relative slots make mirrored states
    produce identical slot lists with the sides relabelled."""
    me = state.heroes[side]
    units: list[tuple[UnitKind, object]] = [
        (UnitKind.HERO, me), (UnitKind.HERO, state.heroes[1 - side])]
    cap = env.config.max_obs_creeps
    for creep_side in (side, 1 - side):
        group = [c for c in state.creeps if c.side == creep_side]
        group.sort(key=lambda c: (dist(me.position, c.position), c.uid))
        group = sorted(group[:cap], key=lambda c: c.uid)
        units.extend((UnitKind.CREEP, c) for c in group)
    units.append((UnitKind.TURRET, state.turrets[side]))
    units.append((UnitKind.TURRET, state.turrets[1 - side]))
    units.append((UnitKind.BASE, state.bases[side]))
    units.append((UnitKind.BASE, state.bases[1 - side]))
    return units


def swap_sides(state: WorldState, gmap: GameMap) -> WorldState:
    """Relabel side 0 <-> 1 and mirror all positions. Used to express the
    mirrored-extraction property in tests."""
    st = clone_state(state)
    st.heroes = [st.heroes[1], st.heroes[0]]
    st.turrets = [st.turrets[1], st.turrets[0]]
    st.bases = [st.bases[1], st.bases[0]]
    st.scores = [st.scores[1], st.scores[0]]
    for h in st.heroes:
        h.side = 1 - h.side
        h.position = gmap.mirror(h.position)
    for group in (st.creeps, st.turrets, st.bases):
        for u in group:
            u.side = 1 - u.side
            u.position = gmap.mirror(u.position)
    if st.winner is not None:
        st.winner = 1 - st.winner
    return st


def state_digest(state: WorldState) -> str:
    """Stable content hash of a world state (trajectory fingerprinting)."""
    h = hashlib.blake2b(digest_size=16)

    def put(*vals):
        h.update(repr(vals).encode())

    put(state.tick, state.rng_state, state.terminal, state.winner,
        state.next_uid, state.illegal_actions)
    for hero in state.heroes:
        put(hero.side, hero.uid, hero.archetype, hero.position, hero.hp,
            hero.max_hp, hero.mana, hero.max_mana, hero.gold, hero.exp,
            hero.level, tuple(hero.cooldowns), hero.alive,
            hero.respawn_timer, hero.stun_timer)
    for group in (state.creeps, state.turrets, state.bases):
        for u in group:
            put(int(u.unit_type), u.side, u.uid, u.position, u.hp, u.max_hp,
                u.attack_range, u.attack_damage, u.attack_cooldown)
    for sc in state.scores:
        put(sc.kills, sc.deaths, sc.last_hits)
    return h.hexdigest()
