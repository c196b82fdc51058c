"""Action-mask clauses and the legality contract."""
from __future__ import annotations

import numpy as np
from hypothesis import given, settings, strategies as st

from minimoba.env import (
    ActionCommand,
    Button,
    EnvConfig,
    MobaEnv,
    SKILL_BUTTONS,
    action_is_legal,
    legal_action_mask,
    observable_units,
    random_bot_action,
    scripted_bot_action,
)
from minimoba.env.types import BIN_VALUES, N_BUTTONS
from minimoba.rng import Rng
from tests.conftest import play_scripted


# ------------------------------------------------- clause 1: obstacles

def test_move_bins_match_map_geometry_everywhere(env):
    """Brute force: each axis bin is legal iff the adjacent cell that way
    is free, for every free cell of the arena."""
    state = env.reset(seed=0)
    for x in range(env.gmap.width):
        for y in range(env.gmap.height):
            if env.gmap.blocked(x, y):
                continue
            state.heroes[0].position = (x, y)
            mask = legal_action_mask(env, state, 0)
            for b, v in enumerate(BIN_VALUES):
                sx = 1 if v > 0 else -1
                assert mask.move_x[b] == env.gmap.free(x + sx, y)
                assert mask.move_y[b] == env.gmap.free(x, y + sx)


def test_move_masks_are_total(env):
    state = env.reset(seed=0)
    for x in range(env.gmap.width):
        for y in range(env.gmap.height):
            if env.gmap.blocked(x, y):
                continue
            state.heroes[0].position = (x, y)
            mask = legal_action_mask(env, state, 0)
            assert mask.move_x.any() and mask.move_y.any()


# ------------------------------------- clause 2: cooldown / mana gating

def test_attack_masked_while_on_cooldown(env):
    state = env.reset(seed=1)
    assert legal_action_mask(env, state, 0).button[Button.ATTACK]
    state.heroes[0].cooldowns[0] = 3
    assert not legal_action_mask(env, state, 0).button[Button.ATTACK]


def test_skill_masked_without_mana(env):
    state = env.reset(seed=1)
    assert legal_action_mask(env, state, 0).button[Button.SKILL1]
    state.heroes[0].mana = 0
    assert not legal_action_mask(env, state, 0).button[Button.SKILL1]


def test_skill_masked_on_cooldown(env):
    state = env.reset(seed=1)
    state.heroes[0].cooldowns[1] = 5
    assert not legal_action_mask(env, state, 0).button[Button.SKILL1]


# ------------------------------------------- clause 3: dead / stunned

def test_dead_hero_noop_only(env):
    state = env.reset(seed=2)
    state.heroes[0].alive = False
    state.heroes[0].respawn_timer = 10
    mask = legal_action_mask(env, state, 0)
    assert mask.button[Button.NOOP]
    assert not mask.button[1:].any()


def test_stunned_hero_noop_only(env):
    state = env.reset(seed=2)
    state.heroes[0].stun_timer = 4
    mask = legal_action_mask(env, state, 0)
    assert mask.button[Button.NOOP]
    assert not mask.button[1:].any()


# ----------------------------------------- clause 4: level unlock gates

def test_skills_gate_on_level(env):
    state = env.reset(seed=3)
    h = state.heroes[0]
    arch = env.archetypes[0]
    assert h.level == 1
    mask = legal_action_mask(env, state, 0)
    for slot in range(3):
        expected = arch.skills[slot].unlock_level <= 1
        assert mask.button[Button.SKILL1 + slot] == expected
    h.level = 6
    h.mana = h.max_mana = 999
    mask = legal_action_mask(env, state, 0)
    assert all(mask.button[Button.SKILL1 + s] for s in range(3))


# --------------------------------------------------------- target head

def test_targets_only_live_enemies_in_command_range(env):
    state = env.reset(seed=4)
    mask = legal_action_mask(env, state, 0)
    units = observable_units(env, state, 0)
    for i, (kind, unit) in enumerate(units):
        if mask.target[i]:
            assert unit.side != 0
            assert unit.hp > 0
    # own hero slot (0) never targetable
    assert not mask.target[0]


def test_enemy_base_always_targetable(env):
    state = env.reset(seed=4)
    mask = legal_action_mask(env, state, 0)
    units = observable_units(env, state, 0)
    base_slot = next(i for i, (_, u) in enumerate(units) if u is state.bases[1])
    assert mask.target[base_slot]


def test_dead_turret_not_targetable(env):
    state = env.reset(seed=4)
    state.turrets[1].hp = 0
    state.heroes[0].position = (21, 16)  # right next to it
    mask = legal_action_mask(env, state, 0)
    units = observable_units(env, state, 0)
    slot = next(i for i, (_, u) in enumerate(units) if u is state.turrets[1])
    assert not mask.target[slot]


def test_distant_enemy_hero_not_targetable(env):
    state = env.reset(seed=4)  # spawns are ~23 apart, command range is 10
    mask = legal_action_mask(env, state, 0)
    assert not mask.target[1]
    state.heroes[1].position = (8, 15)
    mask = legal_action_mask(env, state, 0)
    assert mask.target[1]


# ------------------------------------------------------- legality contract

def test_noop_always_legal(env):
    state = env.reset(seed=5)
    state.heroes[0].alive = False
    assert action_is_legal(env, state, 0, ActionCommand())


def test_out_of_range_labels_rejected(env):
    state = env.reset(seed=5)
    assert not action_is_legal(env, state, 0, ActionCommand(button=99))
    assert not action_is_legal(
        env, state, 0, ActionCommand(Button.ATTACK, 0, 0, 0, 0, 999))


def test_irrelevant_labels_ignored(env):
    # a move command carrying an untargetable index is still a legal move
    state = env.reset(seed=5)
    cmd = ActionCommand(Button.MOVE, BIN_VALUES.index(4), BIN_VALUES.index(1),
                        0, 0, 0)
    assert action_is_legal(env, state, 0, cmd)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_random_legal_actions_never_coerced(seed):
    env = MobaEnv(EnvConfig())
    rng = Rng(seed)
    state = env.reset(seed=seed % 1000, randomize_positions=True)
    # random-walk into varied mid-game situations, checking as we go
    for _ in range(60):
        if state.terminal:
            break
        acts = (random_bot_action(env, state, 0, rng),
                random_bot_action(env, state, 1, rng))
        assert action_is_legal(env, state, 0, acts[0])
        assert action_is_legal(env, state, 1, acts[1])
        state, _, _ = env.step(state, acts)
    assert state.illegal_actions == 0


def test_random_legal_actions_from_midgame_frame(env):
    rng = Rng(5)
    state = env.reset(seed=11, start_mode="random_initial_frame")
    for _ in range(60):
        if state.terminal:
            break
        acts = (random_bot_action(env, state, 0, rng),
                random_bot_action(env, state, 1, rng))
        assert action_is_legal(env, state, 0, acts[0])
        assert action_is_legal(env, state, 1, acts[1])
        state, _, _ = env.step(state, acts)
    assert state.illegal_actions == 0


def test_scripted_actions_always_legal(env):
    for seed in (0, 1, 2):
        state = env.reset(seed=seed)
        while not state.terminal:
            acts = (scripted_bot_action(env, state, 0),
                    scripted_bot_action(env, state, 1))
            assert action_is_legal(env, state, 0, acts[0])
            assert action_is_legal(env, state, 1, acts[1])
            state, _, _ = env.step(state, acts)
        assert state.illegal_actions == 0


def test_mask_shapes(env):
    state = env.reset(seed=6)
    mask = legal_action_mask(env, state, 0)
    n_units = len(observable_units(env, state, 0))
    assert mask.button.shape == (N_BUTTONS,)
    assert mask.move_x.shape == (len(BIN_VALUES),)
    assert mask.move_y.shape == (len(BIN_VALUES),)
    assert mask.offset_x.shape == (len(BIN_VALUES),)
    assert mask.offset_y.shape == (len(BIN_VALUES),)
    assert mask.target.shape == (n_units,)
    for head in mask.heads():
        assert head.dtype == np.bool_


def test_mask_reflects_skill_buttons(env):
    # SKILL_BUTTONS indexes line up with the button head slots
    assert tuple(SKILL_BUTTONS) == (Button.SKILL1, Button.SKILL2, Button.SKILL3)
