"""Reward arithmetic: hand-computed oracles and the zero-sum property."""
from __future__ import annotations

import math

from hypothesis import given, settings, strategies as st

from minimoba.env import (
    ActionCommand,
    Button,
    EnvConfig,
    MobaEnv,
    RewardWeights,
    compute_reward,
    observable_units,
    random_bot_action,
    reward_components,
    scripted_bot_action,
)
from minimoba.env.reward import COMPONENT_NAMES
from minimoba.rng import Rng

NOOP = ActionCommand()

# Published component weights, asserted independently of the dataclass
# defaults so a silent change to either side trips the suite.
EXPECTED_WEIGHTS = {
    "hp_point": 2.0,
    "tower_hp_point": 10.0,
    "money": 0.008,
    "ep_rate": 0.8,
    "death": -1.0,
    "kill": -0.5,
    "exp": 0.008,
    "last_hit": 0.5,
}


def test_default_weights_match_published_table():
    w = RewardWeights()
    for name, value in EXPECTED_WEIGHTS.items():
        assert getattr(w, name) == value
    assert set(COMPONENT_NAMES) == set(EXPECTED_WEIGHTS)


def test_idle_tick_reward_hand_computed(env):
    """Tick 1 from reset: no regen/trickle lands (periods 4/2/5), so every
    delta is zero and both rewards are exactly 0."""
    s0 = env.reset(seed=0)
    s1, rews, _ = env.step(s0, (NOOP, NOOP))
    assert rews[0].final == 0.0 and rews[1].final == 0.0
    assert all(v == 0.0 for v in rews[0].components.values())


def test_gold_trickle_reward_hand_computed(env):
    """Step to tick 5: hp +1 at tick 4 is invisible at full health; mana at
    full likewise; at tick 5 each hero gains 1 gold -> money delta 1 for
    both sides, raw = 0.008, final = raw - raw_opp = 0."""
    st = env.reset(seed=0)
    for _ in range(4):
        st, rews, _ = env.step(st, (NOOP, NOOP))
        assert rews[0].final == 0.0
    st, rews, _ = env.step(st, (NOOP, NOOP))
    assert st.tick == 5
    assert rews[0].components["money"] == 0.008 * 1
    assert rews[1].components["money"] == 0.008 * 1
    assert rews[0].final == 0.0  # symmetric gain cancels


def test_damage_reward_hand_computed(env):
    """An attack that removes d hp yields hp_point = 2 * (-d / max_hp) for
    the victim and a final reward of +|that| for the attacker."""
    st = env.reset(seed=7)
    st.heroes[0].position = (2, 12)
    st.heroes[1].position = (3, 12)
    tgt = next(i for i, (_, u) in enumerate(observable_units(env, st, 0))
               if u is st.heroes[1])
    nxt, rews, _ = env.step(st, (ActionCommand(Button.ATTACK, 0, 0, 0, 0, tgt), NOOP))
    d = st.heroes[1].hp - nxt.heroes[1].hp
    assert d > 0
    expected_victim_hp = 2.0 * (-d / nxt.heroes[1].max_hp)
    assert math.isclose(rews[1].components["hp_point"], expected_victim_hp,
                        rel_tol=0, abs_tol=1e-12)
    # attacker gained nothing raw; final = 0 - raw_victim
    assert rews[0].final == -rews[1].raw + rews[0].raw


def test_kill_event_rewards_hand_computed(env):
    """A kill tick books kill/death/exp/gold deltas with published weights."""
    st = env.reset(seed=8)
    st.heroes[0].position = (2, 12)
    st.heroes[1].position = (3, 12)
    st.heroes[1].hp = 1
    tgt = next(i for i, (_, u) in enumerate(observable_units(env, st, 0))
               if u is st.heroes[1])
    nxt, rews, _ = env.step(st, (ActionCommand(Button.ATTACK, 0, 0, 0, 0, tgt), NOOP))
    assert nxt.scores[0].kills == 1
    cfg = env.config
    # killer raw components
    assert rews[0].components["kill"] == -0.5 * 1
    assert rews[0].components["money"] == 0.008 * cfg.hero_kill_gold
    assert rews[0].components["exp"] == 0.008 * cfg.hero_kill_exp
    # victim raw components: death, plus the hp it lost (1 point of max)
    assert rews[1].components["death"] == -1.0 * 1
    assert rews[1].components["hp_point"] == 2.0 * (-1 / nxt.heroes[1].max_hp)
    # zero sum holds on an eventful tick
    assert rews[0].final + rews[1].final == 0.0


def test_turret_destruction_reward_hand_computed(env):
    st = env.reset(seed=9)
    st.turrets[1].hp = 1
    st.heroes[0].position = (21, 16)
    tgt = next(i for i, (_, u) in enumerate(observable_units(env, st, 0))
               if u is st.turrets[1])
    nxt, rews, _ = env.step(st, (ActionCommand(Button.ATTACK, 0, 0, 0, 0, tgt), NOOP))
    assert nxt.turrets[1].hp == 0
    # victim loses 1/350 of turret fraction, weighted 10; killer banks gold
    lost = 1 / st.turrets[1].max_hp
    assert math.isclose(rews[1].components["tower_hp_point"], -10.0 * lost,
                        rel_tol=0, abs_tol=1e-12)
    assert rews[0].components["money"] == 0.008 * (env.config.turret_gold)


def test_weights_are_configurable(env):
    st = env.reset(seed=10)
    st.heroes[0].position = (2, 12)
    st.heroes[1].position = (3, 12)
    tgt = next(i for i, (_, u) in enumerate(observable_units(env, st, 0))
               if u is st.heroes[1])
    cmds = (ActionCommand(Button.ATTACK, 0, 0, 0, 0, tgt), NOOP)
    nxt, _, _ = env.step(st, cmds)
    doubled = RewardWeights(hp_point=4.0)
    normal = reward_components(st, nxt, 1, RewardWeights())
    heavy = reward_components(st, nxt, 1, doubled)
    assert heavy.components["hp_point"] == 2 * normal.components["hp_point"]


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_zero_sum_exact_over_random_play(seed):
    env = MobaEnv(EnvConfig())
    rng = Rng(seed)
    state = env.reset(seed=seed % 997, randomize_positions=True)
    for _ in range(40):
        if state.terminal:
            break
        acts = (random_bot_action(env, state, 0, rng),
                random_bot_action(env, state, 1, rng))
        prev = state
        state, rews, _ = env.step(state, acts)
        assert rews[0].final + rews[1].final == 0.0  # exact, not approximate
        assert rews[0].final == compute_reward(prev, state, 0, env.config.reward_weights)


def test_zero_sum_exact_over_scripted_game(env):
    state = env.reset(seed=17)
    while not state.terminal:
        acts = (scripted_bot_action(env, state, 0),
                scripted_bot_action(env, state, 1))
        state, rews, _ = env.step(state, acts)
        assert rews[0].final + rews[1].final == 0.0
        assert rews[0].final == -rews[1].final


def test_components_cover_all_names(env):
    st = env.reset(seed=11)
    nxt, rews, _ = env.step(st, (NOOP, NOOP))
    assert tuple(rews[0].components.keys()) == COMPONENT_NAMES
