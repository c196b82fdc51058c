"""Shared fixtures and helpers for the test suite."""
from __future__ import annotations

import os

import pytest

from minimoba.env import EnvConfig, MobaEnv, scripted_bot_action


def long_runs_enabled() -> bool:
    return os.environ.get("RUN_LONG_ACCEPTANCE", "") not in ("", "0")


@pytest.fixture
def env() -> MobaEnv:
    return MobaEnv(EnvConfig())


def play_scripted(env: MobaEnv, seed: int, max_ticks: int | None = None,
                  randomize_positions: bool = False):
    """Run a scripted-vs-scripted game; returns the list of states (incl. start)."""
    state = env.reset(seed=seed, randomize_positions=randomize_positions)
    states = [state]
    cap = max_ticks if max_ticks is not None else env.config.tick_cap
    while not state.terminal and state.tick < cap:
        acts = (scripted_bot_action(env, state, 0),
                scripted_bot_action(env, state, 1))
        state, _, _ = env.step(state, acts)
        states.append(state)
    return states
