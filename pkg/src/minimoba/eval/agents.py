"""Agents playable in evaluation matches.

An agent is stateful for the duration of one match on one side;
``begin(env, seed)`` resets that state deterministically. ``act`` returns a
world-frame command ready for ``env.step``.
"""
from __future__ import annotations

import numpy as np

from ..env.bot import scripted_bot_action
from ..env.types import ActionCommand
from ..env.world import MobaEnv, WorldState
from ..features.extract import extract_observation, to_world_command
from ..net.model import MobaNet, NetConfig, build_net, forward_observation
from ..net.ops import head_masks, sample_action
from ..net.params import Params
from ..rng import Rng


class Agent:
    """Base contract; subclasses override act()."""

    name = "agent"

    def begin(self, env: MobaEnv, seed: int) -> None:
        pass

    def act(self, env: MobaEnv, state: WorldState,
            side: int) -> ActionCommand:
        raise NotImplementedError


class ScriptedAgent(Agent):
    """The deterministic rule-based baseline."""

    def __init__(self, name: str = "scripted"):
        self.name = name

    def act(self, env, state, side):
        return scripted_bot_action(env, state, side)


class RandomAgent(Agent):
    """Uniform over legal labels each step — the weakest sound policy."""

    def __init__(self, name: str = "random", seed: int = 0):
        self.name = name
        self._base = seed
        self._rng = Rng(seed)

    def begin(self, env, seed):
        self._rng = Rng(self._base ^ (seed * 0x9E3779B97F4A7C15 & (2**64 - 1)))

    def act(self, env, state, side):
        obs = extract_observation(env, state, side)
        labels = []
        for mask in head_masks(obs):
            legal = np.flatnonzero(mask)
            labels.append(int(legal[self._rng.randint(len(legal))]))
        return to_world_command(ActionCommand(*labels), side)


class PolicyAgent(Agent):
    """A network snapshot; greedy at temperature 0 (the default)."""

    def __init__(self, name: str, net: MobaNet, temperature: float = 0.0,
                 seed: int = 0):
        self.name = name
        self.net = net
        self.temperature = temperature
        self._base = seed
        self._rng = Rng(seed)
        self._hidden = None

    @classmethod
    def from_params(cls, name: str, net_config: NetConfig, params: Params,
                    temperature: float = 0.0, seed: int = 0) -> "PolicyAgent":
        net, _ = build_net(net_config, seed=0)
        net.load_flat(params)
        return cls(name, net, temperature, seed)

    def begin(self, env, seed):
        self._rng = Rng(self._base ^ (seed * 0x9E3779B97F4A7C15 & (2**64 - 1)))
        self._hidden = None

    def act(self, env, state, side):
        obs = extract_observation(env, state, side)
        policy, self._hidden = forward_observation(self.net, obs,
                                                   self._hidden)
        labels, _ = sample_action(policy.heads(), head_masks(obs),
                                  self._rng, self.temperature)
        return to_world_command(ActionCommand(*labels), side)
