"""Single evaluation matches and their statistics row."""
from __future__ import annotations

from dataclasses import dataclass

from ..env.world import MobaEnv, WorldState
from .agents import Agent
from .errors import EvalError

TICK_SECONDS = 0.133  # nominal wall-clock seconds per tick


@dataclass(frozen=True)
class MatchResult:
    """One game between participants a and b (a_side says who sat side 0)."""

    a_id: str
    b_id: str
    winner: str                      # "a" | "b" | "draw"
    ticks: int
    a_side: int
    kills: tuple[int, int]           # (a, b)
    gold_per_min: tuple[float, float]
    exp_per_min: tuple[float, float]
    seed: int

    def __post_init__(self):
        if self.winner not in ("a", "b", "draw"):
            raise EvalError(f"winner must be a/b/draw, got {self.winner!r}")
        if self.ticks < 0 or min(self.kills) < 0 \
                or min(self.gold_per_min) < 0 or min(self.exp_per_min) < 0:
            raise EvalError("match statistics must be non-negative")

    @property
    def nominal_minutes(self) -> float:
        return self.ticks * TICK_SECONDS / 60.0


def play_game(env: MobaEnv, agents: tuple[Agent, Agent], seed: int,
              start_mode: str = "zero_start") -> WorldState:
    """Run one full game; agents[i] controls side i. Returns the final state."""
    state = env.reset(seed, start_mode=start_mode)
    agents[0].begin(env, seed)
    agents[1].begin(env, seed)
    while not state.terminal:
        cmds = (agents[0].act(env, state, 0), agents[1].act(env, state, 1))
        state = env.step(state, cmds)[0]
    return state


def play_match(env: MobaEnv, a: Agent, b: Agent, seed: int, a_side: int = 0,
               start_mode: str = "zero_start") -> MatchResult:
    """One game between a and b with a playing `a_side`."""
    if a_side not in (0, 1):
        raise EvalError(f"a_side must be 0 or 1, got {a_side}")
    sides = (a, b) if a_side == 0 else (b, a)
    final = play_game(env, sides, seed, start_mode)
    if final.winner is None:
        winner = "draw"
    else:
        winner = "a" if final.winner == a_side else "b"
    minutes = max(final.tick, 1) * TICK_SECONDS / 60.0

    def per_side(side: int) -> tuple[int, float, float]:
        hero = final.heroes[side]
        return (final.scores[side].kills, hero.gold / minutes,
                hero.exp / minutes)

    ka, ga, xa = per_side(a_side)
    kb, gb, xb = per_side(1 - a_side)
    return MatchResult(a_id=a.name, b_id=b.name, winner=winner,
                       ticks=final.tick, a_side=a_side, kills=(ka, kb),
                       gold_per_min=(ga, gb), exp_per_min=(xa, xb),
                       seed=seed)
