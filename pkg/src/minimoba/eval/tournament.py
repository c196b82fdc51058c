"""Round-robin tournaments with Elo scoring and defeat-time statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..env.world import EnvError, MobaEnv
from ..runtime.checksum import fnv1a_64
from .agents import Agent
from .elo import DEFAULT_K, EloTable, update_elo
from .errors import EvalError
from .match import MatchResult, play_match

_SEED_MASK = (1 << 63) - 1
_VOID_RETRIES = 3


def pair_key(name_a: str, name_b: str) -> tuple[str, str]:
    """Canonical unordered identity of a pairing."""
    return (name_a, name_b) if name_a <= name_b else (name_b, name_a)


def game_seed(base_seed: int, name_a: str, name_b: str, game: int,
              attempt: int = 0) -> int:
    """Deterministic seed for one game of one pairing.

    Derived from the canonical pair identity so the schedule does not depend
    on the order participants were supplied in.
    """
    lo, hi = pair_key(name_a, name_b)
    tag = f"{lo}\x1f{hi}\x1f{game}\x1f{attempt}".encode()
    return (fnv1a_64(tag) ^ (base_seed * 0x9E3779B97F4A7C15)) & _SEED_MASK


@dataclass
class TournamentResult:
    table: EloTable
    results: list[MatchResult] = field(default_factory=list)
    voided: int = 0

    def record(self, a_id: str, b_id: str) -> tuple[int, int, int]:
        """(wins, losses, draws) for a_id against b_id."""
        wins = losses = draws = 0
        for r in self.results:
            if {r.a_id, r.b_id} != {a_id, b_id}:
                continue
            winner = r.a_id if r.winner == "a" else r.b_id if r.winner == "b" else None
            if winner is None:
                draws += 1
            elif winner == a_id:
                wins += 1
            else:
                losses += 1
        return wins, losses, draws


def run_tournament(env: MobaEnv, agents: list[Agent], games_per_pair: int,
                   base_seed: int, k: float = DEFAULT_K,
                   start_mode: str = "zero_start") -> TournamentResult:
    """Every pair plays games_per_pair games, alternating sides.

    Ratings are updated from the result list sorted by (pair, seed), so the
    final table is invariant to the order agents are listed in.
    """
    if games_per_pair < 1:
        raise EvalError("games_per_pair must be >= 1")
    names = [a.name for a in agents]
    if len(set(names)) != len(names):
        raise EvalError("participant names must be unique")
    table = EloTable()
    for name in sorted(names):
        table.register(name)
    out = TournamentResult(table=table)

    by_name = {a.name: a for a in agents}
    pairs = sorted({pair_key(x, y) for i, x in enumerate(names)
                    for y in names[i + 1:]})
    for lo, hi in pairs:
        for g in range(games_per_pair):
            a, b = by_name[lo], by_name[hi]
            a_side = g % 2
            for attempt in range(_VOID_RETRIES + 1):
                seed = game_seed(base_seed, lo, hi, g, attempt)
                try:
                    out.results.append(
                        play_match(env, a, b, seed, a_side, start_mode))
                    break
                except EnvError:
                    out.voided += 1
            else:
                raise EvalError(
                    f"game {g} of {lo} vs {hi}: all retries voided")

    # Apply ratings in a canonical order so enumeration order cannot matter.
    for result in sorted(out.results, key=lambda r: (r.a_id, r.b_id, r.seed)):
        update_elo(table, result, k)
    return out


def time_to_defeat(results: list[MatchResult], agent_id: str
                   ) -> tuple[float, float]:
    """(mean, half-width of a 95% CI) of nominal minutes in games won.

    Draws and games the agent did not win are excluded.
    """
    minutes = []
    for r in results:
        winner = r.a_id if r.winner == "a" else r.b_id if r.winner == "b" else None
        if winner == agent_id:
            minutes.append(r.nominal_minutes)
    if not minutes:
        raise EvalError(f"{agent_id!r} won no games; time to defeat undefined")
    n = len(minutes)
    mean = sum(minutes) / n
    if n == 1:
        return mean, 0.0
    var = sum((m - mean) ** 2 for m in minutes) / (n - 1)
    return mean, 1.96 * math.sqrt(var / n)
