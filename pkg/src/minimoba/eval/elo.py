"""Elo ratings over match outcomes.

Ratings start at 1200; with a uniform K-factor every update moves the two
participants by opposite amounts, so the rating sum is conserved exactly
(up to float addition) across any update sequence.
"""
from __future__ import annotations

from .errors import EvalError

INITIAL_RATING = 1200.0
DEFAULT_K = 32.0


def expected_score(r_a: float, r_b: float) -> float:
    """Probability-like expected score of `a` against `b`."""
    return 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / 400.0))


class EloTable:
    """Map from participant id to (rating, games played)."""

    def __init__(self):
        self.ratings: dict[str, float] = {}
        self.games: dict[str, int] = {}

    def register(self, pid: str) -> None:
        if pid in self.ratings:
            raise EvalError(f"participant {pid!r} already registered")
        self.ratings[pid] = INITIAL_RATING
        self.games[pid] = 0

    def rating(self, pid: str) -> float:
        try:
            return self.ratings[pid]
        except KeyError:
            raise EvalError(f"unknown participant {pid!r}") from None

    def update(self, a: str, b: str, score_a: float,
               k: float = DEFAULT_K) -> None:
        """Apply one game: score_a is 1 (a won), 0.5 (draw) or 0."""
        if a not in self.ratings or b not in self.ratings:
            missing = a if a not in self.ratings else b
            raise EvalError(f"unknown participant {missing!r}")
        if score_a not in (0.0, 0.5, 1.0):
            raise EvalError(f"score must be 0, 0.5 or 1, got {score_a}")
        ea = expected_score(self.ratings[a], self.ratings[b])
        delta = k * (score_a - ea)
        self.ratings[a] += delta
        self.ratings[b] -= delta
        self.games[a] += 1
        self.games[b] += 1

    def total(self) -> float:
        return sum(self.ratings.values())


def update_elo(table: EloTable, result, k: float = DEFAULT_K) -> EloTable:
    """Apply a MatchResult to the table in place (and return it)."""
    score = {"a": 1.0, "b": 0.0, "draw": 0.5}[result.winner]
    table.update(result.a_id, result.b_id, score, k)
    return table
