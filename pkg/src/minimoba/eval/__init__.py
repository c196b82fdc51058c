"""Evaluation harness: Elo, tournaments, defeat-time stats, ablations."""
from .ablation import (AblationReport, ArmSpec, Probe, TrainBudget,
                       ablation_matrix, anchored_elo, pairwise_win_rate,
                       probe_vs_scripted, standard_arms, train_arm,
                       SCRIPTED_ANCHOR)
from .agents import Agent, PolicyAgent, RandomAgent, ScriptedAgent
from .elo import (DEFAULT_K, INITIAL_RATING, EloTable, expected_score,
                  update_elo)
from .errors import EvalError
from .match import MatchResult, TICK_SECONDS, play_game, play_match
from .report import (CSV_FIELDS, ablation_summary, load_policy_agent,
                     load_snapshot_file, read_match_csv, save_snapshot_file,
                     tournament_summary, write_match_csv, write_summary)
from .tournament import (TournamentResult, game_seed, pair_key,
                         run_tournament, time_to_defeat)

__all__ = [
    "AblationReport", "Agent", "ArmSpec", "CSV_FIELDS", "DEFAULT_K",
    "EloTable", "EvalError", "INITIAL_RATING", "MatchResult", "PolicyAgent",
    "Probe", "RandomAgent", "SCRIPTED_ANCHOR", "ScriptedAgent",
    "TICK_SECONDS", "TournamentResult", "TrainBudget", "ablation_matrix",
    "ablation_summary", "anchored_elo", "expected_score", "game_seed",
    "load_policy_agent", "load_snapshot_file", "pair_key",
    "pairwise_win_rate", "play_game", "play_match", "probe_vs_scripted",
    "read_match_csv", "run_tournament", "save_snapshot_file",
    "standard_arms", "time_to_defeat", "tournament_summary", "train_arm",
    "update_elo", "write_match_csv", "write_summary",
]
