"""Result artifacts: match CSVs, JSON summaries, snapshot-file loading."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from ..net.model import NetConfig, build_net
from ..runtime.snapshot import ModelSnapshot
from .ablation import AblationReport
from .agents import PolicyAgent
from .errors import EvalError
from .match import MatchResult
from .tournament import TournamentResult

CSV_FIELDS = ("a_id", "b_id", "winner", "ticks", "a_side",
              "a_kills", "b_kills", "a_gold_per_min", "b_gold_per_min",
              "a_exp_per_min", "b_exp_per_min", "seed")


def write_match_csv(path: str | Path, results: list[MatchResult]) -> None:
    """One MatchResult per row."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_FIELDS)
        for r in results:
            w.writerow((r.a_id, r.b_id, r.winner, r.ticks, r.a_side,
                        r.kills[0], r.kills[1],
                        f"{r.gold_per_min[0]:.6f}", f"{r.gold_per_min[1]:.6f}",
                        f"{r.exp_per_min[0]:.6f}", f"{r.exp_per_min[1]:.6f}",
                        r.seed))


def read_match_csv(path: str | Path) -> list[MatchResult]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_FIELDS:
            raise EvalError(f"{path}: unexpected match CSV header {header}")
        out = []
        for row in reader:
            if len(row) != len(CSV_FIELDS):
                raise EvalError(f"{path}: malformed row {row}")
            out.append(MatchResult(
                a_id=row[0], b_id=row[1], winner=row[2], ticks=int(row[3]),
                a_side=int(row[4]), kills=(int(row[5]), int(row[6])),
                gold_per_min=(float(row[7]), float(row[8])),
                exp_per_min=(float(row[9]), float(row[10])),
                seed=int(row[11])))
        return out


def tournament_summary(tr: TournamentResult) -> dict:
    names = sorted(tr.table.ratings)
    return {
        "participants": names,
        "ratings": {n: round(tr.table.ratings[n], 3) for n in names},
        "games": {n: tr.table.games[n] for n in names},
        "matches": len(tr.results),
        "voided": tr.voided,
    }


def ablation_summary(report: AblationReport) -> dict:
    return {
        "arms": sorted(report.arms),
        "games_per_pair": report.games_per_pair,
        "pairwise_win_rate": {f"{a}|{b}": round(rate, 4)
                              for (a, b), rate in sorted(report.pairwise.items())},
        "convergence_updates": report.convergence(),
        "probes": {
            name: [{"updates": p.updates, "win_rate": round(p.win_rate, 4),
                    "elo": round(p.elo, 2)} for p in r.probes]
            for name, r in sorted(report.arms.items())
        },
    }


def write_summary(path: str | Path, summary: dict) -> None:
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def save_snapshot_file(path: str | Path, snapshot: ModelSnapshot) -> None:
    Path(path).write_bytes(snapshot.to_bytes())


def load_snapshot_file(path: str | Path) -> ModelSnapshot:
    return ModelSnapshot.from_bytes(Path(path).read_bytes())


def load_policy_agent(path: str | Path, net_config: NetConfig,
                      name: str | None = None,
                      temperature: float = 0.0) -> PolicyAgent:
    """Build a playable agent from a snapshot file written by the runtime."""
    snap = load_snapshot_file(path)
    _, params = build_net(net_config, seed=0)
    loaded = snap.to_params(params.layout)
    return PolicyAgent.from_params(name or f"snapshot-v{snap.version}",
                                   net_config, loaded, temperature)
