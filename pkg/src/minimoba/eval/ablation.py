"""Equal-budget ablation arms: each technique toggle trained and compared.

Every arm runs the same in-process self-play loop — same seeds, same episode
budget, same optimizer settings — differing only in the toggles under study:
action masking, target attention, the recurrent core, full vs partial
rollouts, and the episode start mode.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from ..env.world import EnvConfig, EnvError, MobaEnv
from ..learner.core import Learner, make_learner, train_on_batch
from ..learner.ppo import PPOConfig
from ..net.model import NetConfig, build_net
from ..net.params import Params
from ..rng import Rng
from ..runtime.actor import ActorConfig, play_episode
from ..runtime.checksum import fnv1a_64
from ..runtime.pool import MemoryPool
from .agents import Agent, PolicyAgent, ScriptedAgent
from .errors import EvalError
from .match import MatchResult, play_match
from .tournament import game_seed

SCRIPTED_ANCHOR = 1200.0  # ratings are relative; the scripted bot is the anchor

_ROLLOUTS = ("full", "partial")
_STARTS = ("zero_start", "random_initial_frame")


@dataclass(frozen=True)
class ArmSpec:
    name: str
    action_mask: bool = True
    target_attention: bool = True
    recurrent: bool = True
    rollout: str = "full"
    start_mode: str = "random_initial_frame"

    def __post_init__(self):
        if self.rollout not in _ROLLOUTS:
            raise EvalError(f"rollout must be one of {_ROLLOUTS}")
        if self.start_mode not in _STARTS:
            raise EvalError(f"start_mode must be one of {_STARTS}")


def standard_arms() -> tuple[ArmSpec, ...]:
    """The full matrix: everything on, everything off, and one-off removals."""
    full = ArmSpec("full")
    return (
        full,
        ArmSpec("base", action_mask=False, target_attention=False,
                recurrent=False, rollout="partial", start_mode="zero_start"),
        dataclasses.replace(full, name="no_am", action_mask=False),
        dataclasses.replace(full, name="no_ta", target_attention=False),
        dataclasses.replace(full, name="no_lstm", recurrent=False),
        dataclasses.replace(full, name="pr", rollout="partial"),
        dataclasses.replace(full, name="zs", start_mode="zero_start"),
    )


@dataclass(frozen=True)
class TrainBudget:
    episodes: int = 40
    batch_segments: int = 16
    pool_capacity: int = 256
    recency_bias: float = 0.05
    probe_every: int = 4          # self-play episodes between probes
    probe_games: int = 8
    elo_threshold: float = SCRIPTED_ANCHOR

    def __post_init__(self):
        if self.episodes < 1 or self.batch_segments < 1 \
                or self.pool_capacity < 1 or self.probe_every < 1 \
                or self.probe_games < 1:
            raise EvalError("budget fields must be positive")


@dataclass(frozen=True)
class Probe:
    updates: int       # learner updates completed when the probe ran
    win_rate: float    # vs the scripted bot, draws as half
    elo: float         # anchored at the scripted bot's rating


@dataclass
class ArmResult:
    spec: ArmSpec
    net_config: NetConfig
    params: Params
    probes: list[Probe] = field(default_factory=list)
    updates: int = 0
    episodes: int = 0

    @property
    def updates_to_threshold(self) -> int | None:
        """Learner updates at the first probe meeting the Elo threshold."""
        for p in self.probes:
            if p.elo >= self._threshold:
                return p.updates
        return None

    _threshold: float = SCRIPTED_ANCHOR


def anchored_elo(win_rate: float, games: int,
                 anchor: float = SCRIPTED_ANCHOR) -> float:
    """Rating whose expected score against the anchor equals win_rate.

    The rate is clamped to (1/(games+1), games/(games+1)) so perfect records
    stay finite.
    """
    lo = 1.0 / (games + 1)
    p = min(max(win_rate, lo), 1.0 - lo)
    return anchor + 400.0 * math.log10(p / (1.0 - p))


def _match_with_retries(env, a: Agent, b: Agent, seed: int, a_side: int,
                        start_mode: str = "zero_start",
                        retries: int = 3) -> MatchResult:
    for attempt in range(retries + 1):
        try:
            return play_match(env, a, b, (seed + attempt) & (2**63 - 1),
                              a_side, start_mode)
        except EnvError:
            continue
    raise EvalError("match voided on every reseed attempt")


def probe_vs_scripted(params: Params, net_config: NetConfig, env: MobaEnv,
                      games: int, seed: int) -> tuple[float, float]:
    """(win rate, anchored Elo) of a greedy snapshot against the bot."""
    agent = PolicyAgent.from_params("probe", net_config, params)
    bot = ScriptedAgent()
    score = 0.0
    for g in range(games):
        res = _match_with_retries(
            env, agent, bot, game_seed(seed, "probe", "scripted", g),
            a_side=g % 2)
        score += 1.0 if res.winner == "a" else 0.5 if res.winner == "draw" else 0.0
    rate = score / games
    return rate, anchored_elo(rate, games)


def train_arm(arm: ArmSpec, budget: TrainBudget, env_config: EnvConfig,
              net_config: NetConfig, ppo_config: PPOConfig, seed: int,
              elo_threshold: float | None = None) -> ArmResult:
    """Self-play train one arm under the budget; probe against the bot.

    Identical (arm-independent) seeds drive episode starts and sampling, so
    arms differ only through their toggles.
    """
    arm_net_config = dataclasses.replace(net_config, recurrent=arm.recurrent)
    disabled = () if arm.target_attention else ("target",)
    arm_ppo = dataclasses.replace(ppo_config, disabled_heads=disabled)
    learner = make_learner(arm_net_config, arm_ppo, seed=seed)
    actor_cfg = ActorConfig(action_mask=arm.action_mask, rollout=arm.rollout,
                            start_mode=arm.start_mode,
                            gamma=arm_ppo.gamma, lam=arm_ppo.lam)

    env = MobaEnv(env_config)
    pool = MemoryPool(budget.pool_capacity)
    net, _ = build_net(arm_net_config, seed=0)
    net.load_flat(learner.snapshot())
    rng = Rng(seed ^ 0xA5A5A5A5)
    threshold = budget.elo_threshold if elo_threshold is None else elo_threshold
    result = ArmResult(spec=arm, net_config=arm_net_config,
                       params=learner.snapshot(), _threshold=threshold)

    for ep in range(budget.episodes):
        ep_seed = game_seed(seed, "selfplay", "selfplay", ep)
        try:
            outcome = play_episode(env, (net, net),
                                   (learner.version, learner.version),
                                   ep_seed, rng, actor_cfg)
        except EnvError:
            continue
        result.episodes += 1
        pool.push(outcome.segments[0])
        pool.push(outcome.segments[1])
        if len(pool) >= budget.batch_segments:
            segs, _ = pool.sample(budget.batch_segments,
                                  budget.recency_bias, rng)
            train_on_batch(learner, segs, n_shards=1)
            net.load_flat(learner.snapshot())
        if (ep + 1) % budget.probe_every == 0:
            rate, elo = probe_vs_scripted(
                learner.snapshot(), arm_net_config, env,
                budget.probe_games, game_seed(seed, arm.name, "probe", ep))
            result.probes.append(Probe(learner.updates, rate, elo))

    result.params = learner.snapshot()
    result.updates = learner.updates
    return result


@dataclass
class AblationReport:
    arms: dict[str, ArmResult]
    pairwise: dict[tuple[str, str], float]   # (a, b) -> a's score share
    matches: list[MatchResult]
    games_per_pair: int

    def convergence(self) -> dict[str, int | None]:
        return {name: r.updates_to_threshold for name, r in self.arms.items()}


def pairwise_win_rate(matches: list[MatchResult], a_id: str,
                      b_id: str) -> float:
    """a_id's score share (wins + half draws) against b_id."""
    score, games = 0.0, 0
    for r in matches:
        if {r.a_id, r.b_id} != {a_id, b_id}:
            continue
        games += 1
        if r.winner == "draw":
            score += 0.5
        elif (r.a_id if r.winner == "a" else r.b_id) == a_id:
            score += 1.0
    if games == 0:
        raise EvalError(f"no games between {a_id!r} and {b_id!r}")
    return score / games


def ablation_matrix(arms: tuple[ArmSpec, ...], budget: TrainBudget,
                    env_config: EnvConfig, net_config: NetConfig,
                    ppo_config: PPOConfig, seed: int,
                    games_per_pair: int = 20) -> AblationReport:
    """Train every arm under the same budget, then cross-play them greedily."""
    names = [a.name for a in arms]
    if len(set(names)) != len(names):
        raise EvalError("arm names must be unique")
    if games_per_pair < 1:
        raise EvalError("games_per_pair must be >= 1")

    results = {arm.name: train_arm(arm, budget, env_config, net_config,
                                   ppo_config, seed) for arm in arms}
    env = MobaEnv(env_config)
    agents = {name: PolicyAgent.from_params(name, r.net_config, r.params)
              for name, r in results.items()}

    matches: list[MatchResult] = []
    pair_seed = seed ^ fnv1a_64(b"ablation-pairwise")
    ordered = sorted(names)
    for i, lo in enumerate(ordered):
        for hi in ordered[i + 1:]:
            for g in range(games_per_pair):
                matches.append(_match_with_retries(
                    env, agents[lo], agents[hi],
                    game_seed(pair_seed, lo, hi, g), a_side=g % 2))

    pairwise = {}
    for i, lo in enumerate(ordered):
        for hi in ordered[i + 1:]:
            rate = pairwise_win_rate(matches, lo, hi)
            pairwise[(lo, hi)] = rate
            pairwise[(hi, lo)] = 1.0 - rate
    return AblationReport(arms=results, pairwise=pairwise, matches=matches,
                          games_per_pair=games_per_pair)
