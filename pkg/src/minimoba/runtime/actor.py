"""Self-play actor: plays mirrored episodes and ships trajectory segments.

Both sides are driven by the same network architecture. The learning side
(side 0) always runs the latest snapshot; the opponent side runs either the
latest snapshot (mirror self-play) or a historical one drawn from the
archive. Side 1's segments are shipped only in the mirror case, so the
learner never trains on a stale policy's actions.

Each step records the canonical-frame observation, masks, sampled labels
(target in padded row space), behaviour probabilities, and the value
estimate; episodes are cut into window-sized segments tagged with the
producing-model version so the learner can measure staleness.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..env.types import ActionCommand
from ..env.world import EnvConfig, EnvError, MobaEnv
from ..features.extract import extract_observation, to_world_command
from ..learner.gae import gae
from ..learner.segment import WINDOW, TrajectorySegment
from ..net.model import HiddenState, MobaNet, NetConfig, build_net, forward_observation
from ..net.ops import head_masks, sample_action
from ..net.params import Params
from ..rng import Rng
from .errors import PipelineError
from .frames import DEFAULT_MAX_FRAME_BYTES, pack_frames
from .service import PoolClient
from .snapshot import ModelSnapshot

# smallest positive normal float32: keeps behaviour probabilities in (0, 1]
# after the float64 -> float32 cast (never reached by real softmax outputs)
_PROB_FLOOR = np.float32(1.1754944e-38)


@dataclass(frozen=True)
class ActorConfig:
    temperature: float = 1.0
    window: int = WINDOW
    latest_prob: float = 0.8        # opponent: latest vs archived snapshot
    start_mode: str = "zero_start"
    randomize_positions: bool = False
    max_frame_bytes: int = DEFAULT_MAX_FRAME_BYTES
    # ablation knobs -------------------------------------------------------
    # action_mask False samples over every structurally valid label (any
    # observed unit is targetable, every button pressable); rule-illegal
    # picks are coerced to no-ops by the environment
    action_mask: bool = True
    # "partial": windows bootstrap with the recorded V(s_T).
    # "full": non-terminal windows carry a corrected bootstrap
    #   V(s_T) + lam * A_T, with A_T the whole-episode advantage at s_T, so
    #   the learner's windowed recursion reproduces full-episode estimates
    rollout: str = "partial"
    gamma: float = 0.997            # only used by the "full" correction
    lam: float = 0.95

    def __post_init__(self):
        if self.rollout not in ("partial", "full"):
            raise PipelineError(f"unknown rollout mode {self.rollout!r}")


@dataclass
class EpisodeOutcome:
    winner: int | None              # None = draw by tick cap
    ticks: int
    segments: tuple[list[TrajectorySegment], list[TrajectorySegment]]
    versions: tuple[int, int]


@dataclass
class ActorStats:
    episodes: int = 0
    aborted: int = 0
    segments_shipped: int = 0
    frames_shipped: int = 0
    wins: list[int] = field(default_factory=lambda: [0, 0])
    draws: int = 0


@dataclass
class _StepRec:
    image: np.ndarray
    units: np.ndarray
    unit_mask: np.ndarray
    globals: np.ndarray
    masks: tuple
    actions: tuple
    probs: np.ndarray
    value: float
    hid: HiddenState
    reward: float = 0.0
    done: bool = False


def play_episode(env: MobaEnv, nets: tuple[MobaNet, MobaNet],
                 versions: tuple[int, int], seed: int, rng: Rng,
                 config: ActorConfig = ActorConfig()) -> EpisodeOutcome:
    """Play one full episode; returns per-side window segments.

    Deterministic given the environment, loaded parameters, seed, the
    sampling rng state and the temperature.
    """
    state = env.reset(seed, start_mode=config.start_mode,
                      randomize_positions=config.randomize_positions)
    width = nets[0].config.lstm_width
    hidden = [HiddenState.zeros(width), HiddenState.zeros(width)]
    recs: tuple[list[_StepRec], list[_StepRec]] = ([], [])

    while not state.terminal:
        world_cmds = []
        for side in (0, 1):
            obs = extract_observation(env, state, side)
            policy, new_hidden = forward_observation(
                nets[side], obs, hidden[side])
            if config.action_mask:
                slot_masks = head_masks(obs)
                stored_masks = obs.legal.heads()
            else:
                slot_masks, stored_masks = _relaxed_masks(obs)
            labels, probs = sample_action(policy.heads(), slot_masks,
                                          rng, config.temperature)
            cmd = ActionCommand(*labels)
            world_cmds.append(to_world_command(cmd, side))
            target_row = int(np.flatnonzero(obs.unit_mask)[labels[5]])
            recs[side].append(_StepRec(
                image=obs.image, units=obs.units, unit_mask=obs.unit_mask,
                globals=obs.globals, masks=stored_masks,
                actions=labels[:5] + (target_row,),
                probs=np.maximum(probs.astype(np.float32), _PROB_FLOOR),
                value=policy.value, hid=hidden[side]))
            hidden[side] = new_hidden
        state, rewards, done = env.step(state, tuple(world_cmds))
        for side in (0, 1):
            recs[side][-1].reward = rewards[side].final
            recs[side][-1].done = done

    now = time.time()
    segments = tuple(
        _slice_segments(recs[side], side, config, versions[side], now)
        for side in (0, 1))
    return EpisodeOutcome(winner=state.winner, ticks=state.tick,
                          segments=segments, versions=versions)


def _relaxed_masks(obs) -> tuple[tuple, tuple]:
    """Mask-ablated legality: everything structurally valid is allowed.

    Returns (slot-space masks for sampling, padded masks for the segment).
    """
    full = [np.ones_like(m) for m in obs.legal.heads()[:5]]
    slots = (np.ones(int(obs.unit_mask.sum()), dtype=bool),)
    padded = (obs.unit_mask.copy(),)
    return tuple(full) + slots, tuple(full) + padded


def _slice_segments(steps: list[_StepRec], side: int, config: ActorConfig,
                    version: int, timestamp: float
                    ) -> list[TrajectorySegment]:
    """Cut one side's episode into consecutive window segments.

    Every chunk except the last is a full window whose bootstrap is the
    recorded value of the next chunk's first state (plus the full-rollout
    correction when configured); the final chunk ends the episode and
    bootstraps zero.
    """
    window = config.window
    full_adv = None
    if config.rollout == "full":
        full_adv, _ = gae(
            np.array([r.reward for r in steps], dtype=np.float64),
            np.array([r.value for r in steps], dtype=np.float64),
            0.0, np.array([r.done for r in steps], dtype=bool),
            config.gamma, config.lam)
    out = []
    for start in range(0, len(steps), window):
        chunk = steps[start:start + window]
        if chunk[-1].done:
            bootstrap = 0.0
        else:
            nxt = start + window
            bootstrap = float(steps[nxt].value)
            if full_adv is not None:
                bootstrap += config.lam * float(full_adv[nxt])
        out.append(TrajectorySegment(
            image=np.stack([r.image for r in chunk]).astype(np.float32),
            units=np.stack([r.units for r in chunk]),
            unit_mask=np.stack([r.unit_mask for r in chunk]),
            globals=np.stack([r.globals for r in chunk]),
            masks=tuple(np.stack([r.masks[i] for r in chunk])
                        for i in range(6)),
            actions=np.array([r.actions for r in chunk], dtype=np.int64),
            behavior_probs=np.stack([r.probs for r in chunk]),
            rewards=np.array([r.reward for r in chunk], dtype=np.float32),
            values=np.array([r.value for r in chunk], dtype=np.float32),
            dones=np.array([r.done for r in chunk], dtype=bool),
            entry_h=chunk[0].hid.h, entry_c=chunk[0].hid.c,
            bootstrap=bootstrap, version=version, timestamp=timestamp,
            side=side))
    return out


def choose_opponent(latest_version: int, archive_count: int,
                    rng: Rng, latest_prob: float = 0.8
                    ) -> tuple[bool, int]:
    """Pick the opponent snapshot: (use_latest, archive_index)."""
    if archive_count == 0 or rng.uniform() < latest_prob:
        return True, -1
    return False, int(rng.randint(archive_count))


def run_actor(address: tuple[str, int], env_config: EnvConfig,
              net_config: NetConfig, actor_config: ActorConfig,
              seed: int, *, max_episodes: int | None = None,
              stop_event=None, name: str = "actor",
              poll_interval: float = 0.2) -> ActorStats:
    """Actor service loop: refresh model, play, ship, repeat.

    Runs until `max_episodes` episodes are shipped or `stop_event` is set.
    Transient endpoint failures are retried with backoff; environment
    contract violations abort the episode and are counted.
    """
    stats = ActorStats()
    rng = Rng(seed)
    env = MobaEnv(env_config)
    net_learn, _ = build_net(net_config, seed=0)
    net_opp, _ = build_net(net_config, seed=0)
    layout = net_learn.layout

    def stopped() -> bool:
        return stop_event is not None and stop_event.is_set()

    client = _connect(address, stopped, poll_interval)
    if client is None:
        return stats
    client.register(name)
    try:
        while not stopped() and (max_episodes is None
                                 or stats.episodes < max_episodes):
            try:
                latest = client.get_model()
                if latest is None:
                    time.sleep(poll_interval)
                    continue
                use_latest, idx = choose_opponent(
                    latest.version, client.archive_count(), rng,
                    actor_config.latest_prob)
                opponent = latest if use_latest else client.archive_get(idx)
                net_learn.load_flat(Params.deserialize(latest.payload, layout))
                net_opp.load_flat(Params.deserialize(opponent.payload, layout))
                try:
                    outcome = play_episode(
                        env, (net_learn, net_opp),
                        (latest.version, opponent.version),
                        seed=rng.next_u64(), rng=rng, config=actor_config)
                except EnvError:
                    stats.aborted += 1
                    continue
                ship = list(outcome.segments[0])
                if use_latest:
                    ship.extend(outcome.segments[1])
                for frame in pack_frames(ship, actor_config.max_frame_bytes):
                    client.push_frame(frame)
                    stats.frames_shipped += 1
                stats.segments_shipped += len(ship)
                stats.episodes += 1
                if outcome.winner is None:
                    stats.draws += 1
                else:
                    stats.wins[outcome.winner] += 1
            except (PipelineError, OSError):
                client.close()
                client = _connect(address, stopped, poll_interval)
                if client is None:
                    break
                client.register(name)
    finally:
        if client is not None:
            client.close()
    return stats


def _connect(address, stopped, poll_interval,
             attempts: int = 50) -> PoolClient | None:
    backoff = poll_interval
    for _ in range(attempts):
        if stopped():
            return None
        try:
            return PoolClient(address)
        except OSError:
            time.sleep(backoff)
            backoff = min(backoff * 1.5, 2.0)
    return None
