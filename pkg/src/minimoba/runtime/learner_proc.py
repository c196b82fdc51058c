"""Learner feed: samples the pool, optimizes, publishes snapshots."""
from __future__ import annotations

import time
from dataclasses import dataclass

from ..learner.core import Learner, train_on_batch
from .errors import PipelineError
from .service import PoolClient
from .snapshot import ModelSnapshot


@dataclass(frozen=True)
class LearnerFeedConfig:
    batch_segments: int = 32
    n_shards: int = 1
    recency_bias: float = 0.0
    min_pool: int = 32              # wait until the pool holds this many
    publish_initial: bool = True    # publish version-0 params at startup
    poll_interval: float = 0.2


def publish_snapshot(client: PoolClient, learner: Learner) -> int:
    snap = ModelSnapshot.from_params(learner.snapshot(), learner.version)
    return client.set_model(snap)


def run_learner(address: tuple[str, int], learner: Learner,
                feed: LearnerFeedConfig, updates: int, seed: int = 0, *,
                stop_event=None, on_update=None) -> list[dict]:
    """Run `updates` optimization rounds against a pool service.

    Each round samples a batch (waiting while the pool is short), trains,
    and publishes the new snapshot. Returns the per-round diagnostics.
    `on_update(diag)` is invoked after each publish.
    """
    diags: list[dict] = []
    client = PoolClient(address)

    def stopped() -> bool:
        return stop_event is not None and stop_event.is_set()

    try:
        if feed.publish_initial and learner.version == 0:
            publish_snapshot(client, learner)
        round_seed = seed
        while len(diags) < updates and not stopped():
            round_seed += 1
            try:
                segments, shortfall = client.sample(
                    feed.batch_segments, feed.recency_bias, round_seed)
            except PipelineError:  # empty pool
                time.sleep(feed.poll_interval)
                continue
            if shortfall and len(segments) < feed.min_pool:
                time.sleep(feed.poll_interval)
                continue
            diag = train_on_batch(learner, segments, feed.n_shards)
            diag["model_version"] = learner.version
            diag["pool_shortfall"] = float(shortfall)
            diag["staleness"] = learner.version - 1 - min(
                s.version for s in segments)
            publish_snapshot(client, learner)
            if on_update is not None:
                on_update(diag)
            diags.append(diag)
    finally:
        client.close()
    return diags
