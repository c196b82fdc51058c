"""Memory pool: fixed-capacity circular queue of decoded segments.

Pushes never block: when the queue is full the oldest entries are evicted.
Sampling is without replacement with weights exp(-bias * age_rank), where
rank 0 is the newest entry; bias 0 gives the uniform distribution and a
large bias degenerates to "the newest n".
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from ..learner.segment import TrajectorySegment
from ..rng import Rng
from .errors import PipelineError


@dataclass
class PoolCounters:
    pushed: int = 0
    evicted: int = 0
    sampled: int = 0


class MemoryPool:
    """Single-writer circular queue with recency-weighted sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise PipelineError(f"pool capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._ring: list[TrajectorySegment | None] = [None] * capacity
        self._head = 0  # index of the oldest entry
        self._size = 0
        self.counters = PoolCounters()
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return self._size

    def push(self, segments: list[TrajectorySegment]) -> int:
        """Append segments in order, evicting oldest-first beyond capacity.

        Returns the number evicted by this call.
        """
        evicted = 0
        with self._lock:
            for seg in segments:
                if self._size == self.capacity:
                    self._ring[self._head] = None
                    self._head = (self._head + 1) % self.capacity
                    self._size -= 1
                    evicted += 1
                self._ring[(self._head + self._size) % self.capacity] = seg
                self._size += 1
            self.counters.pushed += len(segments)
            self.counters.evicted += evicted
        return evicted

    def snapshot(self) -> list[TrajectorySegment]:
        """Current contents, oldest first."""
        with self._lock:
            return [self._ring[(self._head + i) % self.capacity]
                    for i in range(self._size)]

    def sample(self, n: int, recency_bias: float = 0.0,
               rng: Rng | None = None
               ) -> tuple[list[TrajectorySegment], bool]:
        """Draw up to n segments without replacement.

        Returns (segments, shortfall); shortfall is True when the pool held
        fewer than n. Weight of the entry with age rank r (0 = newest) is
        exp(-recency_bias * r), renormalized after every draw.
        """
        if n < 1:
            raise PipelineError(f"sample size must be >= 1, got {n}")
        if recency_bias < 0:
            raise PipelineError("recency_bias must be >= 0")
        rng = rng or Rng(0)
        with self._lock:
            if self._size == 0:
                raise PipelineError("sample from an empty pool")
            entries = [self._ring[(self._head + i) % self.capacity]
                       for i in range(self._size)]
            shortfall = n > self._size
            k = min(n, self._size)
            # age rank: newest entry (end of `entries`) has rank 0
            ranks = list(range(self._size - 1, -1, -1))
            weights = [math.exp(-recency_bias * r) for r in ranks]
            chosen: list[TrajectorySegment] = []
            alive = list(range(self._size))
            for _ in range(k):
                total = sum(weights[i] for i in alive)
                if total <= 0.0:  # all weights underflowed: uniform fallback
                    pick_pos = int(rng.randint(len(alive)))
                else:
                    u = rng.uniform() * total
                    acc = 0.0
                    pick_pos = len(alive) - 1
                    for pos, i in enumerate(alive):
                        acc += weights[i]
                        if u < acc:
                            pick_pos = pos
                            break
                chosen.append(entries[alive.pop(pick_pos)])
            self.counters.sampled += k
        return chosen, shortfall
