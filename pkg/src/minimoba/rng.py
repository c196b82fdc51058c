"""Tiny deterministic PRNG used by the simulator.

SplitMix64: a single uint64 of state, bit-for-bit reproducible across
platforms and Python versions. The simulator stores this state directly in
``WorldState`` so that world snapshots capture the full source of randomness.
"""
from __future__ import annotations

_MASK64 = (1 << 64) - 1


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance one SplitMix64 step. Returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Rng:
    """Stateful wrapper around SplitMix64.

    The raw integer state can be read/assigned at any time, which is how the
    environment serializes its RNG into ``WorldState.rng_state``.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64_next(self.state)
        return out

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). n must be positive."""
        if n <= 0:
            raise ValueError("randint bound must be positive")
        # Rejection sampling keeps the draw exactly uniform.
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def fork(self) -> "Rng":
        """Derive an independent child stream and advance this one."""
        return Rng(self.next_u64())
