"""Counter-based seeded uniform stream.

The whole engine draws randomness from this one primitive so that the RNG
state can live inside a world snapshot as a plain (seed, counter) pair:
restoring a snapshot restores the stream position exactly, and every draw
advances the counter by exactly one.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK
    return x ^ (x >> 31)


class RandomStream:
    """Uniform [0, 1) stream addressed by (seed, counter)."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & _MASK
        self.counter = counter

    def uniform(self) -> float:
        value = _splitmix64((self.seed + (self.counter + 1) * _GAMMA) & _MASK)
        self.counter += 1
        return value / 2.0**64

    def randint(self, n: int) -> int:
        """Integer in [0, n); consumes one variate."""
        return min(int(self.uniform() * n), n - 1)

    def choice(self, seq):
        return seq[self.randint(len(seq))]

    @property
    def state(self) -> tuple[int, int]:
        return (self.seed, self.counter)

    @classmethod
    def from_state(cls, state) -> "RandomStream":
        seed, counter = state
        return cls(seed, counter)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, counter={self.counter})"
