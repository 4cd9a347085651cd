"""SplitMix64 pseudo-random generator.

Every stochastic choice in the package goes through :class:`SplitMix64` so
that a seed fully determines a run, independently of Python's ``random``
module and of platform details.
"""
from __future__ import annotations

import hashlib

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    """Steele/Lea/Flood SplitMix64 with a few derived draws."""

    __slots__ = ("seed", "state")

    def __init__(self, seed: int) -> None:
        self.seed = seed & _MASK
        self.state = self.seed

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) built from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, so there is no modulo bias."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        return lo + self.below(hi - lo + 1)

    def coin(self) -> bool:
        return self.below(2) == 1

    def weighted_index(self, weights: list[float]) -> int:
        """Index drawn with probability proportional to ``weights`` (one draw)."""
        total = sum(weights)
        if total <= 0:
            raise ValueError("weights have no positive mass")
        u = self.random() * total
        acc = 0.0
        last = 0
        for i, w in enumerate(weights):
            if w <= 0:
                continue
            acc += w
            last = i
            if u < acc:
                return i
        return last

    def fork(self) -> "SplitMix64":
        """Child generator seeded from one draw of this one."""
        return SplitMix64(self.next_u64())


def derive_seed(master: int, *parts: object) -> int:
    """Stable 64-bit seed from a master seed and arbitrary labels.

    Used where results must not depend on evaluation order (e.g. one seed
    per patch pair).
    """
    h = hashlib.sha256(str(master).encode())
    for part in parts:
        h.update(b"\x00")
        h.update(str(part).encode())
    return int.from_bytes(h.digest()[:8], "big")
