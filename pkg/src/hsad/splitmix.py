"""SplitMix64: a tiny, fully specified 64-bit generator.

Used instead of numpy's bit generators so that subsample indices and member
seeds are reproducible bit-for-bit from an integer seed in any language.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The SplitMix64 output finalizer."""
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """One full generator step from state ``x``: advance by the golden gamma, then mix."""
    return mix64((x + GOLDEN_GAMMA) & MASK64)


def member_seed(master_seed: int, t: int) -> int:
    """Seed of ensemble member ``t``; independent of evaluation order."""
    return splitmix64((master_seed ^ ((t * GOLDEN_GAMMA) & MASK64)) & MASK64)


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= int(seed) <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.state = int(seed)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def below(self, bound: int) -> int:
        """Unbiased integer in ``[0, bound)`` by rejection of the short final bucket."""
        if bound < 1:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) % bound
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % bound


def partial_fisher_yates(n: int, r: int, seed: int) -> list[int]:
    """``r`` distinct indices from ``range(n)``, uniform without replacement."""
    if not 1 <= r <= n:
        raise ValueError(f"need 1 <= r <= n, got r={r}, n={n}")
    rng = SplitMix64(seed)
    # Sparse swap table keeps this O(r) even for images with millions of pixels.
    swapped: dict[int, int] = {}
    out = []
    for i in range(r):
        j = i + rng.below(n - i)
        vi = swapped.get(i, i)
        vj = swapped.get(j, j)
        swapped[j] = vi
        out.append(vj)
    return out
