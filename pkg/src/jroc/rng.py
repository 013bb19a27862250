"""Deterministic, language-portable pseudo-random numbers.

The generator is xorshift64* (Vigna, 2016)::

    x ^= x >> 12
    x ^= x << 25        (mod 2**64)
    x ^= x >> 27
    out = x * 0x2545F4914F6CDD1D   (mod 2**64)

seeded by passing the user seed through one splitmix64 finalisation step
(constants 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB).
A state of zero is replaced by the golden-ratio constant.

Floats take the top 53 bits of an output. Bounded integers use rejection
sampling on the full 64-bit output, so any implementation following the
constants above reproduces every stream bit for bit.
"""

from __future__ import annotations

from typing import MutableSequence, TypeVar

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
XORSHIFT_MULT = 0x2545F4914F6CDD1D

T = TypeVar("T")


def mix64(z: int) -> int:
    """splitmix64 finaliser."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Stable 64-bit hash of a tuple of integers.

    Used to give every experiment run its own seed from the master seed and
    the run's indices, independent of the order runs are executed in.
    """
    h = GOLDEN
    for p in parts:
        h = mix64((h + (int(p) & MASK64) + GOLDEN) & MASK64)
    return h


class Rng:
    """xorshift64* generator with a small convenience API."""

    def __init__(self, seed: int = 0):
        state = mix64((int(seed) + GOLDEN) & MASK64)
        self._state = state or GOLDEN

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * XORSHIFT_MULT) & MASK64

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) % n
        while True:
            r = self.next_u64()
            if r >= limit:
                return r % n

    def shuffle(self, items: MutableSequence[T]) -> None:
        """In-place Fisher-Yates shuffle (high index down to 1)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, population: int, k: int) -> list[int]:
        """k distinct integers from range(population), in draw order.

        Partial Fisher-Yates over a sparse swap table, so memory is O(k)
        even when the population is a large lattice.
        """
        if not 0 <= k <= population:
            raise ValueError(f"cannot draw {k} distinct items from {population}")
        swapped: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randbelow(population - i)
            vj = swapped.get(j, j)
            swapped[j] = swapped.get(i, i)
            out.append(vj)
        return out
