"""Portable seeded randomness.

Evaluation noise and per-repeat seeds must be reproducible from plain
integers, across processes and across languages, so nothing here touches
the host RNG. The building blocks are fixed 64-bit integer algorithms:

* seed derivation: chained splitmix64 finalizer (``mix64``),
* uniform stream: xorshift64* (Marsaglia/Vigna),
* normal variates: Box-Muller, first variate only.

Derived seeds are truncated to 53 bits so they survive a round trip
through any JSON number implementation unchanged.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_SEED_MASK = (1 << 53) - 1


def mix64(x: int) -> int:
    """splitmix64 finalizer: a bijective scramble of a 64-bit integer."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def derive_seed(root: int, trial: int, repeat: int) -> int:
    """Stable per-(trial, repeat) seed.

    Defined as ``mix64(mix64(mix64(root) ^ trial) ^ repeat)`` truncated to
    53 bits. External evaluators reconstruct the exact same value from the
    same three integers.
    """
    h = mix64(root)
    h = mix64(h ^ (trial & _MASK64))
    h = mix64(h ^ (repeat & _MASK64))
    return h & _SEED_MASK


class Xorshift64Star:
    """xorshift64* uniform generator, state seeded through ``mix64``."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        # mix64 output 0 would freeze the xorshift state; substitute the
        # splitmix64 increment constant in that single case.
        self._state = mix64(seed) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK64

    def uniform(self) -> float:
        """Uniform draw in (0, 1] with 53-bit resolution."""
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal(self) -> float:
        """Standard normal draw: Box-Muller, first variate only."""
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def seeded_normal(seed: int) -> float:
    """One standard-normal draw fully determined by ``seed``."""
    return Xorshift64Star(seed).normal()
