"""Portable 64-bit seeded randomness.

Corpus generation and seed derivation use a splitmix-style generator with
fixed, documented constants so that any implementation in any language can
reproduce the same corpora byte for byte. The heavier stochastic work in
the channel simulator uses numpy Generators, but always seeded through
``mix64`` so the whole pipeline is a pure function of the top-level seed.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1

# splitmix64 constants (Steele, Lea & Flood's SplittableRandom finalizer)
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _scramble(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def mix64(*values: int) -> int:
    """Fold any number of integers into one well-mixed 64-bit value.

    Used to derive independent sub-seeds, e.g. a per-message channel seed
    from (corpus seed, message id), or a per-stage seed inside the channel
    simulator. The fold is order-sensitive and avalanche-mixed after every
    input, so (a, b) and (b, a) land in unrelated streams.
    """
    h = 0
    for v in values:
        h = _scramble((h + _GAMMA + (v & _MASK)) & _MASK)
    return h


class SplitMix64:
    """Sequential splitmix64 stream.

    State advances by the fixed gamma; each output is the scrambled state.
    Deliberately minimal so the exact integer sequence is reproducible
    outside Python.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _scramble(self._state)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi).

        Plain modulo reduction; the bias is < 2**-50 for every range this
        package uses and keeping the reduction trivial matters more for
        cross-language reproducibility.
        """
        if hi <= lo:
            raise ValueError("empty range")
        return lo + self.next_u64() % (hi - lo)

    def choice(self, seq):
        return seq[self.randint(0, len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(0, i + 1)
            items[i], items[j] = items[j], items[i]
