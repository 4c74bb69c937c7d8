"""SplitMix64: a tiny, seedable, platform-independent 64-bit generator.

Chosen over numpy's Generator because the whole algorithm is a dozen
lines of 64-bit integer arithmetic, exactly reproducible in any language,
which keeps corpora regenerable outside Python. The sequence for a given
seed is a format contract; changing it would change every generated
dataset.

Bounded draws use modulo reduction. The bias is below n / 2^64, under
1e-15 for every range used in this package, and is accepted for
simplicity and portability.
"""

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """The SplitMix64 finalizer: a bijective 64-bit scrambler."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Streaming form: state advances by the golden-ratio increment."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return mix64(self._state)

    def below(self, n: int) -> int:
        """Uniform draw from {0, ..., n-1} (modulo reduction, see module doc)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n
