"""Deterministic seeded randomness.

All randomness in the workbench flows from one session seed through named
substreams: stream(seed, "lift-root", "translate") always yields the same
sequence, on every platform and Python version. The generator is SplitMix64,
implemented here so reproducibility does not depend on stdlib internals.
"""

import hashlib

_MASK64 = (1 << 64) - 1


class Rng:
    """SplitMix64 pseudo-random stream."""

    def __init__(self, state: int):
        self._state = state & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        # rejection sampling to avoid modulo bias
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            u = self.next_u64()
            if u <= limit:
                return u % n

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b] inclusive."""
        return a + self.randrange(b - a + 1)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, seq):
        for i in range(len(seq) - 1, 0, -1):
            j = self.randrange(i + 1)
            seq[i], seq[j] = seq[j], seq[i]


def stream(seed: int, *names: str) -> Rng:
    """Derive an independent substream from a session seed and stage names."""
    label = str(seed) + "/" + "/".join(names)
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return Rng(int.from_bytes(digest[:8], "little"))
