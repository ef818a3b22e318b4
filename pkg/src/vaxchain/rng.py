"""The single seedable generator behind every stochastic draw.

All randomness (addresses, QR nonces, block waiting times) flows through
:class:`ChainRandom`, a thin wrapper over :class:`random.Random`
(Mersenne Twister, CPython's ``random`` module). Because the underlying
stream is the stdlib one, any draw can be replayed independently with
``random.Random(seed)`` and the formulas documented on each method.

Not cryptographically secure; nonces only need to be unique within a run.
"""

from __future__ import annotations

import math
import random

SEED_MASK = (1 << 64) - 1


class ChainRandom:
    """Seeded PRNG with the handful of draws the simulator needs."""

    def __init__(self, seed: int):
        self.seed = int(seed) & SEED_MASK
        self._rng = random.Random(self.seed)

    def uniform(self) -> float:
        """One draw from [0, 1): ``random.Random.random()``."""
        return self._rng.random()

    def exponential(self, mean: float) -> float:
        """Exponential waiting time with the given mean.

        Uses inversion, ``-mean * log(1 - u)``; a ``u`` of exactly 0 is
        redrawn so the result is strictly positive.
        """
        u = self._rng.random()
        while u == 0.0:
            u = self._rng.random()
        return -mean * math.log(1.0 - u)

    def bits(self, k: int) -> int:
        """``k`` random bits: ``random.Random.getrandbits(k)``."""
        return self._rng.getrandbits(k)

    def getstate(self):
        return self._rng.getstate()

    def setstate(self, state) -> None:
        self._rng.setstate(state)
