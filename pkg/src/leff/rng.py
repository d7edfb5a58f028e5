"""Deterministic 64-bit random source shared by the evaluators and the oracle.

The generator is SplitMix64: the state advances by the golden-gamma constant
and each output is the state passed through a fixed xor-shift-multiply mixer.

* ``next_u64()`` returns the mixed 64-bit word.
* ``randomfloat(b)`` is ``(next_u64() >> 11) * 2**-53 * b``, uniform on ``[0, b)``
  (a product that rounds up to ``b`` is pulled back to the float just below it).
* ``randomint(n)`` is ``next_u64() % n`` for ``n > 0``; for ``n <= 0`` it is 0 and
  draws nothing.
"""
from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_UNIT = 2.0**-53


class RandomSource:
    __slots__ = ("state", "draws")

    def __init__(self, seed: int = 0):
        self.state = seed & _MASK
        self.draws = 0

    def next_u64(self) -> int:
        self.state = s = (self.state + _GAMMA) & _MASK
        self.draws += 1
        z = ((s ^ (s >> 30)) * _M1) & _MASK
        z = ((z ^ (z >> 27)) * _M2) & _MASK
        return z ^ (z >> 31)

    def randomfloat(self, bound: float) -> float:
        x = (self.next_u64() >> 11) * _UNIT * bound
        # rounding can reach the bound itself (tiny or huge bounds); stay below it
        return math.nextafter(bound, 0.0) if 0.0 < bound <= x else x

    def randomint(self, n: int) -> int:
        if n <= 0:
            return 0
        return self.next_u64() % n

    def fork(self) -> RandomSource:
        out = RandomSource()
        out.state, out.draws = self.state, self.draws
        return out
