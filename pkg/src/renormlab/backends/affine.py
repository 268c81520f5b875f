"""The group ``Z[1/5] x| ({+-1} x 5^Z)`` of affine maps ``x -> +-5^m x + t``.

Generators: ``a: x -> x + 1``, ``b: x -> -x``, ``c: x -> 5x``; they satisfy
``b^2 = 1``, ``bab^-1 = a^-1``, ``cac^-1 = a^5``, ``bc = cb``.  The
renormalization doubles the translation part, so the level subgroup is
``<a^(2^l), b, c>`` and a coset is determined by the image of ``0`` modulo
``2^l``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .base import Backend, ChainKind


class AffineElement(NamedTuple):
    """``a^t b^eps c^m``, i.e. the map ``x -> t + (-1)^eps 5^m x``."""

    t: Fraction
    eps: int
    m: int


def _is_five_adic(t: Fraction) -> bool:
    d = t.denominator
    while d % 5 == 0:
        d //= 5
    return d == 1


class AffineUnit(Backend):
    name = "affine-unit"
    element_type = AffineElement
    has_phi = True

    def identity(self):
        return AffineElement(Fraction(0), 0, 0)

    def _scale(self, g) -> Fraction:
        s = Fraction(5) ** g.m
        return -s if g.eps else s

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return AffineElement(g.t + self._scale(g) * h.t, g.eps ^ h.eps, g.m + h.m)

    def invert(self, g):
        self.check(g)
        return AffineElement(-g.t / self._scale(g), g.eps, -g.m)

    def generators(self):
        return [AffineElement(Fraction(1), 0, 0), AffineElement(Fraction(0), 1, 0), AffineElement(Fraction(0), 0, 1)]

    def generator_names(self):
        return ["a", "b", "c"]

    def apply_phi(self, g):
        self.check(g)
        return AffineElement(2 * g.t, g.eps, g.m)

    def phi_power(self, g, n):
        self.check(g)
        return AffineElement(g.t * 2**n, g.eps, g.m)

    def coset_id(self, g, level, kind=ChainKind.RENORMALIZATION):
        self.check(g)
        self._check_level(level)
        mod = 2**level
        if mod == 1:
            return 0
        # the denominator is a power of 5, a unit modulo 2^l
        return g.t.numerator * pow(g.t.denominator, -1, mod) % mod

    def act(self, g, x):
        """Evaluate the affine map at ``x``."""
        self.check(g)
        return g.t + self._scale(g) * x

    def params(self):
        return {}

    def encode(self, g):
        return [g.t.numerator, g.t.denominator, g.eps, g.m]

    def decode(self, data):
        num, den, eps, m = data
        t = Fraction(int(num), int(den))
        if not _is_five_adic(t):
            raise ValueError("translation denominator must be a power of 5")
        return AffineElement(t, int(eps) & 1, int(m))

    def format_element(self, g):
        return f"x -> {'-' if g.eps else ''}5^{g.m} x + {g.t}"
