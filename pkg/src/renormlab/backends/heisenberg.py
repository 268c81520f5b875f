"""Integer Heisenberg group with the renormalization (x, y, z) -> (px, qy, pqz)."""

from __future__ import annotations

from typing import NamedTuple

from .base import Backend, ChainKind


class HeisenbergElement(NamedTuple):
    x: int
    y: int
    z: int


class Heisenberg(Backend):
    """``Z^3`` with ``(x,y,z)(u,v,w) = (x+u, y+v, z+w+xv)``.

    The level subgroup is ``{(p^l x, q^l y, (pq)^l z)}``; the coset token of
    ``g`` is ``(x mod p^l, y mod q^l, z')`` where ``z'`` absorbs the
    cross term picked up when ``y`` is reduced.
    """

    name = "heisenberg"
    element_type = HeisenbergElement
    has_phi = True

    def __init__(self, p: int = 2, q: int = 3):
        if p < 2 or q < 2:
            raise ValueError("heisenberg needs p, q >= 2")
        self.p = int(p)
        self.q = int(q)

    def identity(self):
        return HeisenbergElement(0, 0, 0)

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return HeisenbergElement(g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y)

    def invert(self, g):
        self.check(g)
        return HeisenbergElement(-g.x, -g.y, -g.z + g.x * g.y)

    def generators(self):
        return [HeisenbergElement(1, 0, 0), HeisenbergElement(0, 1, 0), HeisenbergElement(0, 0, 1)]

    def generator_names(self):
        return ["a", "b", "c"]

    def apply_phi(self, g):
        self.check(g)
        return HeisenbergElement(self.p * g.x, self.q * g.y, self.p * self.q * g.z)

    def phi_power(self, g, n):
        self.check(g)
        pn, qn = self.p**n, self.q**n
        return HeisenbergElement(pn * g.x, qn * g.y, pn * qn * g.z)

    def coset_id(self, g, level, kind=ChainKind.RENORMALIZATION):
        self.check(g)
        self._check_level(level)
        P, Q = self.p**level, self.q**level
        v = g.y // Q
        # right-multiplying by (P u, -Q v, .) adds x * (-Q v) to z
        return (g.x % P, g.y % Q, (g.z - g.x * Q * v) % (P * Q))

    def params(self):
        return {"p": self.p, "q": self.q}

    def encode(self, g):
        return [g.x, g.y, g.z]

    def decode(self, data):
        x, y, z = data
        return HeisenbergElement(int(x), int(y), int(z))
