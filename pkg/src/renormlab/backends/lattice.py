"""Semidirect products ``Z^k x| H`` with ``H`` permuting coordinates."""

from __future__ import annotations

from typing import NamedTuple, Sequence

from .base import Backend, ChainKind


class LatticeElement(NamedTuple):
    v: tuple[int, ...]
    h: tuple[int, ...]  # h[i] is the image of coordinate i


def _perm_mul(h, k):
    return tuple(h[k[i]] for i in range(len(h)))


def _perm_inv(h):
    out = [0] * len(h)
    for i, j in enumerate(h):
        out[j] = i
    return tuple(out)


def _act(h, v):
    # coordinate i of v moves to position h[i]
    out = [0] * len(v)
    for i, x in enumerate(v):
        out[h[i]] = x
    return tuple(out)


def perm_from_cycles(k: int, cycles: Sequence[Sequence[int]], *, one_based: bool = True) -> tuple[int, ...]:
    out = list(range(k))
    shift = 1 if one_based else 0
    for cyc in cycles:
        pts = [c - shift for c in cyc]
        if any(not 0 <= c < k for c in pts):
            raise ValueError(f"cycle {list(cyc)} has symbols outside 1..{k}")
        for i, c in enumerate(pts):
            out[c] = pts[(i + 1) % len(pts)]
    if sorted(out) != list(range(k)):
        raise ValueError("cycles are not disjoint")
    return tuple(out)


class LatticeSemidirect(Backend):
    """``(v, h)(u, k) = (v + h.u, hk)`` with renormalization ``(v, h) -> (m v, h)``.

    ``h_generators`` are permutations of ``range(k)`` given as image tuples.
    """

    name = "lattice"
    element_type = LatticeElement
    has_phi = True

    def __init__(self, k: int = 3, m: int = 2, h_generators: Sequence[Sequence[int]] = ((1, 2, 0),)):
        if k < 1 or m < 2:
            raise ValueError("lattice needs k >= 1 and m >= 2")
        self.k = int(k)
        self.m = int(m)
        self.h_generators = [tuple(int(x) for x in h) for h in h_generators]
        for h in self.h_generators:
            if sorted(h) != list(range(self.k)):
                raise ValueError(f"{h} is not a permutation of {self.k} symbols")

    def identity(self):
        return LatticeElement((0,) * self.k, tuple(range(self.k)))

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        hu = _act(g.h, h.v)
        return LatticeElement(tuple(a + b for a, b in zip(g.v, hu)), _perm_mul(g.h, h.h))

    def invert(self, g):
        self.check(g)
        hinv = _perm_inv(g.h)
        return LatticeElement(tuple(-x for x in _act(hinv, g.v)), hinv)

    def generators(self):
        ident = tuple(range(self.k))
        gens = [LatticeElement(tuple(int(i == j) for j in range(self.k)), ident) for i in range(self.k)]
        gens += [LatticeElement((0,) * self.k, h) for h in self.h_generators]
        return gens

    def generator_names(self):
        return [f"e{i + 1}" for i in range(self.k)] + [f"h{i + 1}" for i in range(len(self.h_generators))]

    def apply_phi(self, g):
        self.check(g)
        return LatticeElement(tuple(self.m * x for x in g.v), g.h)

    def phi_power(self, g, n):
        self.check(g)
        mn = self.m**n
        return LatticeElement(tuple(mn * x for x in g.v), g.h)

    def coset_id(self, g, level, kind=ChainKind.RENORMALIZATION):
        self.check(g)
        self._check_level(level)
        mod = self.m**level
        return tuple(x % mod for x in g.v)

    def params(self):
        return {"k": self.k, "m": self.m, "h_generators": [list(h) for h in self.h_generators]}

    def encode(self, g):
        return [list(g.v), list(g.h)]

    def decode(self, data):
        v, h = data
        return LatticeElement(tuple(int(x) for x in v), tuple(int(x) for x in h))
