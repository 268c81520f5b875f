"""Exact permutation-group algebra on dense point sets ``[0, n)``.

Permutations are stored as read-only ``int32`` numpy arrays; ``p(i)`` is
``p.images[i]``.  Products follow function composition, so ``(a * b)(i) ==
a(b(i))``.

:class:`PermGroupBSGS` is built by a deterministic Schreier-Sims: base points
are the smallest point moved by the element that forces a new base level, and
Schreier generators are processed orbit point by orbit point, generator index
by generator index.  Transversals are kept as Schreier trees, so a large
basic orbit costs O(n) memory instead of O(n^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DegreeMismatch, NotBlockCompatible, TooLarge

_DTYPE = np.int32

# Cap on cached transversal entries (points * degree) per group.
_TRANSVERSAL_CACHE_BUDGET = 20_000_000


class Permutation:
    """A bijection of ``range(degree)``."""

    __slots__ = ("_images", "_hash")

    def __init__(self, images: Iterable[int] | np.ndarray, *, check: bool = True):
        arr = np.array(images, dtype=_DTYPE, copy=True).reshape(-1)
        if check:
            n = arr.shape[0]
            if n and (arr.min() < 0 or arr.max() >= n):
                raise ValueError("images out of range")
            seen = np.zeros(n, dtype=bool)
            seen[arr] = True
            if not seen.all():
                raise ValueError("images do not form a bijection")
        arr.flags.writeable = False
        self._images = arr
        self._hash = None

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "Permutation":
        # Trusted constructor: arr is already a fresh int32 bijection.
        p = cls.__new__(cls)
        arr.flags.writeable = False
        p._images = arr
        p._hash = None
        return p

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls._wrap(np.arange(degree, dtype=_DTYPE))

    @classmethod
    def from_cycles(cls, degree: int, *cycles: Sequence[int]) -> "Permutation":
        """Build from disjoint cycles, e.g. ``from_cycles(3, (0, 1, 2))``."""
        arr = np.arange(degree, dtype=_DTYPE)
        for cyc in cycles:
            for i, x in enumerate(cyc):
                arr[x] = cyc[(i + 1) % len(cyc)]
        return cls(arr)

    @property
    def degree(self) -> int:
        return int(self._images.shape[0])

    @property
    def images(self) -> np.ndarray:
        return self._images

    def __call__(self, point: int) -> int:
        return int(self._images[point])

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return inverse(self) ** (-k)
        result = Permutation.identity(self.degree)
        base = self
        while k:
            if k & 1:
                result = compose(result, base)
            base = compose(base, base)
            k >>= 1
        return result

    def inverse(self) -> "Permutation":
        return inverse(self)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self._images, np.arange(self.degree, dtype=_DTYPE)))

    def smallest_moved_point(self) -> int | None:
        moved = np.nonzero(self._images != np.arange(self.degree, dtype=_DTYPE))[0]
        return int(moved[0]) if moved.size else None

    def order(self) -> int:
        result = 1
        for cyc in self.cycles():
            result = math.lcm(result, len(cyc))
        return result

    def cycles(self) -> list[tuple[int, ...]]:
        """Nontrivial cycles, each starting at its smallest point."""
        seen = np.zeros(self.degree, dtype=bool)
        out = []
        img = self._images
        for start in range(self.degree):
            if seen[start] or img[start] == start:
                continue
            cyc = [start]
            seen[start] = True
            x = int(img[start])
            while x != start:
                seen[x] = True
                cyc.append(x)
                x = int(img[x])
            out.append(tuple(cyc))
        return out

    def tolist(self) -> list[int]:
        return self._images.tolist()

    def key(self) -> bytes:
        return self._images.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.degree == other.degree and bool(np.array_equal(self._images, other._images))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._images.tobytes())
        return self._hash

    def __repr__(self) -> str:
        cyc = "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles())
        return f"Permutation({cyc or '()'}, degree={self.degree})"


def compose(a: Permutation, b: Permutation) -> Permutation:
    """Return ``a * b``, the map ``i -> a(b(i))``."""
    if a.degree != b.degree:
        raise DegreeMismatch(f"degrees differ: {a.degree} != {b.degree}")
    return Permutation._wrap(a.images[b.images])


def inverse(p: Permutation) -> Permutation:
    arr = np.empty(p.degree, dtype=_DTYPE)
    arr[p.images] = np.arange(p.degree, dtype=_DTYPE)
    return Permutation._wrap(arr)


def identity(degree: int) -> Permutation:
    return Permutation.identity(degree)


def block_projection(p: Permutation, proj: np.ndarray | Sequence[int], coarse_degree: int | None = None) -> Permutation:
    """Induced permutation ``q`` on the fibers: ``q(proj(x)) == proj(p(x))``.

    Raises :class:`NotBlockCompatible` when some fiber is split by ``p``.
    """
    proj = np.asarray(proj, dtype=np.int64)
    if proj.shape[0] != p.degree:
        raise DegreeMismatch("projection length differs from permutation degree")
    m = int(proj.max()) + 1 if coarse_degree is None else coarse_degree
    target = proj[p.images]
    q = np.full(m, -1, dtype=np.int64)
    q[proj] = target
    if not np.array_equal(q[proj], target) or (q < 0).any():
        raise NotBlockCompatible("permutation does not map projection fibers onto fibers")
    return Permutation(q)


def orbit(generators: Sequence[Permutation], point: int) -> list[int]:
    """Orbit of ``point`` in breadth-first discovery order."""
    seen = {point}
    out = [point]
    k = 0
    imgs = [g.images for g in generators]
    while k < len(out):
        x = out[k]
        k += 1
        for img in imgs:
            y = int(img[x])
            if y not in seen:
                seen.add(y)
                out.append(y)
    return out


def closure(generators: Sequence[Permutation], degree: int, limit: int | None = None) -> set[Permutation]:
    """All elements of the generated group, by exhaustive multiplication."""
    ident = Permutation.identity(degree)
    elements = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in generators:
                y = compose(g, x)
                if y not in elements:
                    elements.add(y)
                    nxt.append(y)
                    if limit is not None and len(elements) > limit:
                        raise TooLarge(f"closure exceeds {limit} elements")
        frontier = nxt
    return elements


class _Level:
    """One stabilizer-chain level: base point, generators, Schreier tree."""

    __slots__ = ("point", "gens", "gen_inv", "orbit", "parent", "closed_points", "closed_gens", "checked")

    def __init__(self, point: int):
        self.point = point
        self.gens: list[Permutation] = []
        self.gen_inv: list[Permutation] = []
        self.orbit = [point]
        # point -> (predecessor, generator index); the root maps to (-1, -1)
        self.parent: dict[int, tuple[int, int]] = {point: (-1, -1)}
        self.closed_points = 0
        self.closed_gens = 0
        self.checked: set[tuple[int, int]] = set()

    def add_generator(self, g: Permutation) -> None:
        self.gens.append(g)
        self.gen_inv.append(inverse(g))
        self._close()

    def _close(self) -> None:
        imgs = [g.images for g in self.gens]
        parent = self.parent
        orb = self.orbit
        # points already processed only need the new generators
        for k in range(self.closed_points):
            x = orb[k]
            for gi in range(self.closed_gens, len(imgs)):
                y = int(imgs[gi][x])
                if y not in parent:
                    parent[y] = (x, gi)
                    orb.append(y)
        k = self.closed_points
        while k < len(orb):
            x = orb[k]
            for gi, img in enumerate(imgs):
                y = int(img[x])
                if y not in parent:
                    parent[y] = (x, gi)
                    orb.append(y)
            k += 1
        self.closed_points = len(orb)
        self.closed_gens = len(imgs)


class PermGroupBSGS:
    """Finite permutation group with a base and strong generating set."""

    def __init__(self, degree: int, levels: list[_Level]):
        self.degree = degree
        self._levels = levels
        self._uinv_cache: list[dict[int, Permutation]] = [dict() for _ in levels]
        self._cache_used = 0

    # construction -------------------------------------------------------

    @classmethod
    def build(
        cls,
        generators: Sequence[Permutation],
        degree: int,
        *,
        base_prefix: Sequence[int] = (),
        stabilizer_generators: Sequence[Permutation] | None = None,
    ) -> "PermGroupBSGS":
        """Deterministic Schreier-Sims.

        ``stabilizer_generators``, when given, must generate the stabilizer
        of ``base_prefix[0]`` in the group; the first level is then taken as
        verified and only the stabilizer chain is sifted.
        """
        for g in generators:
            if g.degree != degree:
                raise DegreeMismatch(f"generator degree {g.degree} != {degree}")
        self = cls(degree, [])
        levels = self._levels
        for b in base_prefix:
            levels.append(_Level(int(b)))
        self._uinv_cache = [dict() for _ in levels]
        floor = 0
        gens = [g for g in generators if not g.is_identity()]
        if stabilizer_generators is not None:
            if not base_prefix:
                raise ValueError("stabilizer_generators needs a base_prefix")
            for g in stabilizer_generators:
                if g.degree != degree:
                    raise DegreeMismatch("stabilizer generator degree mismatch")
                if g(base_prefix[0]) != base_prefix[0]:
                    raise ValueError("stabilizer generator moves the first base point")
            for g in gens:
                levels[0].add_generator(g)
            gens = [g for g in stabilizer_generators if not g.is_identity()]
            floor = 1
        for g in gens:
            self._insert(g, floor)
        self._complete(floor)
        return self

    def _insert(self, g: Permutation, start: int) -> int:
        """Add ``g`` to levels ``start..j`` where j is the first level it moves."""
        levels = self._levels
        j = start
        while j < len(levels) and g(levels[j].point) == levels[j].point:
            j += 1
        if j == len(levels):
            levels.append(_Level(g.smallest_moved_point()))
            self._uinv_cache.append(dict())
        for lv in range(start, j + 1):
            self._levels[lv].add_generator(g)
            self._uinv_cache[lv].clear()
        return j

    def _complete(self, floor: int) -> None:
        levels = self._levels
        i = len(levels) - 1
        while i >= floor:
            level = levels[i]
            restarted = False
            for beta in list(level.orbit):
                for gi in range(len(level.gens)):
                    if (beta, gi) in level.checked:
                        continue
                    s = level.gens[gi]
                    gamma = s(beta)
                    if level.parent[gamma] == (beta, gi):
                        level.checked.add((beta, gi))
                        continue
                    h = compose(self._uinv(i, gamma), compose(s, self._u(i, beta)))
                    residue, j = self._sift(h, i + 1)
                    if j < len(levels) or not residue.is_identity():
                        self._insert(residue, i + 1)
                        i = len(levels) - 1 if j == len(levels) else j
                        restarted = True
                        break
                    level.checked.add((beta, gi))
                if restarted:
                    break
            if not restarted:
                i -= 1

    # transversals ---------------------------------------------------------

    def _uinv(self, i: int, beta: int) -> Permutation:
        """Inverse of the transversal element mapping base point i to beta."""
        cache = self._uinv_cache[i]
        hit = cache.get(beta)
        if hit is not None:
            return hit
        level = self._levels[i]
        path = []
        x = beta
        while x != level.point:
            x, gi = level.parent[x]
            path.append(gi)
        arr = np.arange(self.degree, dtype=_DTYPE)
        # u_beta = g_p0 * g_p1 * ... so its inverse is built by left-multiplying inverses
        for gi in path:
            arr = level.gen_inv[gi].images[arr]
        result = Permutation._wrap(arr)
        if self._cache_used + self.degree <= _TRANSVERSAL_CACHE_BUDGET:
            cache[beta] = result
            self._cache_used += self.degree
        return result

    def _u(self, i: int, beta: int) -> Permutation:
        return inverse(self._uinv(i, beta))

    def _sift(self, g: Permutation, start: int = 0) -> tuple[Permutation, int]:
        for j in range(start, len(self._levels)):
            level = self._levels[j]
            beta = g(level.point)
            if beta not in level.parent:
                return g, j
            if beta != level.point:
                g = compose(self._uinv(j, beta), g)
        return g, len(self._levels)

    # queries ---------------------------------------------------------------

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(lv.point for lv in self._levels)

    @property
    def strong_generators(self) -> tuple[Permutation, ...]:
        return tuple(self._levels[0].gens) if self._levels else ()

    @property
    def basic_orbit_sizes(self) -> tuple[int, ...]:
        return tuple(len(lv.orbit) for lv in self._levels)

    @property
    def order(self) -> int:
        return math.prod(len(lv.orbit) for lv in self._levels)

    def is_trivial(self) -> bool:
        return self.order == 1

    def transversal(self, level: int) -> dict[int, Permutation]:
        """Coset representatives of level ``level``, keyed by orbit point."""
        return {beta: self._u(level, beta) for beta in self._levels[level].orbit}

    def contains(self, p: Permutation) -> bool:
        if p.degree != self.degree:
            raise DegreeMismatch(f"degree {p.degree} != {self.degree}")
        residue, j = self._sift(p)
        return j == len(self._levels) and residue.is_identity()

    __contains__ = contains

    def is_subgroup_of(self, other: "PermGroupBSGS") -> bool:
        return all(other.contains(g) for g in self.strong_generators)

    def same_group(self, other: "PermGroupBSGS") -> bool:
        return self.order == other.order and self.is_subgroup_of(other) and other.is_subgroup_of(self)

    def orbit(self, point: int) -> list[int]:
        return orbit(self.strong_generators, point)

    def stabilizer_of_first_base_point(self) -> "PermGroupBSGS":
        sub = PermGroupBSGS(self.degree, self._levels[1:])
        sub._uinv_cache = self._uinv_cache[1:]
        return sub

    def elements(self) -> Iterator[Permutation]:
        """Every element once, as products of transversal elements."""
        reps = [list(self.transversal(i).values()) for i in range(len(self._levels))]

        def rec(i: int, acc: Permutation) -> Iterator[Permutation]:
            if i < 0:
                yield acc
                return
            for u in reps[i]:
                yield from rec(i - 1, compose(u, acc))

        yield from rec(len(reps) - 1, Permutation.identity(self.degree))

    def __repr__(self) -> str:
        return f"PermGroupBSGS(degree={self.degree}, order={self.order}, base={list(self.base)})"


def bsgs_build(generators: Sequence[Permutation], degree: int, **kwargs) -> PermGroupBSGS:
    return PermGroupBSGS.build(generators, degree, **kwargs)


def membership(G: PermGroupBSGS, p: Permutation) -> bool:
    return G.contains(p)


def point_stabilizer(G: PermGroupBSGS, x: int) -> PermGroupBSGS:
    """The subgroup ``{g in G : g(x) == x}``."""
    if G.base and G.base[0] == x:
        return G.stabilizer_of_first_base_point()
    if not G.strong_generators:
        return G
    rebuilt = PermGroupBSGS.build(G.strong_generators, G.degree, base_prefix=(x,))
    return rebuilt.stabilizer_of_first_base_point()


@dataclass(frozen=True)
class AbelianShape:
    """Invariant factors ``d1 | d2 | ...``; ``None`` marks a nonabelian group."""

    invariant_factors: tuple[int, ...] | None

    @property
    def is_abelian(self) -> bool:
        return self.invariant_factors is not None

    @property
    def is_cyclic(self) -> bool:
        return self.is_abelian and len(self.invariant_factors) <= 1

    @property
    def order(self) -> int | None:
        return math.prod(self.invariant_factors) if self.is_abelian else None

    def to_json(self):
        return list(self.invariant_factors) if self.is_abelian else "NonAbelian"

    def __str__(self) -> str:
        if not self.is_abelian:
            return "NonAbelian"
        if not self.invariant_factors:
            return "1"
        return " x ".join(f"Z/{d}" for d in self.invariant_factors)


NON_ABELIAN = AbelianShape(None)


def abelian_invariants(generators: Sequence[Permutation], degree: int | None = None, *, budget: int = 10**6) -> AbelianShape:
    """Invariant factors of ``<generators>`` by exhaustive enumeration.

    Repeatedly picks an element of maximal order modulo the subgroup
    collected so far; the orders found are the invariant factors in
    decreasing order.
    """
    gens = [g for g in generators if not g.is_identity()]
    for i, g in enumerate(gens):
        for h in gens[i + 1:]:
            if compose(g, h) != compose(h, g):
                return NON_ABELIAN
    if not gens:
        return AbelianShape(())
    if degree is None:
        degree = gens[0].degree
    G = PermGroupBSGS.build(gens, degree)
    if G.order > budget:
        raise TooLarge(f"group of order {G.order} exceeds enumeration budget {budget}")
    # the action on the union of base-point orbits is faithful
    support = sorted(set().union(*(G.orbit(b) for b in G.base)))
    relabel = np.full(degree, -1, dtype=np.int64)
    relabel[support] = np.arange(len(support))
    rows = [relabel[g.images[support]].astype(_DTYPE) for g in gens]

    ident = np.arange(len(support), dtype=_DTYPE)
    elements = [ident]
    index = {ident.tobytes(): 0}
    k = 0
    while k < len(elements):
        x = elements[k]
        k += 1
        for r in rows:
            y = r[x]
            key = y.tobytes()
            if key not in index:
                index[key] = len(elements)
                elements.append(y)
    E = np.stack(elements)
    n = E.shape[0]

    def mul(i: int, j: int) -> int:
        return index[E[i][E[j]].tobytes()]

    in_sub = np.zeros(n, dtype=bool)
    in_sub[0] = True
    factors = []
    while not in_sub.all():
        best, best_order = -1, 0
        for y in range(n):
            if in_sub[y]:
                continue
            k, cur = 1, y
            while not in_sub[cur]:
                cur = mul(y, cur)
                k += 1
            if k > best_order:
                best, best_order = y, k
        factors.append(best_order)
        members = np.nonzero(in_sub)[0].tolist()
        power = 0
        grown = set(members)
        for _ in range(best_order - 1):
            power = mul(best, power)
            for h in members:
                grown.add(mul(power, h))
        in_sub[list(grown)] = True
    return AbelianShape(tuple(reversed(factors)))
