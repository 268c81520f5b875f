"""The coset tree: vertices are cosets, edges come from the level projections."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UnsupportedForChainKind
from .backends.base import ChainKind
from .tower import Tower


@dataclass(frozen=True)
class CosetTree:
    sizes: tuple[int, ...]
    parents: tuple[np.ndarray, ...]  # parents[l][i] = parent of vertex i of level l+1

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    @property
    def vertex_count(self) -> int:
        return sum(self.sizes)

    def children(self, level: int, v: int) -> list[int]:
        return np.nonzero(self.parents[level] == v)[0].tolist()

    def branching(self, level: int) -> set[int]:
        """Distinct child counts of level-``level`` vertices."""
        counts = np.bincount(self.parents[level], minlength=self.sizes[level])
        return set(counts.tolist())

    def edges(self) -> list[tuple[int, int, int]]:
        """``(level, parent, child)`` with the child on ``level + 1``."""
        return [(lv, int(p), c) for lv, par in enumerate(self.parents) for c, p in enumerate(par)]


def build_tree(tower: Tower, depth: int) -> CosetTree:
    tower.extend(depth)
    sizes = tuple(tower.n(lv) for lv in range(depth + 1))
    parents = tuple(tower.level(lv).projection.copy() for lv in range(1, depth + 1))
    return CosetTree(sizes, parents)


def check_tree_automorphisms(tower: Tower, tree: CosetTree) -> bool:
    """Every generator maps each edge ``(v, w)`` to an edge ``(g v, g w)``."""
    for lv in range(tree.depth):
        upper = tower.level(lv).generator_perms
        lower = tower.level(lv + 1).generator_perms
        par = tree.parents[lv]
        for gu, gl in zip(upper, lower):
            if not np.array_equal(par[gl.images], gu.images[par]):
                return False
    return True


@dataclass(frozen=True)
class ClopenSet:
    """Union of cylinders, given by the level-``depth`` vertices it contains."""

    depth: int
    vertices: frozenset[int]

    @classmethod
    def of(cls, depth: int, vertices) -> "ClopenSet":
        return cls(depth, frozenset(int(v) for v in vertices))

    def refine(self, tower: Tower, depth: int) -> "ClopenSet":
        """Same set described by its vertices at a deeper level."""
        if depth < self.depth:
            raise ValueError("can only refine to a deeper level")
        proj = tower.projection_between(depth, self.depth)
        members = np.isin(proj, list(self.vertices))
        return ClopenSet.of(depth, np.nonzero(members)[0])


def basepoint_cylinder(tower: Tower, cylinder_depth: int, depth: int | None = None) -> ClopenSet:
    """``U_k`` described at level ``depth`` (default ``k``)."""
    return ClopenSet.of(cylinder_depth, [0]).refine(tower, cylinder_depth if depth is None else depth)


@dataclass
class AdaptedReport:
    adapted: bool
    orbit_size: int
    complete: bool  # orbit enumeration closed within the word bound


def adapted_check(tower: Tower, U: ClopenSet, word_bound: int | None = None) -> AdaptedReport:
    """Enumerate the translates of ``U`` under ``Q_k``; adapted iff they are equal or disjoint.

    ``word_bound`` caps the breadth-first radius; ``None`` runs to closure.
    """
    perms = tower.level(U.depth).generator_perms
    start = U.vertices
    seen = {start}
    frontier = [start]
    radius = 0
    adapted = True
    while frontier and (word_bound is None or radius < word_bound):
        nxt = []
        for S in frontier:
            arr = np.fromiter(S, dtype=np.int64, count=len(S))
            for p in perms:
                T = frozenset(p.images[arr].tolist())
                if T in seen:
                    continue
                seen.add(T)
                nxt.append(T)
                if T & start:
                    adapted = False
        frontier = nxt
        radius += 1
    return AdaptedReport(adapted, len(seen), not frontier)


def lambda_orbit(tower: Tower, start_level: int, steps: int, cylinder_depth: int = 0) -> list[ClopenSet]:
    """Iterate the shift map on ``U_k`` seen at ``start_level``.

    Entry ``i`` lives at level ``start_level + i`` and must equal the basepoint
    cylinder ``U_{k+i}`` there.
    """
    if tower.spec.kind is not ChainKind.RENORMALIZATION:
        raise UnsupportedForChainKind("lambda orbit needs a renormalization chain")
    if cylinder_depth > start_level:
        raise ValueError("cylinder depth exceeds the start level")
    current = basepoint_cylinder(tower, cylinder_depth, start_level)
    out = [current]
    for i in range(steps):
        lv = start_level + i
        s = tower.shift_map(lv)
        arr = np.fromiter(current.vertices, dtype=np.int64, count=len(current.vertices))
        current = ClopenSet.of(lv + 1, s[arr])
        expected = basepoint_cylinder(tower, cylinder_depth + i + 1, lv + 1)
        if current.vertices != expected.vertices:
            raise AssertionError(f"shift image at level {lv + 1} is not the basepoint cylinder")
        out.append(current)
    return out


def export_dot(tree: CosetTree, *, name: str = "coset_tree", labels: Sequence[Sequence[str]] | None = None,
               highlight_basepoint: bool = False) -> str:
    """DOT digraph with vertices ``"l:i"`` and parent-to-child edges."""
    lines = [f"digraph {name} {{"]
    for lv, n in enumerate(tree.sizes):
        for i in range(n):
            label = labels[lv][i] if labels is not None else f"{lv}:{i}"
            attrs = f'label="{label}"'
            if highlight_basepoint and i == 0:
                attrs += ", style=bold"
            lines.append(f'  "{lv}:{i}" [{attrs}];')
    for lv, parent, child in tree.edges():
        lines.append(f'  "{lv}:{parent}" -> "{lv + 1}:{child}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
