"""Depth-stamped evidence about a tower: discriminant verdicts and probes.

Everything here is computed from finitely many levels.  A verdict or a
``None`` search result is evidence at the stated depth and word bound, not
a statement about the inverse limit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterator

import numpy as np

from .backends.automaton import WreathAutomaton
from .backends.base import Backend, ChainKind
from .errors import InsufficientDepth, UnsupportedBackend, UnsupportedForChainKind
from .perm import PermGroupBSGS, block_projection
from .tower import Tower, word_perm

Word = tuple[tuple[int, int], ...]


# words ------------------------------------------------------------------------

def letters(backend: Backend) -> list[tuple[int, int]]:
    """Search alphabet: generators in order, then inverses of non-involutions."""
    gens = backend.generators()
    out = [(i, 1) for i in range(len(gens))]
    out += [(i, -1) for i, g in enumerate(gens) if backend.invert(g) != g]
    return out


def format_word(backend: Backend, word: Word) -> str:
    names = backend.generator_names()
    return " ".join(names[i] if e == 1 else f"{names[i]}^{e}" for i, e in word) or "e"


def iter_words(backend: Backend, max_length: int, key: Callable[[Any], Hashable] | None = None) -> Iterator[tuple[Word, Any]]:
    """Reduced words of length <= ``max_length`` in breadth-first order.

    Words whose element (under ``key``) was already produced by a shorter or
    earlier word are pruned, so each yielded word is the first one found for
    its element.
    """
    key = key or (lambda g: g)
    alphabet = letters(backend)
    gens = backend.generators()
    invs = [backend.invert(g) for g in gens]
    involution = [inv == g for g, inv in zip(gens, invs)]
    ident = backend.identity()
    seen = {key(ident)}
    layer: list[tuple[Word, Any]] = [((), ident)]
    for _ in range(max_length):
        nxt = []
        for word, g in layer:
            for gi, e in alphabet:
                if word:
                    lg, le = word[-1]
                    if lg == gi and (le == -e or involution[gi]):
                        continue
                h = backend.multiply(g, gens[gi] if e == 1 else invs[gi])
                k = key(h)
                if k in seen:
                    continue
                seen.add(k)
                w = word + ((gi, e),)
                nxt.append((w, h))
                yield w, h
        layer = nxt


def _fixes_points(tower: Tower, g, lv: int, points) -> bool:
    action = tower.level(lv)
    spec = tower.spec
    backend = spec.backend
    for x in points:
        if spec.coset_id(backend.multiply(g, action.representatives[x]), lv) != action.tokens[x]:
            return False
    return True


def _first_moved(tower: Tower, g, lv: int) -> int | None:
    action = tower.level(lv)
    spec = tower.spec
    backend = spec.backend
    for x in range(action.size):
        if spec.coset_id(backend.multiply(g, action.representatives[x]), lv) != action.tokens[x]:
            return x
    return None


def cylinder(tower: Tower, lv: int, depth: int) -> np.ndarray:
    """Points of ``X_lv`` below the basepoint vertex of level ``depth``."""
    return np.nonzero(tower.projection_between(lv, depth) == 0)[0]


# stable images and verdicts --------------------------------------------------------

@dataclass
class StableImage:
    level: int
    window: int
    orders: list[int]  # |S^(k)| for k = 0..window
    group: PermGroupBSGS
    stabilized: bool

    @property
    def order(self) -> int:
        return self.group.order


def stable_image(tower: Tower, lv: int, window: int) -> StableImage:
    """Image of ``D_{lv+window}`` in ``D_lv``, with the descending image orders."""
    if window < 1 or lv + window > tower.depth:
        raise InsufficientDepth(f"stable image at level {lv} with window {window} needs depth {lv + window}")
    images = [tower.stable_image(lv, k) for k in range(window + 1)]
    for k in range(window):
        if not images[k + 1].is_subgroup_of(images[k]):
            raise AssertionError(f"stable images at level {lv} are not nested")
    last, prev = images[-1], images[-2]
    stabilized = last.same_group(prev)
    return StableImage(lv, window, [im.order for im in images], last, stabilized)


class VerdictKind(str, enum.Enum):
    TRIVIAL_IN_LIMIT = "TrivialInLimit"
    FINITE_STABLE = "FiniteStable"
    GROWING = "Growing"
    UNDETERMINED = "Undetermined"


@dataclass
class Verdict:
    kind: VerdictKind
    evidence_depth: int
    window: int
    order: int | None = None
    levels: list[dict[str, Any]] = field(default_factory=list)

    def label(self) -> str:
        return f"{self.kind.value}({self.order})" if self.kind is VerdictKind.FINITE_STABLE else self.kind.value

    def to_json(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "order": self.order, "label": self.label(),
                "evidence_depth": self.evidence_depth, "window": self.window, "levels": self.levels}


def classify_discriminant(tower: Tower, window: int = 3) -> Verdict:
    """Classify the discriminant from levels ``1..depth`` of the tower.

    Levels ``1..depth-window`` get full-window stable images.  Rules, in order:

    * every full-window stable image is trivial: ``TrivialInLimit``;
    * full-window images are stabilized, every level's image (window
      truncated at the top of the tower) has one order ``c``, and the
      bondings map consecutive images bijectively: ``FiniteStable(c)``;
    * ``|D_l|`` strictly increases and every bonding is surjective:
      ``Growing``;
    * otherwise ``Undetermined``.
    """
    depth = tower.depth
    if window < 1 or depth < window + 1:
        raise InsufficientDepth(f"window {window} needs at least {window + 2} levels, have {depth + 1}")
    full = {lv: stable_image(tower, lv, window) for lv in range(1, depth - window + 1)}
    trunc = {lv: tower.stable_image(lv, min(window, depth - lv)) for lv in range(1, depth + 1)}
    d_orders = {lv: tower.discriminant(lv).order for lv in range(1, depth + 1)}
    surjective = {lv: tower.bonding_surjective(lv) for lv in range(1, depth)}

    levels = []
    for lv in range(1, depth + 1):
        row = {"level": lv, "n": tower.n(lv), "D_order": d_orders[lv], "stable_order": trunc[lv].order}
        if lv in full:
            row["stable_orders"] = full[lv].orders
            row["stabilized"] = full[lv].stabilized
        if lv in surjective:
            row["bonding_surjective"] = surjective[lv]
        levels.append(row)

    def verdict(kind, order=None):
        return Verdict(kind, depth, window, order, levels)

    # a trivial image stays trivial deeper down, since the images are nested
    if all(s.group.is_trivial() for s in full.values()):
        return verdict(VerdictKind.TRIVIAL_IN_LIMIT)

    orders = {s.order for s in trunc.values()}
    if all(s.stabilized for s in full.values()) and len(orders) == 1:
        c = orders.pop()
        bijective = True
        for lv in range(1, depth):
            proj = tower.level(lv + 1).projection
            gens = [block_projection(g, proj, tower.n(lv)) for g in trunc[lv + 1].strong_generators]
            img = PermGroupBSGS.build(gens, tower.n(lv), base_prefix=(0,))
            if img.order != c or not img.is_subgroup_of(trunc[lv]):
                bijective = False
                break
        if bijective:
            return verdict(VerdictKind.FINITE_STABLE, c)

    increasing = all(d_orders[lv] < d_orders[lv + 1] for lv in range(1, depth))
    if increasing and all(surjective.values()):
        return verdict(VerdictKind.GROWING)
    return verdict(VerdictKind.UNDETERMINED)


# quasi-analyticity ------------------------------------------------------------------

@dataclass
class QAWitness:
    """A word acting trivially on the basepoint cylinder yet nontrivially on ``X_level``."""

    word: Word
    text: str
    level: int
    cylinder_depth: int
    moved_point: int
    moved_to: int

    def to_json(self) -> dict[str, Any]:
        return {"word": self.text, "letters": [list(x) for x in self.word], "level": self.level,
                "cylinder_depth": self.cylinder_depth, "moved_point": self.moved_point, "moved_to": self.moved_to}


@dataclass
class QASearch:
    witness: QAWitness | None
    level: int
    cylinder_depth: int
    word_bound: int
    words_examined: int

    @property
    def found(self) -> bool:
        return self.witness is not None

    def to_json(self) -> dict[str, Any]:
        return {"result": "WitnessFound" if self.found else "NoneFound", "level": self.level,
                "cylinder_depth": self.cylinder_depth, "word_bound": self.word_bound,
                "words_examined": self.words_examined,
                "witness": self.witness.to_json() if self.witness else None}


def qa_witness_search(tower: Tower, level: int, cylinder_depth: int, word_bound: int) -> QASearch:
    """First word (breadth-first) fixing the ``U_k`` cylinder of ``X_L`` pointwise but not all of ``X_L``."""
    if not 0 <= cylinder_depth < level:
        raise ValueError("cylinder depth must be below the level")
    backend = tower.spec.backend
    action = tower.level(level)
    cyl = cylinder(tower, level, cylinder_depth)
    base_token = action.tokens[0]
    examined = 0
    for word, g in iter_words(backend, word_bound, key=lambda h: backend.search_key(h, level)):
        examined += 1
        if tower.spec.coset_id(g, level) != base_token:
            continue
        if not _fixes_points(tower, g, level, cyl):
            continue
        moved = _first_moved(tower, g, level)
        if moved is None:
            continue
        target = action.index[tower.spec.coset_id(backend.multiply(g, action.representatives[moved]), level)]
        witness = QAWitness(word, format_word(backend, word), level, cylinder_depth, moved, target)
        return QASearch(witness, level, cylinder_depth, word_bound, examined)
    return QASearch(None, level, cylinder_depth, word_bound, examined)


def validate_witness(tower: Tower, witness: QAWitness) -> bool:
    """Replay the word through the generator permutations and recheck the certificate."""
    p = word_perm(tower.level(witness.level), witness.word)
    cyl = cylinder(tower, witness.level, witness.cylinder_depth)
    fixes = bool(np.array_equal(p.images[cyl], cyl))
    return fixes and p(witness.moved_point) == witness.moved_to != witness.moved_point


# contracting and kernel probes ------------------------------------------------------------

@dataclass
class ContractingProbe:
    element: Any
    max_iterate: int
    first_trivial: list[int | None]  # per level; None means not within max_iterate

    def to_json(self) -> dict[str, Any]:
        return {"max_iterate": self.max_iterate,
                "levels": [{"level": lv, "n": n if n is not None else f"NotWithin({self.max_iterate})"}
                           for lv, n in enumerate(self.first_trivial)]}


def contracting_probe(tower: Tower, g, max_level: int, max_iterate: int) -> ContractingProbe:
    """Smallest ``n`` with ``phi^n(g)`` acting trivially on ``X_l``, for each ``l <= max_level``."""
    spec = tower.spec
    if spec.kind is not ChainKind.RENORMALIZATION:
        raise UnsupportedForChainKind("contracting probe needs a renormalization chain")
    backend = spec.backend
    iterates = [g]
    for _ in range(max_iterate):
        iterates.append(backend.apply_phi(iterates[-1]))
    result: list[int | None] = []
    for lv in range(max_level + 1):
        base = tower.level(lv).tokens[0]
        first = None
        for n, h in enumerate(iterates):
            if spec.coset_id(h, lv) == base and _first_moved(tower, h, lv) is None:
                first = n
                break
        result.append(first)
    for lv in range(1, len(result)):
        hi, lo = result[lv], result[lv - 1]
        if hi is not None and (lo is None or lo > hi):
            raise AssertionError(f"contracting probe not monotone at level {lv}")
    return ContractingProbe(g, max_iterate, result)


@dataclass
class KernelWord:
    word: Word
    text: str
    element: Any
    trivial_on_level: bool

    def to_json(self, backend: Backend) -> dict[str, Any]:
        return {"word": self.text, "element": backend.encode(self.element), "trivial_on_level": self.trivial_on_level}


def kernel_probe(tower: Tower, level: int, word_bound: int) -> list[KernelWord]:
    """Nonidentity words of length <= bound lying in the level subgroup (fixing the basepoint)."""
    spec = tower.spec
    backend = spec.backend
    base = tower.level(level).tokens[0]
    found = []
    for word, g in iter_words(backend, word_bound, key=lambda h: backend.search_key(h, level)):
        if backend.is_identity(g) or spec.coset_id(g, level) != base:
            continue
        found.append(KernelWord(word, format_word(backend, word), g, _first_moved(tower, g, level) is None))
    return found


# self-replication -----------------------------------------------------------------------

@dataclass
class SelfReplication:
    passed: bool
    word_bound: int
    depth: int
    certificates: dict[str, str | None]

    def to_json(self) -> dict[str, Any]:
        return {"passed": self.passed, "word_bound": self.word_bound, "depth": self.depth,
                "certificates": self.certificates}


def self_replicating_probe(backend: Backend, word_bound: int, depth: int, vertex: tuple[int, ...] = (0,)) -> SelfReplication:
    """For each generator ``g`` look for ``h`` fixing ``vertex`` with ``h|_vertex == g`` to ``depth``."""
    if not isinstance(backend, WreathAutomaton):
        raise UnsupportedBackend("self-replication needs an automaton backend")
    gens = backend.generators()
    names = backend.generator_names()
    targets = {backend.action(g, depth).tobytes(): i for i, g in enumerate(gens)}
    certs: dict[str, str | None] = {name: None for name in names}
    span = depth + len(vertex)
    for word, h in iter_words(backend, word_bound, key=lambda x: backend.action(x, span).tobytes()):
        if backend.apply_to_vertex(h, vertex) != tuple(vertex):
            continue
        sec = backend.section_at(h, vertex)
        i = targets.get(backend.action(sec, depth).tobytes())
        if i is not None and certs[names[i]] is None:
            certs[names[i]] = format_word(backend, word)
            if all(v is not None for v in certs.values()):
                break
    return SelfReplication(all(v is not None for v in certs.values()), word_bound, depth, certs)
