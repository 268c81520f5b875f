"""Finite models of a group chain: coset actions, quotients, discriminants.

Level ``l`` is the left-coset space ``X_l = G / G_l`` built by breadth-first
search from the identity coset.  Its generator permutations generate the
faithful quotient ``Q_l`` (the kernel of the action is the normal core of
``G_l``), and the stabilizer of the basepoint in ``Q_l`` is the
discriminant level ``D_l``.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Hashable, Sequence

import numpy as np

from .backends.base import ChainKind, ChainSpec
from .errors import CacheVersionMismatch, IndexBudgetExceeded, InsufficientDepth, TooLarge, UnsupportedForChainKind
from .perm import AbelianShape, Permutation, PermGroupBSGS, abelian_invariants, block_projection, point_stabilizer

CACHE_FORMAT = "renormlab-tower"
CACHE_VERSION = 1


@dataclass
class LevelAction:
    level: int
    representatives: list
    tokens: list
    generator_perms: list[Permutation]
    projection: np.ndarray | None
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.index:
            self.index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def size(self) -> int:
        return len(self.representatives)


def build_level(spec: ChainSpec, level: int, previous: LevelAction | None = None) -> LevelAction:
    """Enumerate ``X_level`` by BFS over generators, then their inverses."""
    if level > spec.max_level:
        raise InsufficientDepth(f"level {level} exceeds max_level {spec.max_level}")
    backend = spec.backend
    gens = backend.generators()
    invs = [backend.invert(g) for g in gens]
    moves = list(gens) + [h for g, h in zip(gens, invs) if h != g]
    ident = backend.identity()
    tokens = [spec.coset_id(ident, level)]
    reps = [ident]
    index = {tokens[0]: 0}
    images = [[] for _ in gens]
    k = 0
    while k < len(reps):
        rep = reps[k]
        for j, g in enumerate(moves):
            h = backend.multiply(g, rep)
            t = spec.coset_id(h, level)
            i = index.get(t)
            if i is None:
                i = len(reps)
                if i >= spec.max_index:
                    raise IndexBudgetExceeded(f"index of level {level} exceeds max_index={spec.max_index}", level)
                index[t] = i
                reps.append(h)
                tokens.append(t)
            if j < len(gens):
                images[j].append(i)
        k += 1
    perms = [Permutation(np.array(img, dtype=np.int32), check=True) for img in images]
    projection = None
    if level > 0:
        if previous is None:
            raise ValueError("previous level required to build the projection")
        projection = np.array([previous.index[spec.coset_id(r, level - 1)] for r in reps], dtype=np.int64)
    return LevelAction(level, reps, tokens, perms, projection, index)


def quotient_group(action: LevelAction, spec: ChainSpec | None = None) -> PermGroupBSGS:
    """BSGS of ``Q_l`` with the basepoint as first base point.

    For renormalization chains the level subgroup is generated by the
    ``phi^l`` images of the generators, and their permutations generate the
    basepoint stabilizer; Schreier-Sims then only runs on that stabilizer.
    """
    n = action.size
    stab = None
    if spec is not None:
        sub = spec.backend.subgroup_generators(action.level, spec.kind)
        if sub is not None:
            stab = [element_perm(spec, action, g) for g in sub]
    return PermGroupBSGS.build(action.generator_perms, n, base_prefix=(0,), stabilizer_generators=stab)


def discriminant_level(action: LevelAction, Q: PermGroupBSGS) -> PermGroupBSGS:
    return point_stabilizer(Q, 0)


def element_perm(spec: ChainSpec, action: LevelAction, g) -> Permutation:
    """Permutation of ``X_l`` induced by a group element."""
    backend = spec.backend
    idx = action.index
    lv = action.level
    arr = np.fromiter((idx[spec.coset_id(backend.multiply(g, r), lv)] for r in action.representatives),
                      dtype=np.int32, count=action.size)
    return Permutation(arr, check=False)


def word_perm(action: LevelAction, word: Sequence[tuple[int, int]]) -> Permutation:
    """Permutation of a word ``[(generator index, +-1), ...]`` read left to right."""
    arr = np.arange(action.size, dtype=np.int32)
    for gi, e in reversed(word):
        p = action.generator_perms[gi]
        img = p.images if e > 0 else p.inverse().images
        for _ in range(abs(e)):
            arr = img[arr]
    return Permutation(arr, check=False)


@dataclass
class LevelGroups:
    level: int
    n: int
    Q: PermGroupBSGS
    D: PermGroupBSGS
    shape: AbelianShape | None


@dataclass
class DiscriminantTower:
    """Snapshot of the per-level groups and the bonding data between them."""

    levels: list[LevelGroups]
    bondings: dict[int, list[tuple[Permutation, Permutation]]]

    def orders(self) -> list[tuple[int, int, int]]:
        return [(lg.n, lg.Q.order, lg.D.order) for lg in self.levels]


class Tower:
    """Coset tower of a chain, with lazily computed quotient data."""

    def __init__(self, spec: ChainSpec, levels: list[LevelAction] | None = None):
        self.spec = spec
        self.levels: list[LevelAction] = list(levels or [])
        self._Q: dict[int, PermGroupBSGS] = {}
        self._D: dict[int, PermGroupBSGS] = {}
        self._shape: dict[int, AbelianShape | None] = {}
        self._bond: dict[int, list] = {}
        self._image: dict[tuple[int, int], PermGroupBSGS] = {}
        self.cache_hit = False

    @classmethod
    def build(cls, spec: ChainSpec, depth: int | None = None) -> "Tower":
        tower = cls(spec)
        tower.extend(spec.max_level if depth is None else depth)
        return tower

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def extend(self, depth: int) -> None:
        if depth > self.spec.max_level:
            raise InsufficientDepth(f"depth {depth} exceeds max_level {self.spec.max_level}")
        while self.depth < depth:
            prev = self.levels[-1] if self.levels else None
            self.levels.append(build_level(self.spec, self.depth + 1, prev))

    def level(self, lv: int) -> LevelAction:
        if lv > self.depth:
            self.extend(lv)
        return self.levels[lv]

    def n(self, lv: int) -> int:
        return self.level(lv).size

    # groups ---------------------------------------------------------------------

    def quotient(self, lv: int) -> PermGroupBSGS:
        if lv not in self._Q:
            self._Q[lv] = quotient_group(self.level(lv), self.spec)
        return self._Q[lv]

    def discriminant(self, lv: int) -> PermGroupBSGS:
        if lv not in self._D:
            self._D[lv] = discriminant_level(self.level(lv), self.quotient(lv))
        return self._D[lv]

    def shape(self, lv: int, budget: int = 10**6) -> AbelianShape | None:
        """Isomorphism type of ``D_l`` when abelian and within budget."""
        if lv not in self._shape:
            D = self.discriminant(lv)
            try:
                self._shape[lv] = abelian_invariants(list(D.strong_generators), D.degree, budget=budget)
            except TooLarge:
                self._shape[lv] = None
        return self._shape[lv]

    def element_perm(self, g, lv: int) -> Permutation:
        return element_perm(self.spec, self.level(lv), g)

    def word_perm(self, word, lv: int) -> Permutation:
        return word_perm(self.level(lv), word)

    # projections and bondings -------------------------------------------------

    def projection_between(self, hi: int, lo: int) -> np.ndarray:
        """Composite projection ``X_hi -> X_lo``."""
        if lo > hi:
            raise ValueError("lo must not exceed hi")
        proj = np.arange(self.n(hi), dtype=np.int64)
        for lv in range(hi, lo, -1):
            proj = self.level(lv).projection[proj]
        return proj

    def bonding_map(self, lv: int) -> list[tuple[Permutation, Permutation]]:
        """Images in ``D_lv`` of the strong generators of ``D_{lv+1}``."""
        if lv not in self._bond:
            D_hi = self.discriminant(lv + 1)
            D_lo = self.discriminant(lv)
            proj = self.level(lv + 1).projection
            pairs = []
            for g in D_hi.strong_generators:
                img = block_projection(g, proj, self.n(lv))
                if img(0) != 0 or not D_lo.contains(img):
                    raise AssertionError(f"bonding image at level {lv} leaves D_{lv}")
                pairs.append((g, img))
            self._bond[lv] = pairs
        return self._bond[lv]

    def stable_image(self, lv: int, k: int) -> PermGroupBSGS:
        """Image of ``D_{lv+k}`` in ``D_lv`` under the composed bondings."""
        key = (lv, k)
        if key not in self._image:
            if k == 0:
                self._image[key] = self.discriminant(lv)
            else:
                proj = self.projection_between(lv + k, lv)
                gens = [block_projection(g, proj, self.n(lv)) for g in self.discriminant(lv + k).strong_generators]
                self._image[key] = PermGroupBSGS.build(gens, self.n(lv), base_prefix=(0,))
        return self._image[key]

    def bonding_surjective(self, lv: int) -> bool:
        return self.stable_image(lv, 1).order == self.discriminant(lv).order

    def shift_map(self, lv: int) -> np.ndarray:
        """``s_l: X_l -> X_{l+1}``, the coset of ``g`` to the coset of ``phi(g)``."""
        if self.spec.kind is not ChainKind.RENORMALIZATION:
            raise UnsupportedForChainKind("shift map needs a renormalization chain")
        src, dst = self.level(lv), self.level(lv + 1)
        backend = self.spec.backend
        out = np.array([dst.index[self.spec.coset_id(backend.apply_phi(r), lv + 1)] for r in src.representatives],
                       dtype=np.int64)
        if len(set(out.tolist())) != out.shape[0]:
            raise AssertionError(f"shift map at level {lv} is not injective")
        return out

    def discriminant_tower(self, shape_budget: int = 10**6) -> DiscriminantTower:
        groups = [LevelGroups(lv, self.n(lv), self.quotient(lv), self.discriminant(lv), self.shape(lv, shape_budget))
                  for lv in range(self.depth + 1)]
        bondings = {lv: self.bonding_map(lv) for lv in range(self.depth)}
        return DiscriminantTower(groups, bondings)

    # cache ------------------------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        backend = self.spec.backend
        payload = {
            "config": self.spec.describe(),
            "levels": [
                {
                    "level": la.level,
                    "n": la.size,
                    "generator_perms": [p.tolist() for p in la.generator_perms],
                    "projection": None if la.projection is None else la.projection.tolist(),
                    "tokens": [_token_to_json(t) for t in la.tokens],
                    "representatives": [backend.encode(r) for r in la.representatives],
                }
                for la in self.levels
            ],
        }
        return {"format": CACHE_FORMAT, "version": CACHE_VERSION, "checksum": _checksum(payload), **payload}

    def save(self, path: str | os.PathLike) -> None:
        """Write the cache atomically (temp file, then rename)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        text = json.dumps(self.to_json(), separators=(",", ":"))
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    @classmethod
    def from_json(cls, data: dict[str, Any], spec: ChainSpec) -> "Tower":
        if data.get("format") != CACHE_FORMAT or data.get("version") != CACHE_VERSION:
            raise CacheVersionMismatch(f"unsupported cache header {data.get('format')!r} v{data.get('version')!r}")
        payload = {"config": data.get("config"), "levels": data.get("levels")}
        if data.get("checksum") != _checksum(payload):
            raise CacheVersionMismatch("cache checksum mismatch")
        expected = spec.describe()
        cfg = dict(payload["config"])
        if {k: v for k, v in cfg.items() if k != "max_level"} != {k: v for k, v in expected.items() if k != "max_level"}:
            raise CacheVersionMismatch("cache was built for a different chain")
        backend = spec.backend
        levels = []
        for entry in payload["levels"]:
            perms = [Permutation(p) for p in entry["generator_perms"]]
            proj = None if entry["projection"] is None else np.array(entry["projection"], dtype=np.int64)
            reps = [backend.decode(r) for r in entry["representatives"]]
            tokens = [_token_from_json(t) for t in entry["tokens"]]
            if len(reps) != entry["n"] or len(tokens) != entry["n"]:
                raise CacheVersionMismatch("cache level size mismatch")
            levels.append(LevelAction(entry["level"], reps, tokens, perms, proj))
        return cls(spec, levels)

    @classmethod
    def load(cls, path: str | os.PathLike, spec: ChainSpec) -> "Tower":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CacheVersionMismatch(f"unreadable cache {path}: {exc}") from None
        tower = cls.from_json(data, spec)
        tower.cache_hit = True
        return tower


def _token_to_json(t: Hashable):
    return list(t) if isinstance(t, tuple) else t


def _token_from_json(t):
    return tuple(t) if isinstance(t, list) else t


def _checksum(payload: dict[str, Any]) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def build_tower(spec: ChainSpec, depth: int | None = None) -> Tower:
    return Tower.build(spec, depth)


def bonding_map(tower: Tower, lv: int):
    return tower.bonding_map(lv)


def shift_map(tower: Tower, lv: int) -> np.ndarray:
    return tower.shift_map(lv)
