"""Common backend interface and chain specification."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

from ..errors import BackendMismatch, LevelBudgetExceeded, UnsupportedForChainKind


class ChainKind(str, enum.Enum):
    RENORMALIZATION = "renormalization"
    VERTEX_STABILIZER = "vertex_stabilizer"


class Backend:
    """A finitely generated group with exact arithmetic.

    Subclasses set ``name`` and ``element_type`` and implement the group law,
    ``coset_id`` for the chain they realize, and JSON encoding of elements.
    Renormalizable backends also implement :meth:`apply_phi`.
    """

    name: str = "abstract"
    element_type: type = object
    has_phi: bool = False
    is_tree_action: bool = False
    level_cap: int = 64

    # group law ------------------------------------------------------------

    def identity(self):
        raise NotImplementedError

    def multiply(self, g, h):
        raise NotImplementedError

    def invert(self, g):
        raise NotImplementedError

    def generators(self) -> list:
        raise NotImplementedError

    def generator_names(self) -> list[str]:
        raise NotImplementedError

    def equal(self, g, h) -> bool:
        self.check(g)
        self.check(h)
        return g == h

    def is_identity(self, g) -> bool:
        return self.equal(g, self.identity())

    def check(self, g) -> None:
        if not isinstance(g, self.element_type):
            raise BackendMismatch(f"{type(g).__name__} is not an element of backend {self.name}")

    def power(self, g, k: int):
        if k < 0:
            g, k = self.invert(g), -k
        result = self.identity()
        base = g
        while k:
            if k & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            k >>= 1
        return result

    def evaluate(self, word: Sequence[tuple[int, int]]):
        """Product of ``gens[i] ** e`` over ``(i, e)`` pairs, left to right."""
        gens = self.generators()
        g = self.identity()
        for i, e in word:
            g = self.multiply(g, gens[i] if e == 1 else self.invert(gens[i]) if e == -1 else self.power(gens[i], e))
        return g

    # chain structure --------------------------------------------------------

    def apply_phi(self, g):
        raise UnsupportedForChainKind(f"backend {self.name} has no renormalization")

    def phi_power(self, g, n: int):
        for _ in range(n):
            g = self.apply_phi(g)
        return g

    def coset_id(self, g, level: int, kind: ChainKind = ChainKind.RENORMALIZATION) -> Hashable:
        raise NotImplementedError

    def _check_level(self, level: int) -> None:
        if not 0 <= level <= self.level_cap:
            raise LevelBudgetExceeded(f"level {level} outside [0, {self.level_cap}] for {self.name}")

    def subgroup_generators(self, level: int, kind: ChainKind) -> list | None:
        """Generators of the level subgroup, when known in closed form."""
        if kind is ChainKind.RENORMALIZATION and self.has_phi:
            return [self.phi_power(s, level) for s in self.generators()]
        return None

    def search_key(self, g, level: int) -> Hashable:
        """Deduplication key for word searches at ``level``."""
        return g

    # serialization ------------------------------------------------------------

    def params(self) -> dict[str, Any]:
        return {}

    def encode(self, g) -> Any:
        raise NotImplementedError

    def decode(self, data: Any):
        raise NotImplementedError

    def format_element(self, g) -> str:
        return repr(self.encode(g))

    def describe(self) -> dict[str, Any]:
        return {"backend": self.name, **self.params()}


@dataclass(frozen=True)
class ChainSpec:
    """Which chain of finite-index subgroups to build, and how far."""

    backend: Backend
    kind: ChainKind = ChainKind.RENORMALIZATION
    max_level: int = 3
    max_index: int = 2_000_000

    def __post_init__(self):
        kind = ChainKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ChainKind.RENORMALIZATION and not self.backend.has_phi:
            raise UnsupportedForChainKind(f"backend {self.backend.name} does not implement a renormalization")
        if kind is ChainKind.VERTEX_STABILIZER and not self.backend.is_tree_action:
            raise UnsupportedForChainKind(f"backend {self.backend.name} is not a tree action")
        if self.max_level < 0:
            raise ValueError("max_level must be nonnegative")

    def coset_id(self, g, level: int):
        return self.backend.coset_id(g, level, self.kind)

    def describe(self) -> dict[str, Any]:
        return {**self.backend.describe(), "chain": self.kind.value, "max_level": self.max_level, "max_index": self.max_index}
