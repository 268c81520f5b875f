"""Groups generated by finite invertible automata acting on a rooted tree.

A state ``s`` acts on words over ``range(d)`` by ``s(x w) = perm_s(x) s|_x(w)``;
in wreath notation the binary odometer is ``a = (1, a) sigma`` and the
Grigorchuk generator ``b`` is ``(a, c)``.  Group elements are words in the
states, reduced by free cancellation only; equality is decided by comparing
actions on the tree up to ``compare_depth``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import VertexNotFixed
from .base import Backend, ChainKind


@dataclass(frozen=True)
class Word:
    """Reduced word; letter ``+(i+1)`` is state ``i`` and ``-(i+1)`` its inverse."""

    letters: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.letters)


class WreathAutomaton(Backend):
    name = "automaton"
    element_type = Word
    is_tree_action = True
    level_cap = 20

    def __init__(
        self,
        states: Sequence[str],
        perms: Sequence[Sequence[int]],
        sections: Sequence[Sequence[str | None]],
        *,
        phi: Mapping[str, Sequence[str]] | None = None,
        compare_depth: int = 12,
        basepoint: Sequence[int] = (),
        preset: str | None = None,
    ):
        self.states = list(states)
        index = {s: i for i, s in enumerate(self.states)}
        self.d = len(perms[0]) if perms else 2
        self.perms = [tuple(int(x) for x in p) for p in perms]
        for p in self.perms:
            if sorted(p) != list(range(self.d)):
                raise ValueError(f"state permutation {p} is not a bijection of the alphabet")
        self.perm_inv = [tuple(p.index(y) for y in range(self.d)) for p in self.perms]
        # section entries: state index or -1 for the identity
        self.sections = [tuple(-1 if s is None else index[s] for s in secs) for secs in sections]
        if len(self.sections) != len(self.states) or any(len(s) != self.d for s in self.sections):
            raise ValueError("each state needs one section per letter")
        self.compare_depth = int(compare_depth)
        self.basepoint = tuple(int(x) for x in basepoint)
        self.preset = preset
        self._phi_src = {k: list(v) for k, v in phi.items()} if phi else None
        self._phi = None
        if phi:
            self._phi = {}
            for s, image in phi.items():
                letters = []
                for tok in image:
                    neg = tok.endswith("^-1")
                    base = tok[:-3] if neg else tok
                    letters.append(-(index[base] + 1) if neg else index[base] + 1)
                self._phi[index[s] + 1] = letters
            if set(self._phi) != {i + 1 for i in range(len(self.states))}:
                raise ValueError("phi must be given for every state")
        self.has_phi = self._phi is not None
        self._level_perms: dict[int, list[np.ndarray]] = {0: [np.zeros(1, dtype=np.int64)] * len(self.states)}
        self._level_inv: dict[int, list[np.ndarray]] = {}
        self.involutive = [self._is_involution(i) for i in range(len(self.states))]

    # tree actions ---------------------------------------------------------------

    def _state_perms(self, n: int) -> list[np.ndarray]:
        """Actions of the states on level ``n``; vertex index is little-endian in d."""
        if n in self._level_perms:
            return self._level_perms[n]
        below = self._state_perms(n - 1)
        size = self.d ** (n - 1)
        ident = np.arange(size, dtype=np.int64)
        out = []
        for i in range(len(self.states)):
            arr = np.empty(self.d * size, dtype=np.int64)
            for x in range(self.d):
                sec = self.sections[i][x]
                sub = ident if sec < 0 else below[sec]
                # vertex x + d*w  ->  perm(x) + d*sec(w)
                arr[x::self.d] = self.perms[i][x] + self.d * sub
            out.append(arr)
        self._level_perms[n] = out
        return out

    def _letter_perm(self, letter: int, n: int) -> np.ndarray:
        i = abs(letter) - 1
        if letter > 0:
            return self._state_perms(n)[i]
        if n not in self._level_inv:
            invs = []
            for arr in self._state_perms(n):
                inv = np.empty_like(arr)
                inv[arr] = np.arange(arr.shape[0])
                invs.append(inv)
            self._level_inv[n] = invs
        return self._level_inv[n][i]

    def action(self, g: Word, n: int) -> np.ndarray:
        """Permutation of the ``d**n`` level-``n`` vertices induced by ``g``."""
        self.check(g)
        arr = np.arange(self.d**n, dtype=np.int64)
        for letter in reversed(g.letters):
            arr = self._letter_perm(letter, n)[arr]
        return arr

    def _is_involution(self, i: int) -> bool:
        arr = self._state_perms(self.compare_depth)[i]
        return bool(np.array_equal(arr[arr], np.arange(arr.shape[0])))

    def _apply_letter(self, letter: int, vertex: Sequence[int]) -> tuple[tuple[int, ...], int]:
        """Image of ``vertex`` under one letter, and the letter's section there (0 = identity)."""
        st = abs(letter) - 1
        out = []
        if letter > 0:
            for k, x in enumerate(vertex):
                if st < 0:
                    out.extend(vertex[k:])
                    break
                out.append(self.perms[st][x])
                st = self.sections[st][x]
            return tuple(out), (st + 1 if st >= 0 else 0)
        for k, y in enumerate(vertex):
            if st < 0:
                out.extend(vertex[k:])
                break
            x = self.perm_inv[st][y]
            out.append(x)
            st = self.sections[st][x]
        return tuple(out), (-(st + 1) if st >= 0 else 0)

    def apply_to_vertex(self, g: Word, vertex: Sequence[int]) -> tuple[int, ...]:
        self.check(g)
        v = tuple(vertex)
        for letter in reversed(g.letters):
            v, _ = self._apply_letter(letter, v)
        return v

    def section_at(self, g: Word, vertex: Sequence[int]) -> Word:
        """Section ``g|_v`` of an element fixing ``vertex``."""
        self.check(g)
        v = tuple(vertex)
        w = v
        pieces = []
        for letter in reversed(g.letters):
            w, sec = self._apply_letter(letter, w)
            if sec:
                pieces.append(sec)
        if w != v:
            raise VertexNotFixed(f"{self.format_element(g)} moves vertex {v} to {w}")
        return self._reduce(reversed(pieces))

    # group law -----------------------------------------------------------------

    def _normalize_letter(self, letter: int) -> int:
        return abs(letter) if letter < 0 and self.involutive[-letter - 1] else letter

    def _reduce(self, letters) -> Word:
        stack: list[int] = []
        for letter in letters:
            letter = self._normalize_letter(letter)
            if stack and stack[-1] == self._normalize_letter(-letter):
                stack.pop()
            else:
                stack.append(letter)
        return Word(tuple(stack))

    def identity(self):
        return Word(())

    def multiply(self, g, h):
        self.check(g)
        self.check(h)
        return self._reduce(g.letters + h.letters)

    def invert(self, g):
        self.check(g)
        return self._reduce(-x for x in reversed(g.letters))

    def generators(self):
        return [Word((i + 1,)) for i in range(len(self.states))]

    def generator_names(self):
        return list(self.states)

    def equal(self, g, h, depth: int | None = None) -> bool:
        self.check(g)
        self.check(h)
        if g.letters == h.letters:
            return True
        n = self.compare_depth if depth is None else depth
        return bool(np.array_equal(self.action(g, n), self.action(h, n)))

    def is_identity(self, g, depth: int | None = None) -> bool:
        return self.equal(g, self.identity(), depth)

    def apply_phi(self, g):
        if self._phi is None:
            return super().apply_phi(g)
        self.check(g)
        out: list[int] = []
        for letter in g.letters:
            image = self._phi[abs(letter)]
            out.extend(image if letter > 0 else [-x for x in reversed(image)])
        return self._reduce(out)

    def basepoint_prefix(self, level: int) -> tuple[int, ...]:
        bp = self.basepoint[:level]
        return bp + (0,) * (level - len(bp))

    def coset_id(self, g, level, kind=ChainKind.VERTEX_STABILIZER):
        # For renormalizations this presumes phi^l(G) is the vertex stabilizer,
        # which holds for the odometer preset.
        self._check_level(level)
        return self.apply_to_vertex(g, self.basepoint_prefix(level))

    def subgroup_generators(self, level, kind):
        if kind is ChainKind.VERTEX_STABILIZER:
            return None
        return super().subgroup_generators(level, kind)

    def search_key(self, g, level):
        return self.action(g, max(level, 1)).tobytes()

    # serialization ------------------------------------------------------------

    def params(self):
        if self.preset is not None:
            out = {"preset": self.preset}
        else:
            out = {
                "states": self.states,
                "perms": [list(p) for p in self.perms],
                "sections": [[None if s < 0 else self.states[s] for s in secs] for secs in self.sections],
            }
            if self._phi_src:
                out["phi"] = self._phi_src
        out["compare_depth"] = self.compare_depth
        if self.basepoint:
            out["basepoint"] = list(self.basepoint)
        return out

    def encode(self, g):
        return list(g.letters)

    def decode(self, data):
        return self._reduce(int(x) for x in data)

    def letter_name(self, letter: int) -> str:
        name = self.states[abs(letter) - 1]
        return name if letter > 0 else name + "^-1"

    def format_element(self, g):
        return " ".join(self.letter_name(x) for x in g.letters) or "e"


def odometer(compare_depth: int = 12) -> WreathAutomaton:
    """Binary adding machine ``a = (1, a) sigma`` with renormalization ``a -> a^2``."""
    return WreathAutomaton(["a"], [(1, 0)], [(None, "a")], phi={"a": ["a", "a"]},
                           compare_depth=compare_depth, preset="odometer")


def grigorchuk(compare_depth: int = 12) -> WreathAutomaton:
    """``a = sigma``, ``b = (a, c)``, ``c = (a, d)``, ``d = (1, b)``."""
    return WreathAutomaton(
        ["a", "b", "c", "d"],
        [(1, 0), (0, 1), (0, 1), (0, 1)],
        [(None, None), ("a", "c"), ("a", "d"), (None, "b")],
        compare_depth=compare_depth,
        preset="grigorchuk",
    )


def flip_toy(compare_depth: int = 12) -> WreathAutomaton:
    """Single state swapping the first letter with trivial sections (group of order 2)."""
    return WreathAutomaton(["t"], [(1, 0)], [(None, None)], compare_depth=compare_depth, preset="flip-toy")
