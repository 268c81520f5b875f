"""Concrete renormalizable groups and tree actions."""

from __future__ import annotations

from typing import Any

from ..errors import ConfigInvalid
from .affine import AffineElement, AffineUnit
from .automaton import Word, WreathAutomaton, flip_toy, grigorchuk, odometer
from .base import Backend, ChainKind, ChainSpec
from .heisenberg import Heisenberg, HeisenbergElement
from .lattice import LatticeElement, LatticeSemidirect, perm_from_cycles

PRESETS = ("heisenberg", "lattice", "affine-unit", "odometer", "grigorchuk")


def make_backend(name: str, params: dict[str, Any] | None = None) -> Backend:
    """Instantiate a preset by name, validating its parameters."""
    params = dict(params or {})

    def take(key, default, cast=int):
        try:
            return cast(params.pop(key, default))
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"{name}: bad value for {key!r}: {exc}") from None

    try:
        if name == "heisenberg":
            p, q = take("p", 2), take("q", 3)
            if p < 2 or q < 2:
                raise ConfigInvalid("heisenberg: p and q must be >= 2")
            backend = Heisenberg(p, q)
        elif name == "lattice":
            k, m = take("k", 3), take("m", 2)
            if k < 1 or m < 2:
                raise ConfigInvalid("lattice: need k >= 1 and m >= 2")
            # H generators as cycle lists on symbols 1..k
            h_cycles = params.pop("h_generators", [[[1, 2, 3]]] if k == 3 else [])
            backend = LatticeSemidirect(k, m, [perm_from_cycles(k, cyc) for cyc in h_cycles])
        elif name == "affine-unit":
            backend = AffineUnit()
        elif name in ("odometer", "grigorchuk"):
            depth = take("compare_depth", 12)
            if not 1 <= depth <= 20:
                raise ConfigInvalid("compare_depth must be in 1..20")
            backend = odometer(depth) if name == "odometer" else grigorchuk(depth)
        else:
            raise ConfigInvalid(f"unknown backend {name!r}; choose one of {', '.join(PRESETS)}")
    except ConfigInvalid:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigInvalid(f"{name}: {exc}") from None
    if params:
        raise ConfigInvalid(f"{name}: unknown parameters {sorted(params)}")
    return backend


__all__ = [
    "AffineElement", "AffineUnit", "Backend", "ChainKind", "ChainSpec", "Heisenberg", "HeisenbergElement",
    "LatticeElement", "LatticeSemidirect", "PRESETS", "Word", "WreathAutomaton", "flip_toy", "grigorchuk",
    "make_backend", "odometer", "perm_from_cycles",
]
