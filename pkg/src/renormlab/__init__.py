"""Finite-level computations for renormalizable group chains and their coset trees."""

from .backends import PRESETS, ChainKind, ChainSpec, make_backend
from .errors import RenormlabError
from .perm import Permutation, PermGroupBSGS, abelian_invariants
from .tower import Tower
from .analyzer import classify_discriminant, qa_witness_search, stable_image

__all__ = [
    "PRESETS", "ChainKind", "ChainSpec", "make_backend", "RenormlabError", "Permutation",
    "PermGroupBSGS", "abelian_invariants", "Tower", "classify_discriminant", "qa_witness_search",
    "stable_image",
]
__version__ = "0.1.0"
