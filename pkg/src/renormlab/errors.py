"""Exception hierarchy shared by all renormlab modules."""

from __future__ import annotations


class RenormlabError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class DegreeMismatch(RenormlabError, ValueError):
    pass


class NotBlockCompatible(RenormlabError):
    """A permutation does not permute the fibers of a projection as blocks."""


class TooLarge(RenormlabError):
    pass


class BackendMismatch(RenormlabError, TypeError):
    pass


class UnsupportedForChainKind(RenormlabError):
    pass


class UnsupportedBackend(RenormlabError):
    pass


class VertexNotFixed(RenormlabError):
    pass


class LevelBudgetExceeded(RenormlabError):
    exit_code = 3


class IndexBudgetExceeded(RenormlabError):
    exit_code = 3

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


class InsufficientDepth(RenormlabError):
    pass


class ConfigInvalid(RenormlabError):
    exit_code = 2


class CacheVersionMismatch(RenormlabError):
    exit_code = 4
