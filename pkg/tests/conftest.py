import pytest

from renormlab.backends import ChainKind, ChainSpec, make_backend
from renormlab.tower import Tower

RENORM = ChainKind.RENORMALIZATION
VSTAB = ChainKind.VERTEX_STABILIZER


def tower_for(name, depth, params=None, kind=None):
    backend = make_backend(name, params or {})
    if kind is None:
        kind = VSTAB if name == "grigorchuk" else RENORM
    return Tower.build(ChainSpec(backend, kind, depth), depth)


@pytest.fixture(scope="session")
def heis23():
    return tower_for("heisenberg", 3)


@pytest.fixture(scope="session")
def heis22():
    return tower_for("heisenberg", 4, {"p": 2, "q": 2})


@pytest.fixture(scope="session")
def lattice4():
    return tower_for("lattice", 4)


@pytest.fixture(scope="session")
def affine8():
    return tower_for("affine-unit", 8)


@pytest.fixture(scope="session")
def odo6():
    return tower_for("odometer", 6)


@pytest.fixture(scope="session")
def grig6():
    return tower_for("grigorchuk", 6)


@pytest.fixture(scope="session")
def small_towers(lattice4, odo6, grig6):
    """Towers cheap enough for exhaustive per-point checks."""
    return {
        "heisenberg": tower_for("heisenberg", 2),
        "heisenberg22": tower_for("heisenberg", 3, {"p": 2, "q": 2}),
        "lattice": lattice4,
        "affine-unit": tower_for("affine-unit", 6),
        "odometer": odo6,
        "grigorchuk": grig6,
    }
