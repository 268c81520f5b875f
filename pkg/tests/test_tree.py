import itertools
import re

import numpy as np
import pytest

from renormlab.errors import UnsupportedForChainKind
from renormlab.tree import (
    ClopenSet, adapted_check, basepoint_cylinder, build_tree, check_tree_automorphisms, export_dot, lambda_orbit,
)

from conftest import tower_for


def residue_index(tower, lv):
    """Map residue k mod 2^lv to the vertex index of the odometer tower."""
    return {sum(x << i for i, x in enumerate(tok)): j for j, tok in enumerate(tower.level(lv).tokens)}


def test_tree_shapes(odo6, heis23, lattice4):
    tree = build_tree(odo6, 3)
    assert tree.vertex_count == 15
    assert all(tree.branching(lv) == {2} for lv in range(3))
    tree = build_tree(heis23, 2)
    assert tree.branching(0) == {36} and tree.branching(1) == {36}
    tree = build_tree(lattice4, 2)
    assert tree.branching(1) == {8}
    assert sorted(tree.children(0, 0)) == list(range(8))


def test_generators_act_as_tree_automorphisms(small_towers):
    for tower in small_towers.values():
        tree = build_tree(tower, tower.depth)
        assert check_tree_automorphisms(tower, tree)
        assert len(tree.edges()) == tree.vertex_count - 1


def test_tree_extends_tower():
    tower = tower_for("odometer", 5)
    tower.levels = tower.levels[:2]
    tree = build_tree(tower, 4)
    assert tree.sizes == (1, 2, 4, 8, 16)


def test_cylinders_are_adapted(small_towers):
    for tower in small_towers.values():
        for k in range(tower.depth + 1):
            if tower.n(k) > 5000:
                continue
            report = adapted_check(tower, ClopenSet.of(k, [0]))
            assert report.adapted and report.complete
            assert report.orbit_size == tower.n(k)


def test_whole_space_adapted(heis23):
    report = adapted_check(heis23, ClopenSet.of(1, range(36)))
    assert report.adapted and report.orbit_size == 1


def test_odometer_adapted_subsets_exhaustive(odo6):
    idx = residue_index(odo6, 2)
    blocks = {frozenset(s) for s in ([0], [1], [2], [3], [0, 2], [1, 3], [0, 1, 2, 3])}
    for r in range(1, 5):
        for subset in itertools.combinations(range(4), r):
            U = ClopenSet.of(2, [idx[x] for x in subset])
            assert adapted_check(odo6, U).adapted == (frozenset(subset) in blocks), subset
    assert adapted_check(odo6, ClopenSet.of(2, [idx[0], idx[2]])).adapted
    assert not adapted_check(odo6, ClopenSet.of(2, [idx[0], idx[1]])).adapted


def test_refine_respects_cylinders(heis23):
    U = ClopenSet.of(1, [0, 5])
    R = U.refine(heis23, 2)
    proj = heis23.level(2).projection
    assert R.vertices == frozenset(int(v) for v in np.nonzero(np.isin(proj, [0, 5]))[0])
    assert len(R.vertices) == 2 * 36
    with pytest.raises(ValueError):
        R.refine(heis23, 1)


def test_lambda_orbit(small_towers, heis23):
    for name in ("heisenberg", "lattice", "affine-unit", "odometer"):
        tower = small_towers[name]
        orbit = lambda_orbit(tower, 0, tower.depth)
        assert orbit[1] == basepoint_cylinder(tower, 1, 1)
        for i, U in enumerate(orbit):
            assert U.depth == i and 0 in U.vertices
    orbit = lambda_orbit(heis23, 0, 2)
    assert orbit[2].vertices == frozenset({0})
    assert heis23.level(2).tokens[0] == (0, 0, 0)
    deeper = lambda_orbit(heis23, 1, 2, cylinder_depth=1)
    assert [len(U.vertices) for U in deeper] == [1, 1, 1]


def test_lambda_orbit_rejects_vertex_chain(grig6):
    with pytest.raises(UnsupportedForChainKind):
        lambda_orbit(grig6, 0, 1)


def test_export_dot(odo6, heis23):
    text = export_dot(build_tree(odo6, 1))
    nodes = re.findall(r'^\s*"(\d+:\d+)" \[', text, re.M)
    edges = re.findall(r"->", text)
    assert nodes == ["0:0", "1:0", "1:1"] and len(edges) == 2
    assert text.startswith("digraph coset_tree {") and text.rstrip().endswith("}")
    assert 'label="1:1"' in text
    text = export_dot(build_tree(heis23, 1))
    assert len(re.findall(r'^\s*"\d+:\d+" \[', text, re.M)) == 37
    assert export_dot(build_tree(heis23, 1)) == text
    bold = export_dot(build_tree(odo6, 1), highlight_basepoint=True, name="t")
    assert "style=bold" in bold and bold.startswith("digraph t {")
