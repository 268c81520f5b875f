"""Acceptance criteria 1-7, one test each, with a PASS/FAIL line per criterion."""

import random
import time

import numpy as np
import pytest

from renormlab.analyzer import (
    VerdictKind, classify_discriminant, kernel_probe, qa_witness_search, self_replicating_probe, validate_witness,
)
from renormlab.backends import AffineUnit, ChainKind, Heisenberg, flip_toy, grigorchuk, make_backend, odometer
from renormlab.perm import Permutation, PermGroupBSGS, TooLarge, closure

from conftest import tower_for
from test_backends import in_level_subgroup, random_element

RESULTS = {}


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        RESULTS[number] = ok
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, detail

    return emit


def test_criterion_1_heisenberg_tower(report):
    start = time.perf_counter()
    tower = tower_for("heisenberg", 3, {"p": 2, "q": 3})
    n = [tower.n(lv) for lv in (1, 2, 3)]
    q = [tower.quotient(lv).order for lv in (1, 2, 3)]
    d = [tower.discriminant(lv).order for lv in (1, 2, 3)]
    shapes = [tower.shape(lv).invariant_factors for lv in (1, 2, 3)]
    elapsed = time.perf_counter() - start
    ok = (n == [36, 1296, 46656] and q == [216, 46656, 10077696] and d == [6, 36, 216]
          and shapes == [(6,), (36,), (216,)] and elapsed <= 60)
    report(1, "Heisenberg(2,3) n, |Q|, |D| and cyclic D", ok, f"n={n} Q={q} D={d} shapes={shapes} {elapsed:.1f}s")


def test_criterion_2_equal_primes_trivial_limit(report):
    tower = tower_for("heisenberg", 4, {"p": 2, "q": 2})
    images = [tower.stable_image(lv, lv).order for lv in (1, 2)]
    verdict = classify_discriminant(tower, 2)
    ok = images == [1, 1] and verdict.kind is VerdictKind.TRIVIAL_IN_LIMIT
    report(2, "Heisenberg(2,2) D_2l -> D_l trivial, TrivialInLimit", ok, f"images={images} verdict={verdict.label()}")


def test_criterion_3_lattice_finite_stable(report):
    tower = tower_for("lattice", 4)
    d = [tower.discriminant(lv).order for lv in range(1, 5)]
    bijective = all(tower.stable_image(lv, 1).order == tower.discriminant(lv).order == tower.discriminant(lv + 1).order
                    for lv in range(1, 4))
    verdict = classify_discriminant(tower, 3)
    words = kernel_probe(tower, 3, 2)
    lat = tower.spec.backend
    h = lat.generators()[3]
    expected = {lat.power(h, 1), lat.power(h, 2)}
    ok = (d == [3, 3, 3, 3] and bijective and verdict.label() == "FiniteStable(3)"
          and len(words) == 2 and {w.element for w in words} == expected)
    report(3, "Lattice D_l = 3, bijective bondings, FiniteStable(3), kernel {h, h^2}", ok,
           f"D={d} verdict={verdict.label()} kernel={[w.text for w in words]}")


def _affine_stabilizer_brute_force(level):
    """Distinct permutations of the cosets a^i Gamma_l fixing i = 0, over a box of group elements."""
    aff = AffineUnit()
    a, b, c = aff.generators()
    mod = 2**level
    perms = set()
    for t in range(-mod, mod):
        for eps in (0, 1):
            for m in range(-mod, mod):
                g = aff.multiply(aff.multiply(aff.power(a, t), aff.power(b, eps)), aff.power(c, m))
                # g a^i = a^(g(i)) (...), so g sends coset i to g(i) mod 2^l
                images = tuple(aff.coset_id(aff.multiply(g, aff.power(a, i)), level) for i in range(mod))
                if images[0] == 0:
                    perms.add(images)
    return len(perms)


def test_criterion_4_affine_growing(report):
    start = time.perf_counter()
    tower = tower_for("affine-unit", 8)
    d = [tower.discriminant(lv).order for lv in range(1, 9)]
    surjective = all(tower.bonding_surjective(lv) for lv in range(1, 8))
    verdict = classify_discriminant(tower, 3)
    elapsed = time.perf_counter() - start
    brute = [_affine_stabilizer_brute_force(lv) for lv in range(1, 5)]
    ok = (d == [2 ** (lv - 1) for lv in range(1, 9)] and brute == d[:4] and surjective
          and verdict.kind is VerdictKind.GROWING and elapsed <= 10)
    report(4, "AffineUnit |D_l| = 2^(l-1), surjective, Growing", ok,
           f"D={d} brute={brute} verdict={verdict.label()} {elapsed:.2f}s")


def test_criterion_5_quasi_analyticity(report):
    heis = tower_for("heisenberg", 3)
    none = qa_witness_search(heis, 3, 1, 8)
    grig = tower_for("grigorchuk", 6)
    found = qa_witness_search(grig, 6, 1, 12)
    ok = not none.found and found.found and validate_witness(grig, found.witness)
    report(5, "QA: Heisenberg NoneFound, Grigorchuk witness validates", ok,
           f"heisenberg examined {none.words_examined}; grigorchuk witness "
           f"{found.witness.text if found.found else None!r}")


def _corpus_groups():
    rng = random.Random(2024)
    corpus = []
    for _ in range(150):
        degree = rng.randint(2, 8)
        gens = []
        for _ in range(rng.randint(1, 3)):
            images = list(range(degree))
            rng.shuffle(images)
            gens.append(Permutation(images))
        corpus.append((gens, degree))
    for name, depth, params in [("heisenberg", 1, {}), ("heisenberg", 2, {"p": 2, "q": 2}), ("lattice", 3, {}),
                                ("affine-unit", 6, {}), ("odometer", 6, {}), ("grigorchuk", 4, {})]:
        tower = tower_for(name, depth, params)
        for lv in range(depth + 1):
            action = tower.level(lv)
            corpus.append((list(action.generator_perms), action.size))
    return corpus


def test_criterion_6_property_suite(report):
    failures = []
    towers = {
        "heisenberg": tower_for("heisenberg", 3),
        "heisenberg22": tower_for("heisenberg", 4, {"p": 2, "q": 2}),
        "lattice": tower_for("lattice", 4),
        "affine-unit": tower_for("affine-unit", 8),
        "odometer": tower_for("odometer", 6),
        "grigorchuk": tower_for("grigorchuk", 6),
    }
    for name, tower in towers.items():
        for lv in range(tower.depth + 1):
            if tower.discriminant(lv).order * tower.n(lv) != tower.quotient(lv).order:
                failures.append(f"orbit-stabilizer {name} l={lv}")
            if lv == 0 or tower.n(lv) > 10**5:
                continue
            proj = tower.level(lv).projection
            for hi, lo in zip(tower.level(lv).generator_perms, tower.level(lv - 1).generator_perms):
                if not np.array_equal(proj[hi.images], lo.images[proj]):
                    failures.append(f"equivariance {name} l={lv}")
        if tower.spec.kind is ChainKind.RENORMALIZATION:
            for lv in range(tower.depth):
                s = tower.shift_map(lv)
                cyl = np.nonzero(tower.projection_between(lv + 1, 1) == 0)[0]
                if sorted(s.tolist()) != cyl.tolist():
                    failures.append(f"shift image {name} l={lv}")

    rng = random.Random(99)
    phi_backends = [Heisenberg(2, 3), Heisenberg(2, 2), make_backend("lattice", {}), AffineUnit(), odometer(10)]
    for backend in phi_backends:
        for _ in range(10_000):
            g, h = random_element(rng, backend, 5), random_element(rng, backend, 5)
            if not backend.equal(backend.apply_phi(backend.multiply(g, h)),
                                 backend.multiply(backend.apply_phi(g), backend.apply_phi(h))):
                failures.append(f"phi homomorphism {backend.name}")
                break
    for backend in phi_backends + [grigorchuk(10)]:
        kind = ChainKind.RENORMALIZATION if backend.has_phi else ChainKind.VERTEX_STABILIZER
        for i in range(10_000):
            level = 1 + i % 3
            g = random_element(rng, backend)
            if kind is ChainKind.RENORMALIZATION:
                gamma = backend.phi_power(random_element(rng, backend, 6), level)
            else:
                gamma = random_element(rng, backend, 10)
                while not in_level_subgroup(backend, gamma, level):
                    gamma = random_element(rng, backend, 10)
            if backend.coset_id(backend.multiply(g, gamma), level, kind) != backend.coset_id(g, level, kind):
                failures.append(f"right invariance {backend.name}")
                break

    compared = 0
    for gens, degree in _corpus_groups():
        try:
            elems = closure(gens, degree, limit=5040)
        except TooLarge:
            continue
        if PermGroupBSGS.build(gens, degree).order != len(elems):
            failures.append(f"bsgs order degree={degree}")
        compared += 1
    report(6, "property suite", not failures and compared > 100,
           f"{compared} corpus groups compared" + (f"; failures: {failures}" if failures else ""))


def test_criterion_7_self_replication(report):
    odo = self_replicating_probe(odometer(), 4, 8)
    grig = self_replicating_probe(grigorchuk(), 10, 8)
    toy = self_replicating_probe(flip_toy(), 10, 8)
    ok = odo.passed and grig.passed and not toy.passed
    report(7, "self-replication: odometer and Grigorchuk pass, flip toy fails", ok,
           f"odometer={odo.certificates} grigorchuk={grig.certificates} toy passed={toy.passed}")
