"""Maximal commuting sets, ideals, stabilizers, and the closed forms."""

import random

import pytest

from chevlie.rootsys import Root, build_root_system
from chevlie.commuting import (
    appendix_oracle,
    catalog_to_json,
    commuting_set,
    enumerate_max_commuting,
    is_ideal,
    maximum_cliques,
    partial_weyl_orbits,
    weyl_stabilizer_generators,
)

TABLE2 = {
    ("A", 4): (6, 2), ("A", 5): (9, 1), ("B", 2): (3, 1), ("B", 3): (5, 1),
    ("B", 4): (7, 8), ("B", 5): (11, 9), ("B", 6): (16, 11), ("C", 3): (6, 1),
    ("C", 4): (10, 1), ("D", 4): (6, 3), ("D", 5): (10, 2), ("D", 6): (15, 2),
    ("E", 6): (16, 2), ("E", 7): (27, 1), ("F", 4): (9, 28), ("G", 2): (3, 5),
}


@pytest.mark.parametrize("key", sorted(TABLE2))
def test_table2_counts(key):
    cat = enumerate_max_commuting(build_root_system(*key))
    assert (cat.m, cat.count) == TABLE2[key]


def test_maximum_cliques_on_small_graphs():
    # 5-cycle: maximum cliques are the 5 edges
    adj = [0] * 5
    for i in range(5):
        for j in (i - 1, i + 1):
            adj[i] |= 1 << (j % 5)
    size, cliques = maximum_cliques(adj, 5)
    assert size == 2 and len(cliques) == 5
    # complete graph
    adj = [((1 << 4) - 1) & ~(1 << i) for i in range(4)]
    size, cliques = maximum_cliques(adj, 4)
    assert size == 4 and cliques == [15]


def test_catalog_sets_are_maximal_and_commuting():
    for t, n in [("B", 4), ("G", 2), ("F", 4), ("A", 5)]:
        sys_ = build_root_system(t, n)
        cat = enumerate_max_commuting(sys_)
        for s in cat.sets:
            members = s.members()
            for i, a in enumerate(members):
                for b in members[i + 1 :]:
                    assert sys_.commute(a, b)
            others = [r for r in sys_.positive_roots if r not in s]
            for r in others:
                assert not all(sys_.commute(r, b) for b in members)


def test_is_ideal():
    g2 = build_root_system("G", 2)
    cat = enumerate_max_commuting(g2)
    named = {
        tuple(sorted(r.coeffs for r in s.members())): s for s in cat.sets
    }
    C5 = named[((2, 1), (3, 1), (3, 2))]
    assert is_ideal(C5)
    for key, s in named.items():
        if s is not C5:
            assert not is_ideal(s)
    # phi<i> is always an ideal
    for t, n in [("A", 4), ("B", 4), ("C", 3), ("D", 4), ("E", 6), ("F", 4)]:
        sys_ = build_root_system(t, n)
        for i in range(1, n + 1):
            assert is_ideal(commuting_set(sys_, sys_.phi_rad(i)))
    # B5: S_1 is an ideal
    b5 = build_root_system("B", 5)
    cat5 = enumerate_max_commuting(b5)
    assert sum(cat5.ideals) == 1


def test_g2_p3_sets():
    g2 = build_root_system("G", 2)
    cat = enumerate_max_commuting(g2, p=3)
    assert cat.m == 4 and cat.count == 3
    got = {tuple(sorted(r.coeffs for r in s.members())) for s in cat.sets}
    assert got == {
        ((1, 1), (2, 1), (3, 1), (3, 2)),
        ((1, 0), (2, 1), (3, 1), (3, 2)),
        ((0, 1), (1, 1), (2, 1), (3, 2)),
    }
    assert len(cat.orbit_components) == 1  # mutually connected


def test_partial_weyl_orbits_g2():
    cat = enumerate_max_commuting(build_root_system("G", 2))
    comps = cat.orbit_components
    assert len(comps) == 2
    sizes = sorted(len(c) for c in comps)
    assert sizes == [2, 3]
    with_ideal = [any(cat.ideals[k] for k in c) for c in comps]
    assert sum(with_ideal) == 1
    two = next(c for c in comps if len(c) == 2)
    assert any(cat.ideals[k] for k in two)


def test_partial_weyl_orbits_structure():
    # every component of B_n, E8(via golden test), F4 contains exactly one ideal
    for t, n in [("B", 4), ("B", 5), ("F", 4)]:
        cat = enumerate_max_commuting(build_root_system(t, n))
        for comp in cat.orbit_components:
            assert sum(1 for k in comp if cat.ideals[k]) == 1
    # A_{2n}: the two blocks lie in distinct components
    for n in (2, 4):
        cat = enumerate_max_commuting(build_root_system("A", n))
        assert len(cat.orbit_components) == 2
    # D4 triality: the three blocks in distinct components, permuted by the
    # diagram automorphism relabeling 1 -> 3 -> 4 -> 1
    d4 = build_root_system("D", 4)
    cat = enumerate_max_commuting(d4)
    assert len(cat.orbit_components) == 3
    perm = {1: 3, 3: 4, 4: 1, 2: 2}
    masks = {s.mask for s in cat.sets}
    for s in cat.sets:
        relabeled = commuting_set(
            d4,
            [
                Root(tuple(r.coeffs[perm[j + 1] - 1] for j in range(4)))
                for r in s.members()
            ],
        )
        assert relabeled.mask in masks


def test_weyl_stabilizers_table3():
    # phi<i> rows: generators are the complementary simple reflections
    for t, n in [("A", 4), ("B", 3), ("C", 3), ("D", 4)]:
        sys_ = build_root_system(t, n)
        for i in range(1, n + 1):
            gens, rep = weyl_stabilizer_generators(commuting_set(sys_, sys_.phi_rad(i)))
            assert gens == set(range(1, n + 1)) - {i}
            assert rep["non_generators_move_R"]
            if rep["exhaustive"]:
                assert rep["stabilizer_equals_parabolic"]
    # B_n: S_1 has generators Delta minus {alpha_1, alpha_n}
    for n in (4, 5):
        cat = enumerate_max_commuting(build_root_system("B", n))
        s1 = [s for s, f in zip(cat.sets, cat.ideals) if f and s.mask != commuting_set(cat.system, cat.system.phi_rad(1)).mask]
        gens, rep = weyl_stabilizer_generators(s1[0])
        assert gens == set(range(2, n))
    # exceptional rows
    for t, n, expected in [("E", 8, {1, 3, 4, 5, 6, 7, 8}), ("F", 4, {1, 3}), ("G", 2, {2})]:
        cat = enumerate_max_commuting(build_root_system(t, n))
        ideal = next(s for s, f in zip(cat.sets, cat.ideals) if f)
        gens, rep = weyl_stabilizer_generators(ideal)
        assert gens == expected
        if rep["exhaustive"]:
            assert rep["stabilizer_equals_parabolic"]


def test_exhaustive_stabilizers_small_groups():
    for t, n in [("G", 2), ("F", 4), ("B", 4), ("D", 4)]:
        cat = enumerate_max_commuting(build_root_system(t, n))
        for s, f in zip(cat.sets, cat.ideals):
            if f:
                _, rep = weyl_stabilizer_generators(s)
                assert rep["exhaustive"]
                assert rep["stabilizer_equals_parabolic"]


APPENDIX_CASES = (
    [("A", n) for n in range(1, 7)]
    + [("C", n) for n in range(3, 6)]
    + [("B", 5), ("B", 6), ("F", 4), ("G", 2)]
)


@pytest.mark.parametrize("t,n", APPENDIX_CASES)
def test_appendix_oracle_equivalence(t, n):
    cat = enumerate_max_commuting(build_root_system(t, n))
    orc = appendix_oracle(t, n)
    assert [s.mask for s in cat.sets] == [s.mask for s in orc.sets]


def test_appendix_oracle_f4_case_counts():
    orc = appendix_oracle("F", 4)
    assert orc.count == 28 and orc.m == 9


def test_appendix_oracle_rejects_unsupported():
    with pytest.raises(ValueError):
        appendix_oracle("B", 4)
    with pytest.raises(ValueError):
        appendix_oracle("D", 5)
    with pytest.raises(ValueError):
        appendix_oracle("E", 6)


def test_catalog_json():
    cat = enumerate_max_commuting(build_root_system("G", 2))
    data = catalog_to_json(cat)
    assert data["m"] == 3 and data["count"] == 5
    assert len(data["sets"]) == 5
    ideals = [s for s in data["sets"] if s["ideal"]]
    assert len(ideals) == 1
    assert ideals[0]["stabilizer_generators"] == [2]
    assert {s["orbit"] for s in data["sets"]} == {0, 1}


def test_cominuscule_blocks_present():
    # types with cominuscule blocks: the sets phi<i> from the table appear
    for t, n, idx in [("A", 5, [3]), ("C", 3, [3]), ("D", 5, [4, 5]), ("E", 6, [1, 6]), ("E", 7, [7])]:
        sys_ = build_root_system(t, n)
        cat = enumerate_max_commuting(sys_)
        masks = {s.mask for s in cat.sets}
        for i in idx:
            assert commuting_set(sys_, sys_.phi_rad(i)).mask in masks
