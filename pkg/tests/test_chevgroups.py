"""Class and spectrum reports for the finite Chevalley groups."""

import pytest

from chevlie.chevgroups import (
    class_report,
    g2_class_count_witness,
    g2_witness_normalizer_dims,
    spectrum_report,
)
from chevlie.commuting import enumerate_max_commuting
from chevlie.rootsys import build_root_system

TABLE4 = {
    # (type, rank): (class_count, order exponent)
    ("A", 2): (3, 2),
    ("A", 3): (1, 4),
    ("A", 4): (2, 6),
    ("A", 5): (1, 9),
    ("A", 6): (2, 12),
    ("B", 2): (1, 3),
    ("B", 3): (1, 5),
    ("B", 4): (2, 7),
    ("B", 5): (1, 11),
    ("B", 6): (1, 16),
    ("C", 2): (1, 3),
    ("C", 3): (1, 6),
    ("C", 4): (1, 10),
    ("D", 4): (3, 6),
    ("D", 5): (2, 10),
    ("D", 6): (2, 15),
    ("E", 6): (2, 16),
    ("E", 7): (1, 27),
    ("E", 8): (1, 36),
    ("F", 4): (1, 9),
    ("G", 2): (">=3", 3),
}


@pytest.mark.parametrize("key", sorted(TABLE4))
def test_class_reports(key):
    t, n = key
    count, exponent = TABLE4[key]
    rep = class_report(t, n, 7 if t == "E" else 5)
    assert rep.class_count == count
    assert rep.order_exponent == exponent
    if isinstance(count, int) and (t, n) != ("A", 2):
        assert len(rep.representatives) == count


def test_class_count_is_computed_not_tabulated():
    # non-exceptional rows: count equals the ideal-bearing component count
    for t, n in [("A", 4), ("B", 4), ("B", 5), ("D", 4), ("E", 6), ("F", 4)]:
        cat = enumerate_max_commuting(build_root_system(t, n))
        ideal_comps = sum(
            1 for comp in cat.orbit_components if any(cat.ideals[k] for k in comp)
        )
        assert class_report(t, n, 5).class_count == ideal_comps
        assert class_report(t, n, 5).order_exponent == cat.m


def test_bad_prime_rejected():
    with pytest.raises(ValueError, match="bad"):
        class_report("G", 2, 3)
    with pytest.raises(ValueError, match="bad"):
        class_report("B", 4, 2)
    with pytest.raises(ValueError, match="bad"):
        spectrum_report("E", 8, 5)


@pytest.mark.parametrize("key", sorted(TABLE4))
def test_spectrum_reports(key):
    t, n = key
    count, exponent = TABLE4[key]
    for r in (1, 2):
        rep = spectrum_report(t, n, 7, r) if t in "E" else spectrum_report(t, n, 5, r)
        assert rep.component_count == count
        assert rep.dimension_exponent == r * exponent - 1
        assert rep.rank_exponent == r * exponent
        assert rep.dimension_expression() == f"p^{r * exponent - 1}"


def test_spectrum_matches_class_counts():
    for t, n in sorted(TABLE4):
        p = 7 if t == "E" else 5
        assert spectrum_report(t, n, p).component_count == class_report(t, n, p).class_count


def test_witness_rejects_unsupported():
    with pytest.raises(ValueError):
        g2_class_count_witness(3, 1)
    with pytest.raises(ValueError):
        g2_class_count_witness(5, 3)


def test_witness_f5():
    # the honest count over F5 is four: the L-stabilizer is disconnected and
    # the quadratic character splits its orbit (see the decisions ledger)
    assert g2_class_count_witness(5, 1) == 4
    assert g2_witness_normalizer_dims(5, 1) == [6, 6, 7, 9]
