from fractions import Fraction

import pytest

from conftest import L23, O1, O2, TORUS, origami
from veechkit.exact import Scalar
from veechkit.iso import find_isomorphism
from veechkit.origami import (
    InconsistentOrigami, cell_orbit, elem, flip_cells, from_int, is_abelian, is_consistent,
    is_sign_normal, k_cocycle, monodromy_eval, neg, normalize_signs, reduce_word,
    solve_heights, stabilizer, to_int, validate,
)


def test_signed_cells():
    assert to_int(from_int(-3)) == -3
    assert neg(elem(2)) == elem(2, -1)
    assert neg(neg(5)) == 5


def test_validate_examples():
    assert validate(O1).ok
    assert validate(O2).ok
    bad = origami([[1, 2]], [[1, -1], [2]])
    report = validate(bad)
    assert not report.checks["non_branching"][0]
    assert report.checks["non_branching"][1].startswith("y(1)")


def test_validate_connectivity_and_equivariance():
    disjoint = origami([[1], [2]], [[1], [2]])
    assert "connectivity" in validate(disjoint).failures()
    from veechkit.origami import ExtendedOrigami
    broken = ExtendedOrigami(2, (2, 1, 0, 3), (0, 1, 2, 3))
    assert "equivariance" in validate(broken).failures()


def test_monodromy_examples():
    assert monodromy_eval(O1, "", from_int(3)) == from_int(3)
    assert monodromy_eval(O1, "x", from_int(1)) == from_int(2)
    assert monodromy_eval(O2, "y", from_int(1)) == from_int(-2)
    # letters act left to right
    s = from_int(1)
    assert monodromy_eval(O1, "xy", s) == O1.y[O1.x[s]]


def test_k_cocycle_examples():
    assert k_cocycle(O1, 0, "") == 1
    assert all(k_cocycle(O1, s, "xyXyy") == 1 for s in range(12))
    Op = origami([[1, 2]], [[1], [2]], [1, 2])
    assert k_cocycle(Op, from_int(1), "x") == Scalar(Fraction(1, 2))


def test_consistency_two_cells():
    # one x-cylinder, two y-cylinders: heights solve
    Op = origami([[1, 2]], [[1], [2]], [1, 2])
    sol = solve_heights(Op)
    assert sol.heights[0] == sol.heights[1]
    assert sol.heights[1] / sol.widths[1] == 2
    # one cylinder in each direction: the cells must be congruent
    Oq = origami([[1, 2]], [[1, 2]], [1, 2])
    assert not is_consistent(Oq)
    with pytest.raises(InconsistentOrigami) as info:
        solve_heights(Oq)
    w = info.value.witness
    assert monodromy_eval(Oq, w, 0) == 0
    assert k_cocycle(Oq, 0, w) == info.value.product != 1
    assert "consistency" in validate(Oq).failures()


def test_unit_moduli_give_unit_areas():
    sol = solve_heights(O1)
    assert set(sol.areas) == {Scalar(1)}
    assert validate(O2).checks["consistency"][0]


def test_normalize_signs():
    assert normalize_signs(O1) == O1
    flipped = origami([[1, 2, 3, 4], [5], [6]], [[1, 5, 6, -4], [2, -3]])
    assert is_sign_normal(flipped)
    assert find_isomorphism(normalize_signs(flipped), O1) is not None
    everything = flip_cells(O1, [-1] * 6)
    assert find_isomorphism(everything, O1) is not None
    scrambled = flip_cells(O1, [1, -1, 1, -1, -1, 1])
    assert not is_sign_normal(scrambled)
    out = normalize_signs(scrambled)
    assert is_sign_normal(out)
    assert normalize_signs(out) == out
    assert find_isomorphism(out, O1) is not None


def test_stabilizer():
    t = stabilizer(TORUS, 0, projected=True)
    assert t.index == 1 and sorted(t.generators) == ["x", "y"]
    s = stabilizer(O2, from_int(1))
    assert sorted(to_int(i) for i in s.orbit) == [-2, -1, 1, 2]
    assert len(s.generators) == 5
    for g in s.generators:
        assert g == reduce_word(g)
        assert monodromy_eval(O2, g, s.base) == s.base
    for p, w in s.transversal.items():
        assert monodromy_eval(O2, w, s.base) == p
    assert cell_orbit(O1, 0) == set(range(6))
    assert stabilizer(L23, 0, projected=True).index == 4


def test_is_abelian():
    assert is_abelian(TORUS)
    assert not is_abelian(O2)
    assert is_abelian(L23)
    assert not is_abelian(O1)
