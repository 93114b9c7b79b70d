import pytest

from conftest import FIXTURES, L23, O1, O2, TORUS, origami
from veechkit.exact import HORIZONTAL, VERTICAL, Direction, Scalar
from veechkit.geometry import (
    BudgetExceeded, NotJenkinsStrebel, is_jenkins_strebel, realize, redecompose, redecompose_full,
    trace_direction,
)
from veechkit.invariants import surface_type, vertex_classes
from veechkit.io import load_document
from veechkit.iso import find_isomorphism, resolve_marks
from veechkit.pdecomp import PDecomposition

W = Scalar(0, 1, 2)
OT = origami([[1, 2, 3, 4], [5], [6]], [[1, -2, 3, 5, 6, -4]])
DIAG = Direction(1, 1)


def _shoelace(points):
    total = Scalar(0)
    for (x0, y0), (x1, y1) in zip(points, points[1:] + points[:1]):
        total = total + x0 * y1 - x1 * y0
    return total / 2


def test_realize_areas():
    assert realize(PDecomposition.standard(TORUS)).area() == 1
    C = realize(PDecomposition.standard(O1))
    assert C.area() == 6
    assert all(C.cell_area(lam) == 1 for lam in range(6))


def test_octagon_area():
    P = load_document(FIXTURES / "octagon.json")
    C = realize(P)
    # the central cell is a unit square, so the octagon has side 1
    h, r = Scalar(1, 0) / 2, Scalar(1, 0) / 2 + W / 2
    octagon = [(h, -r), (r, -h), (r, h), (h, r), (-h, r), (-r, h), (-r, -h), (-h, -r)]
    assert C.area() == _shoelace(octagon) == 2 + 2 * W


def test_trace_torus_horizontal():
    C = realize(PDecomposition.standard(TORUS))
    tr = trace_direction(C, HORIZONTAL)
    assert tr.saddle_connections
    assert all(sc.length() == 1 for sc in tr.saddle_connections)


def test_trace_rational_directions_terminate():
    C = realize(PDecomposition.standard(O1))
    for theta in (DIAG, Direction(1, 2), Direction(3, -1)):
        assert is_jenkins_strebel(C, theta, 10000) is True


def test_irrational_direction_on_torus():
    C = realize(PDecomposition.standard(TORUS))
    with pytest.raises(NotJenkinsStrebel):
        trace_direction(C, Direction(1, W))
    assert is_jenkins_strebel(C, Direction(1, W)) is False


def test_budget():
    C = realize(PDecomposition.standard(O1))
    with pytest.raises(BudgetExceeded):
        trace_direction(C, Direction(2, 5), budget=3)
    assert is_jenkins_strebel(C, Direction(2, 5), budget=3) is None
    with pytest.raises(ValueError):
        trace_direction(C, HORIZONTAL, budget=0)


@pytest.mark.parametrize("O", [TORUS, O1, O2, L23], ids=["torus", "exm1", "pillow", "L23"])
def test_round_trip(O):
    P = PDecomposition.standard(O)
    R = redecompose(realize(P), HORIZONTAL, VERTICAL)
    assert find_isomorphism(R.origami, O) is not None
    assert R.k2 == P.k2


def test_redecompose_diagonal_gives_printed_ot():
    C = realize(PDecomposition.standard(O1))
    R = redecompose(C, HORIZONTAL, DIAG)
    assert find_isomorphism(R.origami, OT) is not None
    assert find_isomorphism(R.origami, O1) is None
    assert R.k2 == 2


def test_pillowcase_s_vertex_table():
    marks = resolve_marks(O2, {"a": [-1], "b": [-2], "c": [1], "d": [2]})
    C = realize(PDecomposition.standard(O2, marks=marks))
    R = redecompose(C, VERTICAL, HORIZONTAL)
    table = resolve_marks(O2, {"a": [-1], "b": [2], "c": [1], "d": [-2]})
    assert find_isomorphism(R.origami, O2, R.marks, table) is not None


def test_cone_points_direction_independent():
    C = realize(PDecomposition.standard(O1))
    before = sorted(v.order for v in vertex_classes(O1))
    for theta in ((HORIZONTAL, DIAG), (Direction(1, 2), VERTICAL), (DIAG, Direction(1, -1))):
        R = redecompose(C, *theta)
        punctured = [v for v in vertex_classes(R.origami) if v.elements not in R.regular]
        assert sorted(v.order for v in punctured) == before
        assert all(v.order == 0 for v in vertex_classes(R.origami) if v.elements in R.regular)
        assert surface_type(R.origami).genus == 1


def test_area_conserved():
    P = load_document(FIXTURES / "octagon.json")
    C = realize(P)
    R = redecompose(C, DIAG, Direction(1, -1))
    full = redecompose_full(C, DIAG, Direction(1, -1))
    assert full.pdec.origami == R.origami
    assert full.area == C.area()
    C1 = realize(PDecomposition.standard(O1))
    assert redecompose_full(C1, Direction(1, 2), Direction(-1, 1)).area == 6
    assert surface_type(R.origami).genus == surface_type(P.origami).genus
