"""Acceptance criteria 1-6, each with its runtime limit.

Every test records one PASS/FAIL line; the lines are repeated in the pytest
terminal summary.  Criterion 6 runs the property suite in a subprocess.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from conftest import FIXTURES, L23, O1, O2, origami, record
from veechkit.affine import enumerate_group, membership, word_matrix
from veechkit.cli import main
from veechkit.exact import HORIZONTAL, Direction, Mat2, Scalar, parse_matrix
from veechkit.geometry import realize, redecompose
from veechkit.invariants import projective, vertex_classes
from veechkit.io import load_document
from veechkit.iso import find_isomorphism, resolve_marks
from veechkit.pdecomp import PDecomposition

T = Mat2(1, 1, 0, 1)
S = Mat2(0, -1, 1, 0)
W = Scalar(0, 1, 2)
OT = origami([[1, 2, 3, 4], [5], [6]], [[1, -2, 3, 5, 6, -4]])


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_1_exm1_type(capsys):
    with Clock() as c:
        code = main(["--json", "info", str(FIXTURES / "exm1.json")])
        rep = json.loads(capsys.readouterr().out)
    ok = (code == 0 and (rep["genus"], rep["punctures"]) == (1, 6)
          and sorted(rep["orders"]) == [-1, -1, -1, 0, 0, 3] and sum(rep["orders"]) == 0
          and c.seconds < 1)
    record(1, ok, f"type ({rep['genus']},{rep['punctures']}), orders {sorted(rep['orders'])}, "
                  f"{c.seconds:.2f}s (limit 1s)")
    assert ok


def test_criterion_2_exm1_membership():
    P = load_document(FIXTURES / "exm1.json")
    with Clock() as c:
        vt = membership(P, T)
        vt2 = membership(P, T * T)
        R = redecompose(realize(P), HORIZONTAL, Direction(1, 1))
        matches = find_isomorphism(R.origami, OT) is not None
    ok = vt.status == "NotMember" and vt2.is_member and matches and c.seconds < 10
    record(2, ok, f"T {vt.status} ({vt.reason}), T^2 {vt2.status}, O_T reproduced: {matches}, "
                  f"{c.seconds:.2f}s (limit 10s)")
    assert ok


def _table_reached(P, A, table):
    from veechkit.affine import act

    Q = act(A, P)
    R = redecompose(realize(P), *Q.theta)
    target = resolve_marks(O2, dict(zip("abcd", table)))
    return find_isomorphism(R.origami, O2, R.marks, target) is not None


def test_criterion_3_pillowcase():
    P = load_document(FIXTURES / "pillowcase.json")
    assert P.origami == O2
    with Clock() as c:
        unmarked = [membership(P, A).is_member for A in (T, S)]
        marked = [membership(P, A, marked=True).status for A in (T, S, T * T)]
        tables = [_table_reached(P, T, ([-1], [-2], [2], [1])),
                  _table_reached(P, S, ([-1], [2], [1], [-2]))]
    ok = (all(unmarked) and marked == ["NotMember", "NotMember", "Member"] and all(tables)
          and c.seconds < 5)
    record(3, ok, f"unmarked T,S member: {unmarked}; marked T,S,T^2: {marked}; "
                  f"vertex tables T,S: {tables}; {c.seconds:.2f}s (limit 5s)")
    assert ok


L23_INDEX = 9


def test_criterion_4_l23_group():
    P = load_document(FIXTURES / "l23.json")
    assert find_isomorphism(P.origami, L23) is not None
    with Clock() as c:
        G = enumerate_group(P)
        reps = [membership(P, word_matrix(w)).is_member for w in G.words]
        gens = [membership(P, word_matrix(w)).is_member for w in G.generators]
    # the identity coset is the only representative inside the group
    agree = reps == [True] + [False] * (len(reps) - 1) and all(gens)
    ok = G.complete and 1 < G.index == L23_INDEX and agree and c.seconds < 120
    record(4, ok, f"index {G.index} (pinned {L23_INDEX}), {len(G.generators)} generators, "
                  f"oracle agreement {'100%' if agree else 'FAILED'}, {c.seconds:.1f}s (limit 120s)")
    assert ok


OCTAGON_MATRICES = {
    "T8": "1,1+w;0,1",
    "R8": "1/2*w,-1/2*w;1/2*w,1/2*w",
}


def _octagon():
    P = load_document(FIXTURES / "octagon.json")
    with Clock() as c:
        moduli = projective(P.origami.moduli)
        expected = projective([1, 1, 1, W, W, W / 2, W / 2])
        same = sorted(moduli) == sorted(expected)
        verdicts = {name: membership(P, parse_matrix(m, 2), budget=100000)
                    for name, m in OCTAGON_MATRICES.items()}
        doubled = membership(P, parse_matrix("1,2+2*w;0,1", 2), budget=100000)
    return same, verdicts, doubled, c.seconds


@pytest.fixture(scope="module")
def octagon():
    return _octagon()


def test_criterion_5_octagon_moduli_and_rotation(octagon):
    same, verdicts, doubled, _ = octagon
    assert same
    assert verdicts["R8"].is_member
    assert all(v.status != "Unknown" for v in verdicts.values())
    # the classical parabolic generator 2 cot(pi/8) is in the group
    assert doubled.is_member


@pytest.mark.xfail(strict=True, reason="[[1, 1+sqrt2],[0,1]] is not in the Veech group of the "
                                       "octagon fixture; [[1, 2+2 sqrt2],[0,1]] is (see README)")
def test_criterion_5_octagon(octagon):
    same, verdicts, doubled, seconds = octagon
    ok = (same and verdicts["T8"].is_member and verdicts["R8"].is_member and seconds < 120)
    record(5, ok, f"moduli match: {same}; T8 {verdicts['T8'].status} ({verdicts['T8'].reason}); "
                  f"R8 {verdicts['R8'].status}; [[1,2+2w],[0,1]] {doubled.status}; "
                  f"{seconds:.1f}s (limit 120s)")
    assert ok


PROPERTY_TESTS = [
    "test_k_chain_rule_and_inverse",
    "test_consistency_matches_schreier_generators",
    "test_vertex_classes_and_gauss_bonnet",
    "test_round_trip",
    "test_canonical_form_iff_isomorphic",
    "test_identity_member",
    "test_prefilter_sound",
    "test_word_walk_matches_direct",
]


def test_criterion_6_property_suites():
    here = Path(__file__).parent
    args = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
            str(here / "test_properties.py"), "-k", " or ".join(PROPERTY_TESTS)]
    with Clock() as c:
        proc = subprocess.run(args, capture_output=True, text=True, cwd=here.parent)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = proc.returncode == 0 and c.seconds < 300
    record(6, ok, f"{tail}; {c.seconds:.1f}s (limit 300s)")
    assert ok, proc.stdout[-3000:]
