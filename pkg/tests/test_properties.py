import itertools
import random

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import L23, O2, TORUS
from strategies import origamis
from veechkit.affine import enumerate_group, membership, prefilter, sl2z_word
from veechkit.exact import HORIZONTAL, VERTICAL, Mat2
from veechkit.geometry import realize, redecompose_full
from veechkit.invariants import euler_genus, partner_element, vertex_classes
from veechkit.iso import (
    canonical_form, find_isomorphism, isomorphisms, verify_isomorphism,
)
from veechkit.origami import (
    ExtendedOrigami, invert_word, is_consistent, is_sign_normal, k_cocycle,
    monodromy_eval, neg, normalize_signs, reduce_word, relabel, stabilizer,
)
from veechkit.pdecomp import PDecomposition

CASES = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
words = st.text("xyXY", max_size=8).map(reduce_word)


@CASES
@given(origamis(), words, words, st.data())
def test_k_chain_rule_and_inverse(O, w1, w2, data):
    s = data.draw(st.integers(0, 2 * O.n - 1))
    mid = monodromy_eval(O, w1, s)
    assert k_cocycle(O, s, w1 + w2) == k_cocycle(O, s, w1) * k_cocycle(O, mid, w2)
    assert k_cocycle(O, s, w1) * k_cocycle(O, mid, invert_word(w1)) == 1


@CASES
@given(origamis(max_n=5, unit=True), st.data())
def test_consistency_matches_schreier_generators(O, data):
    moduli = data.draw(st.lists(st.integers(1, 3), min_size=O.n, max_size=O.n))
    O = O.with_moduli(moduli)
    base = data.draw(st.integers(0, 2 * O.n - 1))
    S = stabilizer(O, base)
    assert all(monodromy_eval(O, g, base) == base for g in S.generators)
    assert len(S.generators) == S.index + 1
    by_generators = all(k_cocycle(O, base, g) == 1 for g in S.generators)
    assert is_consistent(O) == by_generators


@CASES
@given(origamis())
def test_equivariance(O):
    for i in range(2 * O.n):
        assert neg(O.x[neg(i)]) == O.xinv[i]
        assert neg(O.y[neg(i)]) == O.yinv[i]
        assert O.y[i] != neg(i)


@CASES
@given(origamis())
def test_normalize_signs(O):
    N = normalize_signs(O)
    assert is_sign_normal(N)
    assert normalize_signs(N) == N
    iso = find_isomorphism(O, N)
    assert iso is not None and verify_isomorphism(O, N, iso)


@CASES
@given(origamis())
def test_vertex_classes_and_gauss_bonnet(O):
    classes = vertex_classes(O)
    N = normalize_signs(O)
    assert sorted(i for v in vertex_classes(N) for i in v.elements) == list(range(2 * O.n))
    for v in vertex_classes(N):
        assert {partner_element(N, i) for i in v.elements} == set(v.elements)
    assert sum(v.order for v in classes) == 4 * euler_genus(O) - 4


@CASES
@given(origamis())
def test_round_trip(O):
    P = PDecomposition.standard(O)
    C = realize(P)
    full = redecompose_full(C, HORIZONTAL, VERTICAL)
    R = full.pdec
    iso = find_isomorphism(R.origami, O)
    assert iso is not None
    assert R.cell_moduli_sq()[0] == P.cell_moduli_sq()[iso.sigma[0] >> 1]
    assert full.area == C.area()


def _random_relabel(O, rng):
    cells = list(range(O.n))
    rng.shuffle(cells)
    sigma = [0] * (2 * O.n)
    for lam, mu in enumerate(cells):
        s = rng.randrange(2)
        sigma[2 * lam], sigma[2 * lam + 1] = 2 * mu + s, 2 * mu + 1 - s
    return relabel(O, sigma)


@CASES
@given(origamis(max_n=3, unit=True), origamis(max_n=3, unit=True), st.randoms())
def test_canonical_form_iff_isomorphic(A, B, rng):
    assert canonical_form(A) == canonical_form(_random_relabel(A, rng))
    same = canonical_form(A) == canonical_form(B)
    assert same == (find_isomorphism(A, B) is not None)
    for iso in isomorphisms(A, B):
        assert verify_isomorphism(A, B, iso)
        back = find_isomorphism(B, A)
        assert back is not None and verify_isomorphism(B, A, back)


@CASES
@given(origamis(max_n=4), st.data())
def test_marked_iso_implies_unmarked(O, data):
    O = normalize_signs(O)
    classes = vertex_classes(O)
    picks = data.draw(st.lists(st.sampled_from(classes), min_size=1, max_size=3))
    marks = {str(k): frozenset([v.elements]) for k, v in enumerate(picks)}
    rng = random.Random(data.draw(st.integers(0, 1000)))
    for iso in isomorphisms(O, O, marks, marks):
        assert verify_isomorphism(O, O, iso)
        assert verify_isomorphism(O, O, iso, marks, marks)
    assert find_isomorphism(O, O, marks, marks) is not None
    assert find_isomorphism(O, _random_relabel(O, rng)) is not None


@CASES
@given(origamis(max_n=4))
def test_identity_member(O):
    assert membership(PDecomposition.standard(O), Mat2.identity()).is_member


entries = st.integers(-2, 2)


@CASES
@given(origamis(max_n=3, unit=True), entries, entries, entries)
def test_prefilter_sound(O, a, b, c):
    if a == 0:
        return
    if (1 + b * c) % a:
        return
    A = Mat2(a, b, c, (1 + b * c) // a)
    P = PDecomposition.standard(O)
    verdict = membership(P, A, budget=20000)
    if verdict.is_member:
        assert prefilter(P, A).passed


def _sl2z_up_to_3():
    out = {}
    for a, b, c, d in itertools.product(range(-3, 4), repeat=4):
        if a * d - b * c == 1:
            M = Mat2(a, b, c, d)
            out.setdefault(M.psl_key(), M)
    return list(out.values())


L3 = ExtendedOrigami.from_cycles([[1, 2], [3]], [[1, 3], [2]])


@pytest.mark.parametrize("O", [TORUS, O2, L3, L23], ids=["torus", "pillow", "L3", "L23"])
def test_word_walk_matches_direct(O):
    P = PDecomposition.standard(O)
    G = enumerate_group(P)
    assert G.complete
    for A in _sl2z_up_to_3():
        assert G.contains(A) == membership(P, A).is_member, sl2z_word(A)


# ordinary origamis: brute-force orbit of the monodromy pair -----------------------


def _inv(p):
    q = [0] * len(p)
    for i, j in enumerate(p):
        q[j] = i
    return tuple(q)


def _mul(p, q):
    """Apply ``p`` first, then ``q``."""
    return tuple(q[p[i]] for i in range(len(p)))


def _canon_pair(x, y):
    n = len(x)
    best = None
    for s in itertools.permutations(range(n)):
        si = _inv(s)
        for u, v in ((x, y), (_inv(x), _inv(y))):
            key = (_mul(_mul(si, u), s), _mul(_mul(si, v), s))
            if best is None or key < best:
                best = key
    return best


def _unsigned_orbit(x, y):
    start = _canon_pair(x, y)
    seen = {start}
    todo = [start]
    while todo:
        u, v = todo.pop()
        for nxt in ((u, _mul(v, _inv(u))), (_inv(v), u)):
            key = _canon_pair(*nxt)
            if key not in seen:
                seen.add(key)
                todo.append(key)
    return len(seen)


def _abelian(x, y):
    n = len(x)
    ex = [2 * x[lam] for lam in range(n)]
    ey = [2 * y[lam] for lam in range(n)]
    X = [0] * (2 * n)
    Y = [0] * (2 * n)
    for lam in range(n):
        X[2 * lam], Y[2 * lam] = ex[lam], ey[lam]
        X[ex[lam] + 1], Y[ey[lam] + 1] = 2 * lam + 1, 2 * lam + 1
    return ExtendedOrigami(n, tuple(X), tuple(Y))


def _connected(x, y):
    seen, todo = {0}, [0]
    while todo:
        a = todo.pop()
        for b in (x[a], y[a], _inv(x)[a], _inv(y)[a]):
            if b not in seen:
                seen.add(b)
                todo.append(b)
    return len(seen) == len(x)


def _small_ordinary():
    out = {}
    for n in (1, 2, 3):
        for x in itertools.permutations(range(n)):
            for y in itertools.permutations(range(n)):
                if _connected(x, y):
                    out.setdefault(_canon_pair(x, y), (x, y))
    return list(out.values())


@pytest.mark.parametrize("pair", _small_ordinary(), ids=str)
def test_abelian_orbit_matches_brute_force(pair):
    x, y = pair
    G = enumerate_group(PDecomposition.standard(_abelian(x, y)))
    assert G.complete
    assert G.index == _unsigned_orbit(x, y)


@settings(max_examples=8, deadline=None)
@given(st.permutations(range(4)), st.permutations(range(4)))
def test_abelian_orbit_four_cells(x, y):
    x, y = tuple(x), tuple(y)
    if not _connected(x, y):
        return
    G = enumerate_group(PDecomposition.standard(_abelian(x, y)))
    assert G.index == _unsigned_orbit(x, y)
