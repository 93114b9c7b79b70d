"""Random valid extended origamis.

``x`` is built sign preserving from a permutation of the cells.  The
vertical gluings come from a random perfect matching of the 2N horizontal
edges: top-to-bottom is a translation, top-to-top or bottom-to-bottom a
half-turn.  Consistent moduli come from a height per x-cylinder and a width
per y-cylinder.  Optionally every cell is re-signed at random afterwards.
"""

from fractions import Fraction

from hypothesis import assume, strategies as st

from veechkit.origami import ExtendedOrigami, flip_cells


def _components(n, pairs):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for a, b in pairs:
        parent[find(a)] = find(b)
    groups = {}
    for lam in range(n):
        groups.setdefault(find(lam), []).append(lam)
    return list(groups.values())


def build(n, pi, matching):
    """``matching`` pairs half-edges ``("T"|"B", cell)``."""
    x = [0] * (2 * n)
    for lam in range(n):
        x[2 * lam] = 2 * pi[lam]
        x[2 * pi[lam] + 1] = 2 * lam + 1
    y = [None] * (2 * n)
    for e, f in matching:
        for (s, lam), (t, mu) in ((e, f), (f, e)):
            if s == "T":
                y[2 * lam] = 2 * mu if t == "B" else 2 * mu + 1
            else:
                y[2 * lam + 1] = 2 * mu + 1 if t == "T" else 2 * mu
    return x, y


@st.composite
def origamis(draw, max_n=6, unit=False, signed=True, abelian=False):
    n = draw(st.integers(1, max_n))
    pi = draw(st.permutations(range(n)))
    if abelian:
        sigma = draw(st.permutations(range(n)))
        matching = [(("T", lam), ("B", sigma[lam])) for lam in range(n)]
    else:
        edges = [(s, lam) for lam in range(n) for s in "TB"]
        order = draw(st.permutations(edges))
        matching = list(zip(order[::2], order[1::2]))
    x, y = build(n, pi, matching)
    pairs = [(i >> 1, p[i] >> 1) for p in (x, y) for i in range(2 * n)]
    assume(len(_components(n, pairs)) == 1)
    if unit:
        moduli = [1] * n
    else:
        xcyl = _components(n, [(lam, x[2 * lam] >> 1) for lam in range(n)])
        ycyl = _components(n, [(i >> 1, y[i] >> 1) for i in range(2 * n)])
        small = st.integers(1, 3).map(Fraction)
        height = {lam: h for c, h in zip(xcyl, draw(st.lists(small, min_size=len(xcyl), max_size=len(xcyl))))
                  for lam in c}
        width = {lam: w for c, w in zip(ycyl, draw(st.lists(small, min_size=len(ycyl), max_size=len(ycyl))))
                 for lam in c}
        moduli = [height[lam] / width[lam] for lam in range(n)]
    O = ExtendedOrigami(n, tuple(x), tuple(y), tuple(moduli))
    if signed:
        flips = draw(st.lists(st.sampled_from((1, -1)), min_size=n, max_size=n))
        O = flip_cells(O, flips)
    return O
