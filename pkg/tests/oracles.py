"""Slow, independent reference computations used only by the tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import sympy

from drinfeld_spectra.graphcore import Edge, WeightedGraph
from drinfeld_spectra.polyarith import FqPoly, P1Point, ResidueRing, get_field, p1_normalize, poly_gcd


def spanning_trees(g: WeightedGraph):
    """Every spanning tree as a set of edge indices (brute force over subsets)."""
    n = g.n
    for subset in itertools.combinations(range(g.m), n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for k in subset:
            e = g.edges[k]
            a, b = find(g.index[e.origin]), find(g.index[e.terminus])
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            yield set(subset)


def discriminant_by_trees(g: WeightedGraph) -> int:
    """det of the weighted cycle Gram matrix = sum over spanning trees of prod of off-tree weights."""
    total = 0
    for T in spanning_trees(g):
        total += math.prod(e.weight for k, e in enumerate(g.edges) if k not in T)
    return total


def sympy_laplacian(g: WeightedGraph) -> sympy.Matrix:
    """Chain Laplacian built entry by entry from its definition."""
    M = sympy.zeros(g.n, g.n)
    for e in g.edges:
        o, t = g.index[e.origin], g.index[e.terminus]
        wo, wt = g.vertex_weight[e.origin], g.vertex_weight[e.terminus]
        # Delta(t) gains w(t)/w(e) (t - o); Delta(o) gains w(o)/w(e) (o - t)
        M[t, t] += sympy.Rational(wt, e.weight)
        M[o, t] -= sympy.Rational(wt, e.weight)
        M[o, o] += sympy.Rational(wo, e.weight)
        M[t, o] -= sympy.Rational(wo, e.weight)
    return M


def eigen_product_by_cofactors(g: WeightedGraph) -> Fraction:
    """Product of nonzero Laplacian eigenvalues = sum of principal (n-1)-minors."""
    M = sympy_laplacian(g)
    total = sympy.Integer(0)
    for i in range(g.n):
        keep = [k for k in range(g.n) if k != i]
        total += M.extract(keep, keep).det()
    total = sympy.Rational(total)
    return Fraction(int(total.p), int(total.q))


def random_connected_graph(rng: random.Random, max_n: int = 7, max_w: int = 4, extra: int = 5) -> WeightedGraph:
    n = rng.randint(2, max_n)
    verts = {k: rng.randint(1, max_w) for k in range(n)}
    edges = []
    for k in range(1, n):
        a = rng.randrange(k)
        edges.append((a, k) if rng.random() < 0.5 else (k, a))
    for _ in range(rng.randint(0, extra)):
        a, b = rng.sample(range(n), 2)
        edges.append((a, b))
    return WeightedGraph(verts, [Edge(k, a, b, rng.randint(1, max_w)) for k, (a, b) in enumerate(edges)])


def is_irreducible_by_division(f: FqPoly) -> bool:
    d = int(f.deg)
    if d <= 0:
        return False
    for k in range(1, d // 2 + 1):
        for c in range(f.q**k):
            g = FqPoly.from_code(f.q, f.q**k + c)
            if (f % g).is_zero():
                return False
    return True


def naive_p1(n: FqPoly) -> set[frozenset]:
    """Classes of all unimodular pairs as sets of (u, v) codes, via unit multiples."""
    ring = ResidueRing(n)
    units = ring.units()
    out = set()
    for a in range(ring.size):
        for b in range(ring.size):
            u, v = ring.decode(a), ring.decode(b)
            if poly_gcd(poly_gcd(u, v), n).deg != 0:
                continue
            out.add(frozenset((((lam * u) % n).code, ((lam * v) % n).code) for lam in units))
    return out


def group_elements(q: int, i: int, edge_group: bool = False):
    """All matrices of G_i (GL_2(F_q) for i = 0 vertex groups) as 4-tuples of FqPoly."""
    F = get_field(q)
    one = FqPoly.one(q)
    units = list(F.units())
    if i == 0 and not edge_group:
        for a, b, c, d in itertools.product(range(q), repeat=4):
            if F.sub(F.mul_table[a][d], F.mul_table[b][c]) != 0:
                yield tuple(FqPoly(q, (x,)) for x in (a, b, c, d))
        return
    for a in units:
        for d in units:
            for bc in range(q ** (i + 1)):
                yield FqPoly(q, (a,)), FqPoly.from_code(q, bc), FqPoly.zero(q), FqPoly(q, (d,))


def orbits_by_enumeration(n: FqPoly, i: int, edge_group: bool = False) -> list[frozenset]:
    """Orbits on P^1(A/n), n prime, by applying every group element to every point."""
    ring = ResidueRing(n)
    one = FqPoly.one(n.q)
    pts = {P1Point(ring.decode(c), one) for c in range(ring.size)}
    pts.add(P1Point(one, FqPoly.zero(n.q)))
    elems = list(group_elements(n.q, i, edge_group))
    seen, orbits = set(), []
    for P in sorted(pts, key=lambda P: (P.v.code, P.u.code)):
        if P in seen:
            continue
        orb = frozenset(p1_normalize(ring, a * P.u + b * P.v, c * P.u + d * P.v) for a, b, c, d in elems)
        seen |= orb
        orbits.append(orb)
    return orbits
