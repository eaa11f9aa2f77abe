"""Weighted quotient diagram of the Bruhat-Tits tree by Gamma_0(n).

Vertices of type i of the quotient are the orbits of the standard vertex
stabiliser G_i on P^1(A/n); edges of type i are orbits of G_i cap G_{i+1},
joined to the G_i-orbit and the G_{i+1}-orbit that contain them.  Weights come
from orbit sizes by orbit-stabiliser: w = |H| / ((q-1) |orbit|).

Matrices act on column vectors, (a b; c d)(u:v) = (au+bv : cu+dv).  For prime
n the points are encoded as integers, (u:1) -> code(u) and (1:0) -> q^d, and
the group generators become integer permutations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .graphcore import DisconnectedGraphError, Edge, GraphError, WeightedGraph
from .polyarith import (
    FqPoly,
    P1Point,
    ResidueRing,
    format_poly,
    is_irreducible,
    p1_enumerate,
    p1_normalize,
    p1_size,
    parse_poly,
)


class DiagramError(ValueError):
    pass


class DegreeTooSmallError(DiagramError):
    pass


class NonIntegralWeightError(ArithmeticError):
    pass


class HalfLineError(DiagramError):
    pass


class DisconnectedCoreError(DiagramError):
    pass


@dataclass(frozen=True)
class UpperGroupSpec:
    """G_0 = GL_2(F_q) for i = 0, else {(a b; 0 d) : a, d in F_q^*, deg b <= i}.

    With ``edge_group`` and i = 0 this is the Borel subgroup B = G_0 cap G_1;
    for i >= 1 the edge group G_i cap G_{i+1} is G_i itself.
    """

    i: int
    q: int

    def order(self, edge_group: bool = False) -> int:
        q = self.q
        if self.i == 0 and not edge_group:
            return (q * q - 1) * (q * q - q)
        return (q - 1) ** 2 * q ** (self.i + 1)

    def generators(self, edge_group: bool = False) -> list[tuple]:
        """Symbolic generators: ('diag_a',), ('diag_d',), ('unip', k), ('weyl',)."""
        gens = [("diag_a",), ("diag_d",)] + [("unip", k) for k in range(self.i + 1)]
        if self.i == 0 and not edge_group:
            gens.append(("weyl",))
        return gens


class ProjectiveLine:
    """P^1(A/n) with point indices and permutation actions of the generators."""

    def __init__(self, n: FqPoly, fast: bool | None = None):
        self.n = n
        self.q = n.q
        self.ring = ResidueRing(n)
        prime = is_irreducible(n)
        self.fast = prime if fast is None else fast
        if self.fast and not prime:
            raise ValueError("the integer-coded action needs an irreducible modulus")
        N = self.ring.size
        if self.fast:
            self.size = N + 1
            self.infinity = N
            self._points = None
        else:
            self._points = p1_enumerate(n)
            self.size = len(self._points)
            self._index = {P: k for k, P in enumerate(self._points)}
            one, zero = FqPoly.one(self.q), FqPoly.zero(self.q)
            self.infinity = self._index[P1Point(one, zero)]

    def __len__(self):
        return self.size

    def point(self, k: int) -> P1Point:
        if self._points is not None:
            return self._points[k]
        one = FqPoly.one(self.q)
        if k == self.infinity:
            return P1Point(one, FqPoly.zero(self.q))
        return P1Point(self.ring.decode(k), one)

    def _matrix(self, gen):
        q = self.q
        F = self.ring.field
        one, zero = FqPoly.one(q), FqPoly.zero(q)
        alpha = FqPoly(q, (F.primitive,))
        kind = gen[0]
        if kind == "diag_a":
            return alpha, zero, zero, one
        if kind == "diag_d":
            return one, zero, zero, alpha
        if kind == "unip":
            return one, FqPoly.monomial(q, gen[1]), zero, one
        if kind == "weyl":
            return zero, one, one, zero
        raise ValueError(gen)

    def permutation(self, gen) -> np.ndarray:
        """Index permutation induced by a generator."""
        if not self.fast:
            a, b, c, d = self._matrix(gen)
            out = np.empty(self.size, dtype=np.int64)
            for k, P in enumerate(self._points):
                image = p1_normalize(self.ring, a * P.u + b * P.v, c * P.u + d * P.v)
                out[k] = self._index[image]
            return out
        ring, F, N = self.ring, self.ring.field, self.ring.size
        q = self.q
        kind = gen[0]
        if kind == "diag_a":
            perm = ring.mul_map(FqPoly(q, (F.primitive,)))
        elif kind == "diag_d":
            perm = ring.mul_map(FqPoly(q, (F.inv[F.primitive],)))
        elif kind == "unip":
            perm = ring.add_map(FqPoly.monomial(q, gen[1]))
        elif kind == "weyl":
            inv = self._inverse_map
            perm = inv.copy()
            perm[0] = N
            return np.append(perm, 0)
        else:
            raise ValueError(gen)
        return np.append(perm, N)

    @cached_property
    def _inverse_map(self):
        return self.ring.inverse_map()


@dataclass
class Partition:
    labels: np.ndarray  # block index of every point
    sizes: np.ndarray
    weights: list[int]

    def __len__(self):
        return len(self.weights)

    def block(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.labels == k)


def orbit_partition(spec: UpperGroupSpec, line: ProjectiveLine, edge_group: bool = False) -> Partition:
    """Orbits of G_i (or of the edge group) on P^1, numbered by their least point."""
    N = len(line)
    src, dst = [], []
    idx = np.arange(N, dtype=np.int64)
    for gen in spec.generators(edge_group):
        src.append(idx)
        dst.append(line.permutation(gen))
    src, dst = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(src.size, dtype=np.int8), (src, dst)), shape=(N, N)).tocsr()
    _, raw = connected_components(graph, directed=True, connection="weak")
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(order.size)
    labels = relabel[raw]
    sizes = np.bincount(labels)
    H = spec.order(edge_group)
    weights = []
    for s in sizes:
        w, r = divmod(H, (spec.q - 1) * int(s))
        if r or w <= 0:
            raise NonIntegralWeightError(f"orbit of size {s} under a group of order {H}")
        weights.append(w)
    return Partition(labels, sizes, weights)


@dataclass(frozen=True)
class TypedVertex:
    id: int
    type: int
    weight: int
    is_infinity_chain: bool
    orbit: tuple = field(default=(), repr=False, compare=False)


@dataclass(frozen=True)
class TypedEdge:
    id: int
    type: int
    weight: int
    origin: int
    terminus: int
    orbit: tuple = field(default=(), repr=False, compare=False)


@dataclass(frozen=True)
class Cusp:
    """Half-line leaving the finite part: ``attach`` is where it meets the core,
    ``start`` its type d-1 vertex, ``chain`` the pruned vertices from ``start``
    inward (empty when attach == start)."""

    attach: int
    start: int
    chain: tuple = ()
    ratio: int = 0


class DrinfeldDiagram:
    """Quotient diagram truncated at type ``depth``, with its core and cusps."""

    def __init__(self, q: int, modulus: FqPoly, vertices, edges, depth: int, line=None):
        self.q = q
        self.modulus = modulus
        self.d = int(modulus.deg)
        self.depth = depth
        self.vertices: list[TypedVertex] = list(vertices)
        self.edges: list[TypedEdge] = list(edges)
        self.line = line
        self.vertex = {v.id: v for v in self.vertices}
        self.cusps, self.core_vertices = _prune_cusps(self)

    @property
    def kappa(self) -> int:
        return 1 if self.d % 2 == 0 else 0

    @cached_property
    def is_prime(self) -> bool:
        return is_irreducible(self.modulus)

    def layer(self, i: int) -> list[TypedVertex]:
        return [v for v in self.vertices if v.type == i]

    @property
    def boundary(self) -> list[int]:
        return [c.attach for c in self.cusps]

    @cached_property
    def core(self) -> WeightedGraph:
        return extract_core(self)

    # --- volumes ---------------------------------------------------------------

    def finite_inverse_weight(self) -> Fraction:
        """sum of 1/w(v) over types 0 .. d-1."""
        return sum((Fraction(1, v.weight) for v in self.vertices if v.type < self.d), Fraction(0))

    def tail_inverse_weight(self) -> Fraction:
        """Exact geometric tails beyond type d-1 (weight ratio q on each half-line)."""
        q = self.q
        return sum((Fraction(1, v.weight * (q - 1)) for v in self.layer(self.d - 1)), Fraction(0))

    def total_inverse_weight(self) -> Fraction:
        return self.finite_inverse_weight() + self.tail_inverse_weight()

    def parity_inverse_weights(self) -> tuple[Fraction, Fraction]:
        """(sum over even types, sum over odd types) of 1/w, tails included."""
        q, d = self.q, self.d
        sums = [Fraction(0), Fraction(0)]
        for v in self.vertices:
            if v.type < d:
                sums[v.type % 2] += Fraction(1, v.weight)
        for v in self.layer(d - 1):
            sums[d % 2] += Fraction(q, v.weight * (q * q - 1))
            sums[(d + 1) % 2] += Fraction(1, v.weight * (q * q - 1))
        return sums[0], sums[1]

    # --- serialisation ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "meta": {
                "q": self.q,
                "modulus": format_poly(self.modulus),
                "kappa": self.kappa,
                "depth": self.depth,
            },
            "vertices": [
                {"id": v.id, "type": v.type, "weight": v.weight, "infinity_chain": v.is_infinity_chain}
                for v in self.vertices
            ],
            "edges": [
                {"id": e.id, "type": e.type, "origin": e.origin, "terminus": e.terminus, "weight": e.weight}
                for e in self.edges
            ],
            "cusps": [
                {"attach": c.attach, "start": c.start, "chain": list(c.chain), "ratio": c.ratio}
                for c in self.cusps
            ],
            "core": {"vertices": sorted(self.core_vertices), "boundary": self.boundary},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "DrinfeldDiagram":
        meta = data["meta"]
        q = int(meta["q"])
        modulus = parse_poly(meta["modulus"], q)
        verts = [
            TypedVertex(int(v["id"]), int(v["type"]), int(v["weight"]), bool(v.get("infinity_chain", False)))
            for v in data["vertices"]
        ]
        edges = [
            TypedEdge(int(e["id"]), int(e["type"]), int(e["weight"]), int(e["origin"]), int(e["terminus"]))
            for e in data["edges"]
        ]
        depth = int(meta.get("depth", max(v.type for v in verts)))
        return cls(q, modulus, verts, edges, depth)

    @classmethod
    def from_json(cls, text: str) -> "DrinfeldDiagram":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return (
            f"DrinfeldDiagram(q={self.q}, n={format_poly(self.modulus)}, "
            f"|V|={len(self.vertices)}, |E|={len(self.edges)}, cusps={len(self.cusps)})"
        )


def _neighbours(diagram):
    inc = {v.id: [] for v in diagram.vertices}
    for e in diagram.edges:
        inc[e.origin].append(e.terminus)
        inc[e.terminus].append(e.origin)
    return inc


def _prune_cusps(diagram):
    """Walk each half-line inward from type d-1 while the vertex is a chain link.

    A chain link has exactly two incident edges going to two distinct
    vertices; such vertices carry no cycles and belong to the cusp.
    """
    d, q = diagram.d, diagram.q
    inc = _neighbours(diagram)
    finite = {v.id for v in diagram.vertices if v.type < d}
    outward = {}
    for e in diagram.edges:
        if e.type == d - 1:
            outward[e.origin] = e.terminus
    pruned = set()
    cusps = []
    for start in sorted(v.id for v in diagram.layer(d - 1)):
        prev, cur = outward.get(start), start
        chain = []
        while True:
            nb = inc[cur]
            if len(nb) != 2 or nb[0] == nb[1] or prev not in nb:
                break
            nxt = nb[1] if nb[0] == prev else nb[0]
            if nxt not in finite or nxt in pruned or nxt in chain:
                break
            chain.append(cur)
            prev, cur = cur, nxt
        pruned.update(chain)
        cusps.append(Cusp(attach=cur, start=start, chain=tuple(chain), ratio=q))
    core = finite - pruned
    return cusps, core


def build_diagram(q: int, n: FqPoly, extra_depth: int = 2, fast: bool | None = None) -> DrinfeldDiagram:
    """Quotient of the tree by Gamma_0(n), vertex types 0 .. deg(n)-1+extra_depth."""
    if n.q != q:
        raise ValueError("modulus is over a different field")
    if not n.is_monic():
        raise DiagramError("modulus must be monic")
    d = int(n.deg)
    if d < 3:
        raise DegreeTooSmallError(f"degree >= 3 required (got {d})")
    if extra_depth < 1:
        raise ValueError("extra_depth must be >= 1")
    D = d - 1 + extra_depth
    line = ProjectiveLine(n, fast=fast)
    vparts = [orbit_partition(UpperGroupSpec(i, q), line) for i in range(D + 1)]
    inf = line.infinity

    vertices, vid = [], []
    next_id = 0
    for i, part in enumerate(vparts):
        ids = np.arange(next_id, next_id + len(part))
        vid.append(ids)
        inf_block = part.labels[inf]
        for k, w in enumerate(part.weights):
            vertices.append(TypedVertex(int(ids[k]), i, w, bool(k == inf_block), tuple(part.block(k).tolist())))
        next_id += len(part)

    edges = []
    for i in range(D):
        epart = orbit_partition(UpperGroupSpec(i, q), line, edge_group=True) if i == 0 else vparts[i]
        rep = np.full(len(epart), len(line), dtype=np.int64)
        np.minimum.at(rep, epart.labels, np.arange(len(line)))  # least point of each block
        orig = vid[i][vparts[i].labels[rep]]
        term = vid[i + 1][vparts[i + 1].labels[rep]]
        for k, w in enumerate(epart.weights):
            edges.append(TypedEdge(len(edges), i, w, int(orig[k]), int(term[k]), tuple(epart.block(k).tolist())))

    diagram = DrinfeldDiagram(q, n, vertices, edges, D, line)
    _verify_half_lines(diagram)
    return diagram


def _verify_half_lines(diagram: DrinfeldDiagram):
    q, d = diagram.q, diagram.d
    vw = {v.id: v.weight for v in diagram.vertices}
    for i in range(d - 1, diagram.depth):
        layer = [e for e in diagram.edges if e.type == i]
        origins = [e.origin for e in layer]
        termini = [e.terminus for e in layer]
        if sorted(origins) != sorted(v.id for v in diagram.layer(i)) or sorted(termini) != sorted(
            v.id for v in diagram.layer(i + 1)
        ):
            raise HalfLineError(f"layers {i} and {i + 1} are not in bijection")
        for e in layer:
            if vw[e.terminus] != q * vw[e.origin] or e.weight != vw[e.origin]:
                raise HalfLineError(f"edge {e.id} of type {i} breaks the weight ratio q")


def extract_core(diagram: DrinfeldDiagram) -> WeightedGraph:
    """Finite core: types 0 .. d-1 minus the pruned cusp chains."""
    keep = diagram.core_vertices
    verts = {v.id: v.weight for v in diagram.vertices if v.id in keep}
    edges = [
        Edge(e.id, e.origin, e.terminus, e.weight)
        for e in diagram.edges
        if e.origin in keep and e.terminus in keep
    ]
    try:
        return WeightedGraph(verts, edges)
    except DisconnectedGraphError as exc:
        raise DisconnectedCoreError(str(exc)) from exc


def infinity_chain(diagram: DrinfeldDiagram) -> set[int]:
    """Vertex ids of v_{inf,0}, ..., v_{inf,d-1}."""
    return {v.id for v in diagram.vertices if v.is_infinity_chain and v.type < diagram.d}


def fiber_s(q: int, d: int) -> int:
    """Number of edges of the banana at p."""
    P = q**d
    if d % 2 == 0:
        return (P - 1) // (q * q - 1)
    return (P - q) // (q * q - 1) + 1


def build_p_fiber_graph(q: int, p: FqPoly) -> WeightedGraph:
    """Two unit-weight vertices joined by s(p) edges; for odd degree one edge has weight q+1."""
    d = int(p.deg)
    s = fiber_s(q, d)
    weights = [1] * s
    if d % 2 == 1:
        weights[0] = q + 1
    return WeightedGraph.banana(weights)


# --- structural checks -------------------------------------------------------------


def diagram_checks(diagram: DrinfeldDiagram) -> list[tuple[str, bool, str]]:
    """Structural checks on a (possibly loaded) diagram: (name, ok, detail)."""
    q, d = diagram.q, diagram.d
    vw = {v.id: v.weight for v in diagram.vertices}
    vt = {v.id: v.type for v in diagram.vertices}
    out = []

    bad = [e.id for e in diagram.edges if e.origin == e.terminus]
    out.append(("no loops", not bad, f"loop edges {bad}" if bad else ""))

    bad = [e.id for e in diagram.edges if vt.get(e.origin) != e.type or vt.get(e.terminus) != e.type + 1]
    out.append(("edges join consecutive types", not bad, f"edges {bad}" if bad else ""))

    bad = [e.id for e in diagram.edges if vw.get(e.origin, 1) % e.weight or vw.get(e.terminus, 1) % e.weight]
    out.append(("edge weight divides endpoint weights", not bad, f"edges {bad}" if bad else ""))

    bad = [e.id for e in diagram.edges if e.type >= 1 and e.weight != vw.get(e.origin)]
    out.append(("edge weight equals origin weight above type 0", not bad, f"edges {bad}" if bad else ""))

    deg = {v.id: Fraction(0) for v in diagram.vertices}
    for e in diagram.edges:
        for x in (e.origin, e.terminus):
            if x in deg:
                deg[x] += Fraction(vw[x], e.weight)
    bad = [v.id for v in diagram.vertices if v.type < diagram.depth and deg[v.id] != q + 1]
    out.append(("(q+1)-regular", not bad, f"vertices {bad[:10]}" if bad else ""))

    try:
        _verify_half_lines(diagram)
        out.append(("half-lines beyond type d-1", True, ""))
    except (HalfLineError, KeyError) as exc:
        out.append(("half-lines beyond type d-1", False, str(exc)))

    vol = Fraction(2 * p1_size(diagram.modulus), (q * q - 1) * (q - 1))
    tot = diagram.total_inverse_weight()
    out.append(("total inverse weight", tot == vol, f"{tot} vs {vol}"))

    even, odd = diagram.parity_inverse_weights()
    out.append(("even/odd inverse weights balance", even == odd, f"{even} vs {odd}"))

    try:
        core = extract_core(diagram)
        out.append(("core connected", True, f"|V|={core.n} |E|={core.m}"))
        cdeg = {v: Fraction(0) for v in core.vertex_ids}
        for e in core.edges:
            cdeg[e.origin] += Fraction(core.vertex_weight[e.origin], e.weight)
            cdeg[e.terminus] += Fraction(core.vertex_weight[e.terminus], e.weight)
        bnd = diagram.boundary
        ok = all(cdeg.get(b) == q for b in bnd)
        out.append(("boundary vertices have degree q", ok, f"boundary {bnd}"))
        if diagram.is_prime:
            out.append(("two cusps", len(bnd) == 2, f"{len(bnd)} cusps"))
    except (DiagramError, GraphError) as exc:
        out.append(("core connected", False, str(exc)))
    return out
