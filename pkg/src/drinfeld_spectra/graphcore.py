"""Weighted graphs, their cycle lattice, discriminant and Laplacian.

A weighted graph carries positive integer weights on vertices and on
positively oriented edges.  The pairing on 1-chains is (e, e) = w(e), so the
Gram matrix of a cycle basis has entries sum_e phi_i(e) phi_j(e) w(e); its
absolute determinant is the discriminant.

Laplacian convention: ``laplacian_matrix`` is the operator on 0-chains in the
vertex basis, column v holding

    Delta(v) = sum_{e at v} w(v)/w(e) * (v - other end of e),

so that Delta kills f0 = sum_v v / w(v).  ``adjacency_matrix`` is the operator
on functions, A[v][u] = w(v) * sum_{e: u-v} 1/w(e), and the Laplacian matrix is
the transpose of D - A.  Both have the same spectrum.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from . import exact


class GraphError(ValueError):
    pass


class LoopError(GraphError):
    pass


class DisconnectedGraphError(GraphError):
    pass


class EmptyHomologyError(GraphError):
    pass


class NotACycleError(GraphError):
    pass


class ZeroMultiplicityError(ArithmeticError):
    """The zero eigenvalue of the Laplacian is not simple."""


@dataclass(frozen=True)
class Edge:
    id: Hashable
    origin: Hashable
    terminus: Hashable
    weight: int


class WeightedGraph:
    """Finite connected multigraph with vertex and edge weights."""

    def __init__(self, vertices: Mapping[Hashable, int], edges: Iterable[Edge], check_connected: bool = True):
        self.vertex_ids = list(vertices)
        self.vertex_weight = {v: int(w) for v, w in vertices.items()}
        self.index = {v: i for i, v in enumerate(self.vertex_ids)}
        self.edges = tuple(edges)
        seen = set()
        for v, w in self.vertex_weight.items():
            if w <= 0:
                raise GraphError(f"vertex {v!r} has non-positive weight {w}")
        for e in self.edges:
            if e.id in seen:
                raise GraphError(f"duplicate edge id {e.id!r}")
            seen.add(e.id)
            if e.origin not in self.index or e.terminus not in self.index:
                raise GraphError(f"edge {e.id!r} has an unknown endpoint")
            if e.origin == e.terminus:
                raise LoopError(f"edge {e.id!r} is a loop")
            if e.weight <= 0:
                raise GraphError(f"edge {e.id!r} has non-positive weight")
        if check_connected and not self.is_connected():
            raise DisconnectedGraphError("graph is not connected")

    @property
    def n(self) -> int:
        return len(self.vertex_ids)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def cycle_rank(self) -> int:
        return self.m - self.n + 1

    def weights(self) -> list[int]:
        return [self.vertex_weight[v] for v in self.vertex_ids]

    def edge_weights(self) -> list[int]:
        return [e.weight for e in self.edges]

    def incidence(self) -> list[list[tuple[int, int, int]]]:
        """Per vertex index: (edge index, other vertex index, sign), sign=+1 if vertex is the terminus."""
        inc = [[] for _ in range(self.n)]
        for k, e in enumerate(self.edges):
            o, t = self.index[e.origin], self.index[e.terminus]
            inc[t].append((k, o, 1))
            inc[o].append((k, t, -1))
        return inc

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        inc = self.incidence()
        seen = {0}
        todo = [0]
        while todo:
            x = todo.pop()
            for _, y, _ in inc[x]:
                if y not in seen:
                    seen.add(y)
                    todo.append(y)
        return len(seen) == self.n

    def boundary(self, chain: Sequence[int]) -> list[int]:
        """d(chain) in vertex coordinates: +c at the terminus, -c at the origin."""
        out = [0] * self.n
        for c, e in zip(chain, self.edges):
            out[self.index[e.terminus]] += c
            out[self.index[e.origin]] -= c
        return out

    def to_dict(self) -> dict:
        return {
            "vertices": [{"id": v, "weight": self.vertex_weight[v]} for v in self.vertex_ids],
            "edges": [
                {"id": e.id, "origin": e.origin, "terminus": e.terminus, "weight": e.weight}
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "WeightedGraph":
        verts = {v["id"]: v.get("weight", 1) for v in data["vertices"]}
        edges = [Edge(e["id"], e["origin"], e["terminus"], e.get("weight", 1)) for e in data["edges"]]
        return cls(verts, edges)

    @classmethod
    def banana(cls, edge_weights: Sequence[int], vertex_weights=(1, 1)) -> "WeightedGraph":
        verts = {0: vertex_weights[0], 1: vertex_weights[1]}
        return cls(verts, [Edge(k, 0, 1, w) for k, w in enumerate(edge_weights)])

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class CycleBasis:
    edge_ids: tuple
    cycles: np.ndarray  # shape (h, m), integer coefficients on E+

    @property
    def h(self) -> int:
        return self.cycles.shape[0]


@dataclass(frozen=True)
class Discriminant:
    order: int
    elementary_divisors: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"order": str(self.order), "elementary_divisors": [str(x) for x in self.elementary_divisors]}


def _spanning_tree(g: WeightedGraph):
    """BFS tree from vertex 0: parent edge index and depth per vertex."""
    inc = g.incidence()
    parent = [None] * g.n
    depth = [0] * g.n
    seen = [False] * g.n
    seen[0] = True
    todo = deque([0])
    tree = set()
    while todo:
        x = todo.popleft()
        for k, y, _ in inc[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = (k, x)
                depth[y] = depth[x] + 1
                tree.add(k)
                todo.append(y)
    return parent, depth, tree


def cycle_basis(g: WeightedGraph) -> CycleBasis:
    """Fundamental cycles of a BFS spanning tree, one per non-tree edge."""
    if not g.is_connected():
        raise DisconnectedGraphError("cycle basis needs a connected graph")
    parent, depth, tree = _spanning_tree(g)
    rows = []
    for k, e in enumerate(g.edges):
        if k in tree:
            continue
        c = np.zeros(g.m, dtype=np.int64)
        c[k] = 1
        # close e by the tree path from t(e) back to o(e)
        a, b = g.index[e.terminus], g.index[e.origin]
        while a != b:
            if depth[a] >= depth[b]:
                kk, pa = parent[a]
                c[kk] += 1 if g.index[g.edges[kk].origin] == a else -1
                a = pa
            else:
                kk, pb = parent[b]
                c[kk] += 1 if g.index[g.edges[kk].terminus] == b else -1
                b = pb
        rows.append(c)
    cyc = np.array(rows, dtype=np.int64).reshape(len(rows), g.m)
    return CycleBasis(tuple(e.id for e in g.edges), cyc)


def pairing(g: WeightedGraph, phi: Sequence[int], psi: Sequence[int]) -> int:
    return sum(int(a) * int(b) * e.weight for a, b, e in zip(phi, psi, g.edges))


def gram_matrix(g: WeightedGraph, basis: CycleBasis | None = None) -> list[list[int]]:
    if basis is None:
        basis = cycle_basis(g)
    C = np.asarray(basis.cycles)
    w = np.array(g.edge_weights(), dtype=object)
    bound = int(np.abs(C).max(initial=0)) ** 2 * int(sum(g.edge_weights()))
    if bound < 2**62:
        G = (C.astype(np.int64) * w.astype(np.int64)) @ C.T.astype(np.int64)
    else:
        G = (C.astype(object) * w) @ C.T.astype(object)
    return [[int(x) for x in row] for row in G]


def discriminant(g: WeightedGraph, basis: CycleBasis | None = None, allow_empty: bool = False,
                 divisors: bool = True) -> Discriminant:
    """Order |det Gram| and Smith invariants of the cycle lattice."""
    if basis is None:
        basis = cycle_basis(g)
    if basis.h == 0:
        if allow_empty:
            return Discriminant(1, ())
        raise EmptyHomologyError("graph has no cycles")
    G = gram_matrix(g, basis)
    det = exact.bareiss_det(G)
    order = abs(det)
    divs = tuple(exact.smith_divisors(G, det)) if divisors else ()
    return Discriminant(order, divs)


# --- Laplacian -------------------------------------------------------------------


def _conductances(g: WeightedGraph) -> dict[tuple[int, int], Fraction]:
    """sum over edges u-v of 1/w(e), keyed by ordered index pairs (both orders)."""
    cond = {}
    for e in g.edges:
        o, t = g.index[e.origin], g.index[e.terminus]
        x = Fraction(1, e.weight)
        cond[o, t] = cond.get((o, t), 0) + x
        cond[t, o] = cond.get((t, o), 0) + x
    return cond


def degrees(g: WeightedGraph) -> list[Fraction]:
    """deg(v) = sum_{e at v} w(v)/w(e)."""
    deg = [Fraction(0)] * g.n
    for e in g.edges:
        for v in (e.origin, e.terminus):
            i = g.index[v]
            deg[i] += Fraction(g.vertex_weight[v], e.weight)
    return deg


def adjacency_matrix(g: WeightedGraph) -> np.ndarray:
    """Adjacency operator on functions: A[v][u] = w(v) sum_{e: u-v} 1/w(e)."""
    A = np.full((g.n, g.n), Fraction(0), dtype=object)
    w = g.weights()
    for (v, u), c in _conductances(g).items():
        A[v, u] = w[v] * c
    return A


def laplacian_matrix(g: WeightedGraph) -> np.ndarray:
    """Laplacian on 0-chains; equals the transpose of D - A."""
    A = adjacency_matrix(g)
    L = -A.T
    for i, d in enumerate(degrees(g)):
        L[i, i] = d
    return L


def symmetric_laplacian(g: WeightedGraph) -> np.ndarray:
    """Float symmetric matrix similar to the Laplacian: W^1/2 K W^1/2."""
    K = np.zeros((g.n, g.n))
    for e in g.edges:
        o, t = g.index[e.origin], g.index[e.terminus]
        c = 1.0 / e.weight
        K[o, o] += c
        K[t, t] += c
        K[o, t] -= c
        K[t, o] -= c
    s = np.sqrt(np.array(g.weights(), dtype=float))
    return s[:, None] * K * s[None, :]


def laplacian_eigenvalues(g: WeightedGraph) -> np.ndarray:
    return np.linalg.eigvalsh(symmetric_laplacian(g))


def laplacian_charpoly(g: WeightedGraph, method: str = "auto") -> list[Fraction]:
    """Exact det(x I - Delta), coefficients from x^0 upward."""
    return exact.rational_charpoly(laplacian_matrix(g), method)


def nonzero_eigenvalue_product(g: WeightedGraph, method: str = "auto") -> Fraction:
    """Product of the nonzero Laplacian eigenvalues, exact."""
    c = laplacian_charpoly(g, method)
    if c[0] != 0:
        raise ArithmeticError("Laplacian is nonsingular; graph data is inconsistent")
    if g.n == 1:
        return Fraction(1)
    if c[1] == 0:
        raise ZeroMultiplicityError("zero eigenvalue is not simple")
    return (-1) ** (g.n - 1) * c[1]


def vertex_weight_cofactor_sum(g: WeightedGraph) -> int:
    """sum_v prod_{v' != v} w(v')."""
    w = g.weights()
    total = 0
    for i in range(len(w)):
        p = 1
        for j, x in enumerate(w):
            if j != i:
                p *= x
        total += p
    return total


@dataclass(frozen=True)
class MatrixTreeVerdict:
    mode: str
    lhs: object
    rhs: object
    holds: bool
    rel_diff: float


def verify_matrix_tree_identity(g: WeightedGraph, mode: str = "exact", method: str = "auto",
                                rel_tol: float = 1e-6, disc: int | None = None) -> MatrixTreeVerdict:
    """Check disc * sum_v prod_{v'!=v} w(v') == prod(nonzero eigenvalues) * prod_e w(e)."""
    if disc is None:
        disc = discriminant(g, allow_empty=True, divisors=False).order
    lhs = disc * vertex_weight_cofactor_sum(g)
    ew = math.prod(g.edge_weights())
    if mode == "exact":
        rhs = nonzero_eigenvalue_product(g, method) * ew
        ok = rhs == lhs
        rel = 0.0 if ok else float(abs(Fraction(lhs) - rhs) / max(abs(rhs), 1))
        return MatrixTreeVerdict("exact", lhs, rhs, ok, rel)
    if mode == "float":
        lam = np.sort(np.abs(laplacian_eigenvalues(g)))
        log_rhs = float(np.sum(np.log(lam[1:]))) + sum(math.log(w) for w in g.edge_weights())
        log_lhs = math.log(lhs)
        rel = abs(math.expm1(log_rhs - log_lhs))
        return MatrixTreeVerdict("float", log_lhs, log_rhs, rel <= rel_tol, rel)
    raise ValueError(f"unknown mode {mode!r}")


# --- model changes ---------------------------------------------------------------


def subdivide(g: WeightedGraph) -> WeightedGraph:
    """Replace every edge of weight w by a path of w unit edges; all vertex weights 1."""
    verts = {v: 1 for v in g.vertex_ids}
    edges = []
    for e in g.edges:
        prev = e.origin
        for k in range(1, e.weight):
            mid = (e.id, "mid", k)
            verts[mid] = 1
            edges.append(Edge((e.id, k - 1), prev, mid, 1))
            prev = mid
        edges.append(Edge((e.id, e.weight - 1), prev, e.terminus, 1))
    return WeightedGraph(verts, edges)


def to_harmonic_cochain(g: WeightedGraph, cycle: Sequence[int]) -> list[int]:
    """phi* = w * phi on positively oriented edges."""
    if any(g.boundary(cycle)):
        raise NotACycleError("chain has nonzero boundary")
    return [int(c) * e.weight for c, e in zip(cycle, g.edges)]


def cochain_pairing(g: WeightedGraph, f: Sequence[int], h: Sequence[int]) -> Fraction:
    return sum((Fraction(int(a) * int(b), e.weight) for a, b, e in zip(f, h, g.edges)), Fraction(0))


def harmonic_defect(g: WeightedGraph, f: Sequence[int]) -> list[Fraction]:
    """sum_{t(e)=v} w(v)/w(e) f(e) per vertex, with f(e-bar) = -f(e)."""
    out = [Fraction(0)] * g.n
    for c, e in zip(f, g.edges):
        t, o = g.index[e.terminus], g.index[e.origin]
        out[t] += Fraction(g.vertex_weight[e.terminus] * int(c), e.weight)
        out[o] -= Fraction(g.vertex_weight[e.origin] * int(c), e.weight)
    return out
