"""Floating-point spectra of finite cores.

Both operators are similar to real symmetric matrices: with W = diag(w(v)),
W^{-1/2} A W^{1/2} and W^{-1/2} (D - A) W^{1/2} are symmetric because
A[v][u] / w(v) is.  Eigenvectors x of the symmetric form give eigenfunctions
f = W^{1/2} x of the original operator, so f(b) = 0 iff x(b) = 0.

Cusp forms.  Extend a core eigenfunction f by zero along the cusps.  At core
vertices the diagram operator agrees with the core operator, since cusp
values are zero.  The first cusp vertex beyond an attachment b sees the
single core value f(b), so the extension is an eigenfunction of the whole
diagram iff f vanishes at every boundary vertex.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .graphcore import WeightedGraph, symmetric_laplacian
from .quadrature import adaptive_gauss_legendre

CLUSTER_RTOL = 1e-8
RANK_TOL = 1e-7
BOUND_TOL = 1e-8


class ConvergenceError(ArithmeticError):
    pass


class EmptySpectrumError(ValueError):
    pass


class EigenClusterWarning(UserWarning):
    pass


def symmetric_adjacency(g: WeightedGraph) -> np.ndarray:
    S = np.zeros((g.n, g.n))
    s = np.sqrt(np.array(g.weights(), dtype=float))
    for e in g.edges:
        o, t = g.index[e.origin], g.index[e.terminus]
        S[o, t] += s[o] * s[t] / e.weight
        S[t, o] += s[o] * s[t] / e.weight
    return S


def _symmetric(g: WeightedGraph, operator: str) -> np.ndarray:
    if operator == "laplacian":
        return symmetric_laplacian(g)
    if operator == "adjacency":
        return symmetric_adjacency(g)
    raise ValueError(f"unknown operator {operator!r}")


def eigh_checked(S: np.ndarray, rtol: float = 1e-10):
    """Symmetric eigendecomposition with a per-pair residual check."""
    try:
        lam, X = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    if S.size:
        scale = max(np.linalg.norm(S, 2), 1.0)
        res = np.linalg.norm(S @ X - X * lam, axis=0)
        if res.max() > rtol * scale:
            raise ConvergenceError(f"eigen residual {res.max():.3e} exceeds {rtol} * |S|")
    return lam, X


def eigenvalues(g: WeightedGraph, operator: str = "laplacian") -> np.ndarray:
    """Ascending eigenvalues of the Laplacian or adjacency operator."""
    lam, _ = eigh_checked(_symmetric(g, operator))
    return lam


def cluster_eigenvalues(lam: np.ndarray, rtol: float = CLUSTER_RTOL) -> list[list[int]]:
    """Group sorted eigenvalues closer than rtol * max(1, |lambda|).

    Warns when two neighbouring groups are within ten times that distance,
    where the multiplicity grouping is ambiguous.
    """
    groups = [[0]] if lam.size else []
    for k in range(1, lam.size):
        gap = lam[k] - lam[k - 1]
        scale = rtol * max(1.0, abs(lam[k]))
        if gap <= scale:
            groups[-1].append(k)
        else:
            if gap < 10 * scale:
                warnings.warn(f"eigenvalue gap {gap:.2e} near {lam[k]:.6f}; multiplicities ambiguous",
                              EigenClusterWarning, stacklevel=3)
            groups.append([k])
    return groups


def cusp_spectrum(g: WeightedGraph, boundary, rtol: float = CLUSTER_RTOL, rank_tol: float = RANK_TOL) -> list[float]:
    """Adjacency eigenvalues whose eigenfunctions may vanish on ``boundary``, with multiplicity."""
    lam, X = eigh_checked(symmetric_adjacency(g))
    rows = [g.index[b] for b in boundary]
    out = []
    for grp in cluster_eigenvalues(lam, rtol):
        Y = X[np.ix_(rows, grp)]
        rank = np.linalg.matrix_rank(Y, tol=rank_tol) if rows else 0
        k = len(grp) - int(rank)
        if k > 0:
            out.extend([float(np.mean(lam[grp]))] * k)
    return out


# --- bound checks ------------------------------------------------------------------


@dataclass
class Verdict:
    name: str
    ok: bool
    value: float
    bound: float


@dataclass
class SpectralReport:
    q: int
    laplacian_eigs: list[float]
    adjacency_eigs: list[float]
    shifted_eigs: list[float]
    cusp_eigs: list[float]
    S: float
    S_cusp: float
    verdicts: list[Verdict] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.laplacian_eigs)

    @property
    def m(self) -> int:
        return len(self.cusp_eigs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"], d["m"] = self.n, self.m
        return d


def spectral_report(g: WeightedGraph, q: int, boundary) -> SpectralReport:
    gam = eigenvalues(g, "laplacian")
    lam = eigenvalues(g, "adjacency")
    alpha = np.sort((q + 1) - lam)
    nu = cusp_spectrum(g, boundary)
    S = float(np.sum(np.log(gam[1:])))
    S_cusp = float(sum(math.log((q + 1) - x) for x in nu))
    rep = SpectralReport(q, gam.tolist(), lam.tolist(), alpha.tolist(), nu, S, S_cusp)
    rep.verdicts = check_bounds(rep, q)
    return rep


def check_bounds(report: SpectralReport, q: int, tol: float = BOUND_TOL) -> list[Verdict]:
    lam, gam = report.adjacency_eigs, report.laplacian_eigs
    r = 2 * math.sqrt(q)
    n = len(lam)
    out = [
        Verdict("lambda_1 >= -(q+1)", lam[0] >= -(q + 1) - tol, lam[0], -(q + 1)),
        Verdict("lambda_n <= q+1", lam[-1] <= (q + 1) + tol, lam[-1], q + 1),
        Verdict("gamma_n <= 2(q+1)", gam[-1] <= 2 * (q + 1) + tol, gam[-1], 2 * (q + 1)),
    ]
    if n >= 3:
        out += [
            Verdict("lambda_2 >= -2 sqrt q", lam[1] >= -r - tol, lam[1], -r),
            Verdict("lambda_{n-1} <= 2 sqrt q", lam[-2] <= r + tol, lam[-2], r),
            Verdict("gamma_{n-1} <= q+1+2 sqrt q", gam[-2] <= q + 1 + r + tol, gam[-2], q + 1 + r),
        ]
    if n >= 2:
        out.append(Verdict("gamma_2 >= q-2 sqrt q", gam[1] >= q - r - tol, gam[1], q - r))
    if report.cusp_eigs:
        big = max(abs(x) for x in report.cusp_eigs)
        out.append(Verdict("|nu| <= 2 sqrt q", big <= r + tol, big, r))
    return out


def weyl_bounds(a_eigs, b_eigs, lo: float, hi: float, tol: float = BOUND_TOL) -> bool:
    """For B = A + P with the spectrum of P in [lo, hi]: a_i + lo <= b_i <= a_i + hi for sorted spectra."""
    a, b = np.sort(np.asarray(a_eigs)), np.sort(np.asarray(b_eigs))
    return bool(np.all(b >= a + lo - tol) and np.all(b <= a + hi + tol))


@dataclass
class WeylVerdict:
    interlacing: bool
    eps_sum: float
    eps_ok: bool
    max_violation: float

    @property
    def ok(self) -> bool:
        return self.interlacing and self.eps_ok


def weyl_decomposition_check(g: WeightedGraph, q: int, tol: float = BOUND_TOL, sum_tol: float = 1e-6) -> WeylVerdict:
    """alpha_i - 1 <= gamma_i <= alpha_i and sum (alpha_i - gamma_i) = 2.

    Delta = ((q+1) I - A) - E with E = (q+1) I - D diagonal, 0 <= E <= 1 when
    every vertex has degree q or q+1.
    """
    gam = eigenvalues(g, "laplacian")
    alpha = np.sort((q + 1) - eigenvalues(g, "adjacency"))
    inter = weyl_bounds(alpha, gam, -1.0, 0.0, tol)
    viol = float(max(np.max(gam - alpha), np.max(alpha - 1 - gam), 0.0))
    s = float(np.sum(alpha - gam))
    return WeylVerdict(inter, s, abs(s - 2) <= sum_tol, viol)


# --- the limiting measure ----------------------------------------------------------


class MuQ:
    """Limit measure of cusp spectra on [-2 sqrt q, 2 sqrt q]."""

    def __init__(self, q: int, abs_tol: float = 1e-10):
        self.q = q
        self.r = 2 * math.sqrt(q)
        self.abs_tol = abs_tol

    def density(self, x):
        q = self.q
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < self.r
        out = np.zeros_like(x)
        xi = x[inside]
        out[inside] = (q + 1) / (2 * math.pi) * np.sqrt(4 * q - xi**2) / ((q + 1) ** 2 - xi**2)
        return out

    def _theta_density(self, t):
        # x = -2 sqrt(q) cos t
        q = self.q
        c = np.cos(t)
        return (q + 1) / (2 * math.pi) * 4 * q * np.sin(t) ** 2 / ((q + 1) ** 2 - 4 * q * c * c)

    def _theta(self, x):
        return math.acos(min(1.0, max(-1.0, -x / self.r)))

    def total_mass(self) -> float:
        return adaptive_gauss_legendre(self._theta_density, 0.0, math.pi, self.abs_tol)

    def cdf(self, x: float) -> float:
        return adaptive_gauss_legendre(self._theta_density, 0.0, self._theta(x), self.abs_tol)

    def cdf_many(self, xs) -> np.ndarray:
        """CDF at many points by integrating between consecutive sorted abscissae."""
        xs = np.asarray(xs, dtype=float)
        order = np.argsort(xs)
        th = [self._theta(float(x)) for x in xs[order]]
        tol = self.abs_tol / (len(th) + 1)
        vals, acc, prev = np.empty(len(th)), 0.0, 0.0
        for k, t in enumerate(th):
            if t > prev:
                acc += adaptive_gauss_legendre(self._theta_density, prev, t, tol)
                prev = t
            vals[k] = acc
        out = np.empty_like(vals)
        out[order] = vals
        return out

    def mass(self, a: float, b: float) -> float:
        ta, tb = self._theta(a), self._theta(b)
        if tb <= ta:
            return 0.0
        return adaptive_gauss_legendre(self._theta_density, ta, tb, self.abs_tol)


def ks_distance(sample, cdf_values) -> float:
    """Kolmogorov-Smirnov distance given the model CDF at the sorted sample."""
    F = np.asarray(cdf_values, dtype=float)
    k = F.size
    i = np.arange(1, k + 1)
    return float(max(np.max(i / k - F), np.max(F - (i - 1) / k)))


@dataclass
class EquidistributionReport:
    q: int
    ks_distance: float
    histogram: list[tuple[float, float, int, float]]
    size: int


def equidistribution_report(cusp_eigs, q: int, bins: int = 20, abs_tol: float = 1e-10) -> EquidistributionReport:
    x = np.sort(np.asarray(cusp_eigs, dtype=float))
    if x.size == 0:
        raise EmptySpectrumError("no cusp eigenvalues")
    mu = MuQ(q, abs_tol)
    ks = ks_distance(x, mu.cdf_many(x))
    edges = np.linspace(-mu.r, mu.r, bins + 1)
    counts, _ = np.histogram(np.clip(x, -mu.r, mu.r), bins=edges)
    hist = [(float(a), float(b), int(c), mu.mass(a, b)) for a, b, c in zip(edges, edges[1:], counts)]
    return EquidistributionReport(q, ks, hist, int(x.size))


def write_histogram_csv(report: EquidistributionReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_left", "bin_right", "count", "mu_q_mass"])
        for a, b, c, m in report.histogram:
            w.writerow([repr(a), repr(b), c, repr(m)])
