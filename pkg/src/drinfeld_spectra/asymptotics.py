"""Closed-form counts, the constant C_q, and prime scans of ln|Phi|."""

from __future__ import annotations

import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import graphcore
from .polyarith import FqPoly, enumerate_monic_primes, format_poly, parse_poly
from .quadrature import adaptive_gauss_legendre
from .quotient import build_diagram, build_p_fiber_graph, fiber_s
from .spectra import spectral_report


def cq(q: int, abs_tol: float = 1e-10) -> float:
    """C_q = int ln(x) dmu over the shifted support, with x = q+1 - 2 sqrt(q) cos t."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if abs_tol < 1e-10:
        raise ValueError("abs_tol must be >= 1e-10")
    sq = math.sqrt(q)

    def f(t):
        c = np.cos(t)
        s2 = np.sin(t) ** 2
        return (q + 1) / (2 * math.pi) * 4 * q * s2 * np.log(q + 1 - 2 * sq * c) / ((q + 1) ** 2 - 4 * q * c * c)

    return adaptive_gauss_legendre(f, 0.0, math.pi, abs_tol)


def growth_constant(q: int, abs_tol: float = 1e-10) -> float:
    """c(q) = 2 C_q / ((q-1)^2 (q+1))."""
    return 2 * cq(q, abs_tol) / ((q - 1) ** 2 * (q + 1))


@dataclass
class CqResidual:
    q: int
    Cq: float
    log_q_half: float
    residual: float
    scaled: float  # q^2 * residual / ln q


def cq_asymptotic_check(q_list, abs_tol: float = 1e-10) -> tuple[list[CqResidual], float]:
    """Residuals C_q - ln(q + 1/2) and the least K with |r| <= K ln(q) / q^2 on the list."""
    rows = []
    for q in q_list:
        c = cq(q, abs_tol)
        ref = math.log(q + 0.5)
        r = c - ref
        rows.append(CqResidual(q, c, ref, r, q * q * r / math.log(q)))
    K = max(abs(r.scaled) for r in rows) if rows else 0.0
    return rows, K


@dataclass(frozen=True)
class ClosedForms:
    q: int
    d: int
    kappa: int
    s: int
    g: int
    N: int
    core_vertices: Fraction
    core_inverse_weight: Fraction
    weight_product_ratio: int
    total_inverse_weight: Fraction


def closed_forms(q: int, d: int) -> ClosedForms:
    if d < 3:
        raise ValueError("d >= 3 required")
    P = q**d
    kappa = 1 if d % 2 == 0 else 0
    s = fiber_s(q, d)
    N = (P - 1) // (q * q - 1) if kappa else (P - 1) // (q - 1)
    V = (
        Fraction(2 * q * (q ** (d - 1) - 1), (q - 1) ** 2 * (q + 1))
        + Fraction((q - 2) * (d - 1), q - 1)
        + Fraction(kappa * q, q + 1)
    )
    inv = V - Fraction(kappa * q, q + 1) + Fraction((d - 1) * (2 - q), q - 1)
    ratio = (q - 1) * (q + 1) ** kappa
    total = Fraction(2 * (P + 1) * (q - 1), (q * q - 1) * (q - 1) ** 2)
    return ClosedForms(q, d, kappa, s, s - 1, N, V, inv, ratio, total)


# --- scans ---------------------------------------------------------------------------

CSV_COLUMNS = ["prime", "d", "absP", "phi_order", "ln_phi", "cq_absP", "ratio", "n", "m", "runtime_ms"]


class PipelineMismatchError(ArithmeticError):
    """The two exact computations of |Phi| disagree."""


@dataclass
class ScanRow:
    prime: str
    d: int
    absP: int
    phi_order: int | None
    ln_phi: float
    cq_absP: float
    ratio: float
    n: int
    m: int
    runtime_ms: float
    S: float = math.nan
    S_cusp: float = math.nan
    genus: int = -1
    fiber_order: int = -1
    bounds_ok: bool = False
    error: str = ""

    def csv_row(self) -> list[str]:
        phi = str(self.phi_order) if self.phi_order is not None else f"ERROR: {self.error}"
        return [
            self.prime, str(self.d), str(self.absP), phi,
            f"{self.ln_phi:.17g}", f"{self.cq_absP:.17g}", f"{self.ratio:.17g}",
            str(self.n), str(self.m), f"{self.runtime_ms:.17g}",
        ]


def phi_two_ways(core: graphcore.WeightedGraph, method: str = "auto") -> int:
    """|Phi| from the Gram determinant and from the matrix-tree identity; they must agree."""
    gram = graphcore.discriminant(core, divisors=False).order
    prod = graphcore.nonzero_eigenvalue_product(core, method) * math.prod(core.edge_weights())
    other = prod / graphcore.vertex_weight_cofactor_sum(core)
    if other.denominator != 1 or int(other) != gram:
        raise PipelineMismatchError(f"Gram determinant {gram} != eigenvalue route {other}")
    return gram


def scan_prime(q: int, p: FqPoly, c_q: float | None = None) -> ScanRow:
    t0 = time.perf_counter()
    d = int(p.deg)
    P = q**d
    if c_q is None:
        c_q = growth_constant(q)
    row = ScanRow(format_poly(p), d, P, None, math.nan, c_q * P, math.nan, 0, 0, 0.0)
    try:
        D = build_diagram(q, p)
        core = D.core
        row.n = core.n
        row.genus = core.cycle_rank
        phi = phi_two_ways(core)
        row.phi_order = phi
        row.ln_phi = math.log(phi)
        row.ratio = row.ln_phi / row.cq_absP
        rep = spectral_report(core, q, D.boundary)
        row.m = rep.m
        row.S, row.S_cusp = rep.S, rep.S_cusp
        row.bounds_ok = all(v.ok for v in rep.verdicts)
        row.fiber_order = graphcore.discriminant(build_p_fiber_graph(q, p), divisors=False).order
    except Exception as exc:  # recorded in the row; the scan continues
        row.error = f"{type(exc).__name__}: {exc}"
    row.runtime_ms = (time.perf_counter() - t0) * 1000
    return row


def _scan_task(args):
    q, code, c_q = args
    return scan_prime(q, FqPoly.from_code(q, code), c_q)


def scan(q: int, d_range, jobs: int = 1, progress=None) -> list[ScanRow]:
    """Scan every monic prime of each degree; rows ordered by (d, polynomial)."""
    c_q = growth_constant(q)
    tasks = [(q, p.code, c_q) for d in d_range for p in enumerate_monic_primes(q, d)]
    rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for k, row in enumerate(ex.map(_scan_task, tasks, chunksize=1)):
                rows.append(row)
                if progress:
                    progress(k + 1, len(tasks), row)
    else:
        for k, t in enumerate(tasks):
            row = _scan_task(t)
            rows.append(row)
            if progress:
                progress(k + 1, len(tasks), row)
    return rows


def write_scan_csv(rows, fh=None) -> None:
    fh = fh or sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_row())


def read_scan_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def degree_means(rows) -> dict[int, float]:
    by_d = {}
    for r in rows:
        if r.phi_order is not None:
            by_d.setdefault(r.d, []).append(r.ratio)
    return {d: sum(v) / len(v) for d, v in sorted(by_d.items())}
