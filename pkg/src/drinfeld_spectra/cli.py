"""Command line: build / verify / scan / cq.

Exit codes: 0 success, 2 usage or parse error, 3 invariant failure,
4 numerical failure.  Big integers are printed in full, floats with 17
significant digits.  If DRINFELD_SPECTRA_CACHE names a directory, built
diagrams are cached there as JSON keyed by (q, modulus, extra depth).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import graphcore
from .asymptotics import (
    closed_forms,
    cq,
    degree_means,
    growth_constant,
    scan,
    write_scan_csv,
)
from .polyarith import SUPPORTED_Q, PolynomialParseError, UnsupportedFieldError, format_poly, parse_poly
from .quotient import DegreeTooSmallError, DiagramError, DrinfeldDiagram, build_diagram, build_p_fiber_graph, diagram_checks
from .spectra import spectral_report, weyl_decomposition_check

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_NUMERIC = 0, 2, 3, 4
CACHE_ENV = "DRINFELD_SPECTRA_CACHE"


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _error(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _slug(text: str) -> str:
    return re.sub(r"[^0-9A-Za-z]+", "_", text).strip("_")


def cached_build(q: int, poly, extra_depth: int = 2) -> DrinfeldDiagram:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return build_diagram(q, poly, extra_depth)
    path = Path(root) / f"q{q}-{poly.code}-e{extra_depth}.json"
    if path.exists():
        return DrinfeldDiagram.from_json(path.read_text())
    diagram = build_diagram(q, poly, extra_depth)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(diagram.to_json())
    tmp.replace(path)
    return diagram


# --- build -----------------------------------------------------------------------------


def cmd_build(args) -> int:
    if args.q not in SUPPORTED_Q:
        return _error(f"unsupported q={args.q}; supported: {list(SUPPORTED_Q)}", EXIT_USAGE)
    try:
        poly = parse_poly(args.poly, args.q)
    except (PolynomialParseError, UnsupportedFieldError, ValueError) as exc:
        return _error(f"cannot parse polynomial: {exc}", EXIT_USAGE)
    if not poly.is_monic():
        return _error("polynomial must be monic", EXIT_USAGE)
    if poly.deg < 3:
        return _error(f"degree ≥ 3 required (got {poly.deg})", EXIT_USAGE)
    try:
        diagram = cached_build(args.q, poly, args.extra_depth)
        core = diagram.core
    except DegreeTooSmallError as exc:
        return _error(str(exc), EXIT_USAGE)
    except (DiagramError, ArithmeticError, graphcore.GraphError) as exc:
        return _error(f"construction failed: {exc}", EXIT_INVARIANT)
    out = Path(args.out) if args.out else Path(f"diagram-q{args.q}-{_slug(format_poly(poly))}.json")
    out.write_text(diagram.to_json(indent=1))
    summary = {
        "modulus": format_poly(poly),
        "q": args.q,
        "kappa": diagram.kappa,
        "prime": diagram.is_prime,
        "vertices": len(diagram.vertices),
        "edges": len(diagram.edges),
        "cusps": len(diagram.cusps),
        "core_vertices": core.n,
        "core_edges": core.m,
        "boundary": diagram.boundary,
        "output": str(out),
    }
    for k, v in summary.items():
        print(f"{k}: {fmt(v)}")
    return EXIT_OK


# --- verify ----------------------------------------------------------------------------


class _Report:
    def __init__(self):
        self.lines = []
        self.failed_invariant = False
        self.failed_numeric = False

    def add(self, name, ok, detail="", numeric=False):
        self.lines.append(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
        if not ok:
            if numeric:
                self.failed_numeric = True
            else:
                self.failed_invariant = True

    def code(self) -> int:
        if self.failed_invariant:
            return EXIT_INVARIANT
        if self.failed_numeric:
            return EXIT_NUMERIC
        return EXIT_OK


def verify_diagram(diagram: DrinfeldDiagram, exact_max_n: int = 100, recorded=None) -> _Report:
    rep = _Report()
    q, d = diagram.q, diagram.d
    for name, ok, detail in diagram_checks(diagram):
        rep.add(name, ok, detail)
    try:
        core = diagram.core
    except (DiagramError, graphcore.GraphError) as exc:
        rep.add("core extraction", False, str(exc))
        return rep
    if recorded is not None:
        same = sorted(recorded.get("vertices", [])) == sorted(core.vertex_ids) and list(
            recorded.get("boundary", [])
        ) == diagram.boundary
        rep.add("recorded core matches recomputed core", same)

    try:
        mode = "exact" if core.n <= exact_max_n else "float"
        v = graphcore.verify_matrix_tree_identity(core, mode=mode)
        rep.add(f"matrix-tree identity ({mode})", v.holds, f"{fmt(v.lhs)} vs {fmt(v.rhs)}", numeric=mode == "float")
    except graphcore.EmptyHomologyError:
        rep.add("matrix-tree identity", True, "core is a tree")
    except (ArithmeticError, graphcore.GraphError) as exc:
        rep.add("matrix-tree identity", False, str(exc))

    try:
        srep = spectral_report(core, q, diagram.boundary)
        for vd in srep.verdicts:
            rep.add(vd.name, vd.ok, f"{fmt(vd.value)} vs {fmt(vd.bound)}", numeric=True)
        w = weyl_decomposition_check(core, q)
        rep.add("interlacing alpha_i - 1 <= gamma_i <= alpha_i", w.interlacing, f"max violation {fmt(w.max_violation)}",
                numeric=True)
        rep.add("sum of eps_i = 2", w.eps_ok, fmt(w.eps_sum), numeric=True)
    except ArithmeticError as exc:
        rep.add("spectral checks", False, str(exc), numeric=True)

    if diagram.is_prime:
        cf = closed_forms(q, d)
        rep.add("core vertex count formula", core.n == cf.core_vertices, f"{core.n} vs {cf.core_vertices}")
        inv = sum((Fraction(1, w) for w in core.weights()), Fraction(0))
        rep.add("core inverse weight formula", inv == cf.core_inverse_weight, f"{inv} vs {cf.core_inverse_weight}")
        ratio = Fraction(math.prod(core.weights()), math.prod(core.edge_weights()))
        rep.add("weight product ratio formula", ratio == cf.weight_product_ratio, f"{ratio} vs {cf.weight_product_ratio}")
        tot = diagram.total_inverse_weight()
        rep.add("total volume with cusp tails", tot == cf.total_inverse_weight, f"{tot} vs {cf.total_inverse_weight}")
        rep.add("cycle rank equals genus", core.cycle_rank == cf.g, f"{core.cycle_rank} vs {cf.g}")
        fib = graphcore.discriminant(build_p_fiber_graph(q, diagram.modulus), divisors=False).order
        rep.add("fiber discriminant equals N", fib == cf.N, f"{fib} vs {cf.N}")
    return rep


def cmd_verify(args) -> int:
    try:
        data = json.loads(Path(args.graph).read_text())
        diagram = DrinfeldDiagram.from_dict(data)
    except graphcore.GraphError as exc:
        return _error(f"invalid graph: {exc}", EXIT_INVARIANT)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        return _error(f"cannot read graph file: {exc}", EXIT_USAGE)
    rep = verify_diagram(diagram, args.exact_max_n, data.get("core"))
    for line in rep.lines:
        print(line)
    return rep.code()


# --- scan / cq -------------------------------------------------------------------------


def cmd_scan(args) -> int:
    if args.q not in SUPPORTED_Q:
        return _error(f"unsupported q={args.q}", EXIT_USAGE)
    if args.dmin < 3 or args.dmax < args.dmin:
        return _error("need 3 <= dmin <= dmax", EXIT_USAGE)

    def progress(k, total, row):
        status = "ok" if not row.error else row.error
        print(f"[{k}/{total}] {row.prime} {status} {row.runtime_ms:.0f} ms", file=sys.stderr)

    rows = scan(args.q, range(args.dmin, args.dmax + 1), jobs=args.jobs, progress=progress)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_scan_csv(rows, fh)
    else:
        write_scan_csv(rows, sys.stdout)
    for d, mean in degree_means(rows).items():
        print(f"d={d} mean ratio {mean:.17g}", file=sys.stderr)
    if any(r.error for r in rows):
        return EXIT_INVARIANT
    if not all(r.bounds_ok for r in rows):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_cq(args) -> int:
    if args.q < 2:
        return _error("q must be >= 2", EXIT_USAGE)
    try:
        c = cq(args.q, args.abs_tol)
        g = growth_constant(args.q, args.abs_tol)
    except ValueError as exc:
        return _error(str(exc), EXIT_USAGE)
    except ArithmeticError as exc:
        return _error(str(exc), EXIT_NUMERIC)
    out = {
        "q": args.q,
        "Cq": float(fmt(c)),
        "abs_tol": args.abs_tol,
        "c_q": float(fmt(g)),
        "residual": float(fmt(c - math.log(args.q + 0.5))),
    }
    print(json.dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drinfeld-spectra", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build the quotient diagram and its core")
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--poly", required=True, help='monic modulus, e.g. "T^3+T+1"')
    b.add_argument("--extra-depth", type=int, default=2, help="layers beyond type d-1 (default 2)")
    b.add_argument("--out", help="graph JSON path (default diagram-q<q>-<poly>.json)")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="run every invariant check on a graph JSON file")
    v.add_argument("graph")
    v.add_argument("--exact-max-n", type=int, default=100,
                   help="largest core for the exact characteristic polynomial (default 100)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("scan", help="scan all monic primes of degrees dmin..dmax")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--dmin", type=int, required=True)
    s.add_argument("--dmax", type=int, required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", help="CSV path (default standard output)")
    s.set_defaults(func=cmd_scan)

    c = sub.add_parser("cq", help="the constant C_q and c(q)")
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--abs-tol", type=float, default=1e-10)
    c.set_defaults(func=cmd_cq)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
