import io
import math
from fractions import Fraction

import pytest
from scipy import integrate

from drinfeld_spectra import asymptotics as asy
from drinfeld_spectra import graphcore as gc
from drinfeld_spectra.polyarith import enumerate_monic_primes, parse_poly
from drinfeld_spectra.quotient import build_diagram

TABLE = {2: 0.837, 3: 1.216, 4: 1.483, 5: 1.691, 7: 2.008, 8: 2.135, 9: 2.247, 11: 2.439, 13: 2.601, 16: 2.802}


@pytest.mark.parametrize(
    "q,d,s,g,N,V,kappa",
    [(2, 3, 3, 2, 7, 4, 0), (2, 4, 5, 4, 5, None, 1), (3, 3, 4, 3, 13, None, 0)],
)
def test_closed_form_examples(q, d, s, g, N, V, kappa):
    cf = asy.closed_forms(q, d)
    assert (cf.s, cf.g, cf.N, cf.kappa) == (s, g, N, kappa)
    if V is not None:
        assert cf.core_vertices == V


def test_closed_forms_are_integral_where_expected():
    for q in (2, 3, 4, 5, 7, 8, 9):
        for d in range(3, 10):
            cf = asy.closed_forms(q, d)
            assert cf.g == cf.s - 1
            assert cf.core_vertices.denominator == 1
            assert cf.total_inverse_weight == cf.core_inverse_weight + Fraction(2, (q - 1) ** 2)


def test_closed_forms_reject_small_degree():
    with pytest.raises(ValueError):
        asy.closed_forms(2, 2)


@pytest.mark.parametrize("q", sorted(TABLE))
def test_cq_table(q):
    assert abs(asy.cq(q, 1e-6) - TABLE[q]) <= 1e-3


def test_cq_against_scipy_in_x():
    # independent route: integrate in x directly, letting quad handle the endpoint singularities
    for q in (2, 7, 16):
        sq = math.sqrt(q)

        def f(x):
            y = (q + 1) - x
            return (q + 1) / (2 * math.pi) * math.sqrt(max(4 * q - y * y, 0.0)) / ((q + 1) ** 2 - y * y) * math.log(x)

        ref, _ = integrate.quad(f, (sq - 1) ** 2, (sq + 1) ** 2, epsabs=1e-12, limit=400)
        assert abs(asy.cq(q) - ref) < 1e-8


def test_cq_monotone_and_tolerance_floor():
    vals = [asy.cq(q) for q in sorted(TABLE)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(ValueError):
        asy.cq(2, 1e-12)
    with pytest.raises(ValueError):
        asy.cq(1)


def test_cq_residuals():
    rows, K = asy.cq_asymptotic_check(sorted(TABLE))
    r = {row.q: row.residual for row in rows}
    assert abs(r[16]) < abs(r[2])
    assert all(abs(row.residual) <= K * math.log(row.q) / row.q**2 + 1e-15 for row in rows)
    assert K < 10
    for row in rows:
        q = row.q
        est = 2 * math.log(q + 0.5) / ((q - 1) ** 2 * (q + 1))
        scale = 2 * K * math.log(q) / q**2 / ((q - 1) ** 2 * (q + 1))
        assert abs(asy.growth_constant(q) - est) <= scale + 1e-15


def test_phi_two_ways_and_frozen_values():
    frozen = {
        (2, "T^3+T+1"): 7,
        (2, "T^4+T+1"): 225,
        (2, "T^4+T^3+1"): 160,
        (2, "T^4+T^3+T^2+T+1"): 160,
        (3, "T^3+2*T+1"): 13,
        (4, "T^3+T+1"): 21,
    }
    for (q, text), phi in frozen.items():
        core = build_diagram(q, parse_poly(text, q)).core
        assert asy.phi_two_ways(core) == phi
        assert asy.phi_two_ways(core, "leverrier") == phi


def test_pipeline_mismatch_is_raised(monkeypatch):
    core = build_diagram(2, parse_poly("T^3+T+1", 2)).core
    monkeypatch.setattr(gc, "vertex_weight_cofactor_sum", lambda g: Fraction(7, 3))
    with pytest.raises(asy.PipelineMismatchError):
        asy.phi_two_ways(core)


@pytest.fixture(scope="module")
def small_scan():
    return asy.scan(2, range(3, 6))


def test_scan_rows(small_scan):
    counts = [len(enumerate_monic_primes(2, d)) for d in range(3, 6)]
    assert len(small_scan) == sum(counts) == 2 + 3 + 6
    assert [r.d for r in small_scan] == sorted(r.d for r in small_scan)
    for r in small_scan:
        cf = asy.closed_forms(2, r.d)
        assert not r.error and r.bounds_ok
        assert r.ratio > 0
        assert r.genus == cf.g
        assert r.fiber_order == cf.N
        assert math.log(r.fiber_order) == math.log(cf.N)
        assert r.n == cf.core_vertices


def test_scan_distinct_orders_within_degree(small_scan):
    orders = {r.phi_order for r in small_scan if r.d == 4}
    assert orders == {225, 160}


def test_scan_csv_round_trip(small_scan, tmp_path):
    buf = io.StringIO()
    asy.write_scan_csv(small_scan, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "prime,d,absP,phi_order,ln_phi,cq_absP,ratio,n,m,runtime_ms"
    path = tmp_path / "scan.csv"
    path.write_text(buf.getvalue())
    rows = asy.read_scan_csv(path)
    assert len(rows) == len(small_scan)
    assert float(rows[0]["ratio"]) == small_scan[0].ratio
    assert rows[0]["phi_order"] == "7"


def test_scan_parallel_matches_serial(small_scan):
    par = asy.scan(2, range(3, 6), jobs=2)
    strip = lambda rows: [r.csv_row()[:-1] for r in rows]
    assert strip(par) == strip(small_scan)


def test_scan_records_errors(monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("injected")

    monkeypatch.setattr(asy, "build_diagram", boom)
    rows = asy.scan(2, range(3, 4))
    assert len(rows) == 2 and all("injected" in r.error and r.phi_order is None for r in rows)
    assert rows[0].csv_row()[3].startswith("ERROR")


def test_degree_means(small_scan):
    means = asy.degree_means(small_scan)
    assert sorted(means) == [3, 4, 5]
    assert means[4] == pytest.approx(sum(r.ratio for r in small_scan if r.d == 4) / 3)


def test_shifted_inverse_weight_form_is_infeasible():
    # the same sum written with -1 + (d-1)(3-2q)/(q-1) in place of (d-1)(2-q)/(q-1)
    # is smaller by exactly d and cannot be a sum of positive terms
    for q, d, want in [(3, 3, 0), (4, 3, Fraction(-1, 3))]:
        cf = asy.closed_forms(q, d)
        alt = cf.core_vertices - Fraction(cf.kappa * q, q + 1) - 1 + Fraction((d - 1) * (3 - 2 * q), q - 1)
        assert alt == want
        assert cf.core_inverse_weight - alt == d
