import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from drinfeld_spectra.polyarith import (
    SUPPORTED_Q,
    FqPoly,
    PolynomialParseError,
    ResidueRing,
    UnsupportedFieldError,
    count_monic_primes,
    enumerate_monic_primes,
    format_poly,
    get_field,
    is_irreducible,
    is_unimodular,
    p1_enumerate,
    p1_normalize,
    p1_size,
    parse_poly,
)


@pytest.mark.parametrize("q", SUPPORTED_Q)
def test_field_axioms_exhaustive(q):
    F = get_field(q)
    add, mul = F.add_table, F.mul_table
    R = range(q)
    for a, b in itertools.product(R, R):
        assert add[a][b] == add[b][a]
        assert mul[a][b] == mul[b][a]
    for a, b, c in itertools.product(R, R, R):
        assert add[add[a][b]][c] == add[a][add[b][c]]
        assert mul[mul[a][b]][c] == mul[a][mul[b][c]]
        assert mul[a][add[b][c]] == add[mul[a][b]][mul[a][c]]
    for a in R:
        assert add[a][0] == a and mul[a][1] == a
        assert add[a][F.neg[a]] == 0
        if a:
            assert mul[a][F.inv[a]] == 1


@pytest.mark.parametrize("q", SUPPORTED_Q)
def test_primitive_element_generates_units(q):
    F = get_field(q)
    x, seen = 1, set()
    for _ in range(q - 1):
        seen.add(x)
        x = F.mul_table[x][F.primitive]
    assert seen == set(range(1, q))


def test_unsupported_q():
    with pytest.raises(UnsupportedFieldError):
        get_field(6)


def test_divmod_example():
    f = parse_poly("T^3+2T+1", 3)
    g = parse_poly("T^2+1", 3)
    quo, rem = divmod(f, g)
    assert format_poly(quo) == "T"
    assert format_poly(rem) == "T+1"
    assert quo * g + rem == f


def test_divide_by_zero():
    with pytest.raises(ZeroDivisionError):
        divmod(FqPoly.one(2), FqPoly.zero(2))


@st.composite
def poly_pairs(draw):
    q = draw(st.sampled_from([2, 3, 4, 5, 8, 9]))
    a = tuple(draw(st.lists(st.integers(0, q - 1), max_size=7)))
    b = tuple(draw(st.lists(st.integers(0, q - 1), min_size=1, max_size=5)))
    b = b[:-1] + (max(b[-1], 1),)
    return FqPoly(q, a), FqPoly(q, b)


@given(poly_pairs())
@settings(max_examples=200, deadline=None)
def test_division_identity(pair):
    a, b = pair
    quo, rem = divmod(a, b)
    assert quo * b + rem == a
    assert rem.deg < b.deg


@given(poly_pairs())
@settings(max_examples=100, deadline=None)
def test_ring_laws(pair):
    a, b = pair
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * b == a * b + b * b
    assert a - a == FqPoly.zero(a.q)


@pytest.mark.parametrize("q,d", [(2, d) for d in range(1, 9)] + [(3, d) for d in range(1, 6)] + [(4, 3), (5, 3), (16, 2)])
def test_prime_counts_match_necklace_formula(q, d):
    assert len(enumerate_monic_primes(q, d)) == count_monic_primes(q, d)


@pytest.mark.parametrize("q,d", [(2, 5), (3, 3), (4, 3), (9, 2)])
def test_irreducibility_matches_trial_division(q, d):
    for c in range(q**d):
        f = FqPoly.from_code(q, q**d + c)
        assert is_irreducible(f) == oracles.is_irreducible_by_division(f)


def test_cubic_primes_q2():
    assert [format_poly(p) for p in enumerate_monic_primes(2, 3)] == ["T^3+T+1", "T^3+T^2+1"]


@pytest.mark.parametrize("text,q", [("T^3+T+1", 2), ("T^3+2*T+1", 3), ("T^5+3*T^2+2", 4), ("T^4+T^3+T+1", 2), ("1", 5)])
def test_parse_format_round_trip(text, q):
    assert format_poly(parse_poly(text, q)) == text


@pytest.mark.parametrize("bad", ["T^", "T^3+x", "", "T^3++1", "7*T"])
def test_parse_errors(bad):
    with pytest.raises(PolynomialParseError):
        parse_poly(bad, 5)


def test_parse_spacing_and_implicit_product():
    assert parse_poly(" T^3 + 2T + 1 ", 3) == parse_poly("T^3+2*T+1", 3)


@pytest.mark.parametrize("q,text", [(2, "T^2"), (2, "T^3+T"), (3, "T^2+T"), (2, "T^3+T+1"), (3, "T^2+1"), (4, "T^2")])
def test_p1_enumeration(q, text):
    n = parse_poly(text, q)
    ring = ResidueRing(n)
    pts = p1_enumerate(n)
    assert len(pts) == len(set(pts)) == p1_size(n)
    assert len(oracles.naive_p1(n)) == p1_size(n)
    for P in pts:
        assert is_unimodular(ring, P.u, P.v)
        assert p1_normalize(ring, P.u, P.v) == P


@pytest.mark.parametrize("q,text", [(2, "T^3"), (3, "T^2+T"), (2, "T^3+T+1")])
def test_p1_normalize_is_class_invariant(q, text):
    n = parse_poly(text, q)
    ring = ResidueRing(n)
    for P in p1_enumerate(n):
        for lam in ring.units():
            assert p1_normalize(ring, lam * P.u, lam * P.v) == P


def test_non_unimodular_pair_rejected():
    n = parse_poly("T^2", 2)
    ring = ResidueRing(n)
    T = FqPoly.monomial(2, 1)
    with pytest.raises(ValueError):
        p1_normalize(ring, T, T)


@pytest.mark.parametrize("q,d", [(2, 3), (3, 3), (4, 3), (2, 6)])
def test_vectorised_maps(q, d):
    n = enumerate_monic_primes(q, d)[0]
    ring = ResidueRing(n)
    c = parse_poly("T+1", q)
    add, mul, inv = ring.add_map(c), ring.mul_map(c), ring.inverse_map()
    for code in range(0, ring.size, max(1, ring.size // 50)):
        x = ring.decode(code)
        assert add[code] == ring.encode(x + c)
        assert mul[code] == ring.encode(x * c)
        if code:
            assert ring.encode(x * ring.decode(int(inv[code]))) == 1
