import random
from fractions import Fraction

import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form

from drinfeld_spectra import exact


def rand_matrix(rng, n, lo=-9, hi=9):
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]


@pytest.mark.parametrize("seed", range(20))
def test_det_and_charpoly_against_sympy(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 9)
    M = rand_matrix(rng, n)
    S = sympy.Matrix(M)
    assert exact.bareiss_det(M) == S.det()
    ref = [int(c) for c in reversed(S.charpoly().all_coeffs())]
    assert exact.charpoly_leverrier(M) == ref
    assert exact.charpoly_modular(M) == ref


def test_modular_charpoly_large_entries():
    rng = random.Random(7)
    M = rand_matrix(rng, 14, -10**6, 10**6)
    assert exact.charpoly_modular(M) == exact.charpoly_leverrier(M)


def test_empty_and_singular():
    assert exact.bareiss_det([]) == 1
    assert exact.bareiss_det([[1, 2], [2, 4]]) == 0
    assert exact.charpoly([[0]]) == [0, 1]


@pytest.mark.parametrize("seed", range(15))
def test_smith_divisors_against_sympy(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(1, 6)
    M = rand_matrix(rng, n, -6, 6)
    if sympy.Matrix(M).det() == 0:
        pytest.skip("singular draw")
    snf = smith_normal_form(sympy.Matrix(M), domain=sympy.ZZ)
    ref = sorted(abs(int(snf[i, i])) for i in range(n))
    divs = exact.smith_divisors(M)
    assert divs == ref
    assert all(b % a == 0 for a, b in zip(divs, divs[1:]))


def test_smith_of_diagonal_repairs_chain():
    assert exact.smith_divisors([[6, 0], [0, 4]]) == [2, 12]


def test_leading_minors():
    M = [[2, 1, 0], [1, 2, 1], [0, 1, 2]]
    assert exact.leading_minors(M) == [2, 3, 4]


def test_rational_charpoly():
    M = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 3), Fraction(1, 2)]]
    c = exact.rational_charpoly(M)
    # x^2 - x + (1/4 - 1/9)
    assert c == [Fraction(5, 36), Fraction(-1), Fraction(1)]


@pytest.mark.parametrize("n", [3, 8, 21])
def test_smith_of_identity_plus_ones(n):
    # pivot divides the other entries: the reduction must not cycle
    M = [[2 if i == j else 1 for j in range(n)] for i in range(n)]
    assert exact.smith_divisors(M) == [1] * (n - 1) + [n + 1]
