"""Exact integer/rational linear algebra.

Determinants use Bareiss fraction-free elimination over Python integers.
Smith normal form is computed modulo the determinant, which keeps entries
bounded for nonsingular input.  Characteristic polynomials of integer
matrices come either from the Faddeev-LeVerrier recurrence over the integers
(quartic cost, small matrices) or from Hessenberg reduction modulo a set of
word-size primes followed by Chinese remaindering (cubic cost).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, gcd, isqrt, lcm

import numpy as np


def as_int_rows(M) -> list[list[int]]:
    return [[int(x) for x in row] for row in M]


def bareiss_det(M) -> int:
    """Determinant of a square integer matrix, exact."""
    A = as_int_rows(M)
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if piv is None:
                return 0
            A[k], A[piv] = A[piv], A[k]
            sign = -sign
        akk = A[k][k]
        rowk = A[k]
        for i in range(k + 1, n):
            rowi = A[i]
            aik = rowi[k]
            for j in range(k + 1, n):
                rowi[j] = (akk * rowi[j] - aik * rowk[j]) // prev
            rowi[k] = 0
        prev = akk
    return sign * A[n - 1][n - 1]


def leading_minors(M) -> list[int]:
    """All leading principal minors of an integer matrix (Bareiss pivots)."""
    A = as_int_rows(M)
    n = len(A)
    out, prev = [], 1
    for k in range(n):
        akk = A[k][k]
        out.append(akk)
        if akk == 0:
            out.extend([0] * (n - k - 1))
            return out
        for i in range(k + 1, n):
            aik = A[i][k]
            for j in range(k + 1, n):
                A[i][j] = (akk * A[i][j] - aik * A[k][j]) // prev
        prev = akk
    return out


def _xgcd(a, b):
    """(g, s, t) with s*a + t*b = g = gcd(a, b); plain elimination when a | b."""
    if a and b % a == 0:
        return a, 1, 0
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        x0, x1 = x1, x0 - t * x1
        y0, y1 = y1, y0 - t * y1
    return a, x0, y0


def smith_divisors(M, det: int | None = None) -> list[int]:
    """Elementary divisors of a nonsingular square integer matrix.

    Works in Z/DZ with D = |det M|, valid because the column lattice of M
    contains D*Z^n.  The result is a divisibility chain whose product is D.
    """
    A = as_int_rows(M)
    n = len(A)
    if n == 0:
        return []
    D = abs(bareiss_det(A) if det is None else det)
    if D == 0:
        raise ValueError("smith_divisors needs a nonsingular matrix")
    if D == 1:
        return [1] * n
    A = [[x % D for x in row] for row in A]
    diag = []
    for k in range(n):
        # pivot: nonzero entry of smallest gcd with D
        best = None
        for i in range(k, n):
            row = A[i]
            for j in range(k, n):
                if row[j]:
                    g = gcd(row[j], D)
                    if best is None or g < best[0]:
                        best = (g, i, j)
                        if g == 1:
                            break
            if best and best[0] == 1:
                break
        if best is None:
            diag.extend([0] * (n - k))
            break
        _, i, j = best
        A[k], A[i] = A[i], A[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        while True:
            # clear column k below the pivot with unimodular row combinations
            for i in range(k + 1, n):
                b = A[i][k]
                if not b:
                    continue
                a = A[k][k]
                g, s, t = _xgcd(a, b)
                ag, bg = a // g, b // g
                rk, ri = A[k], A[i]
                A[k] = [(s * x + t * y) % D for x, y in zip(rk, ri)]
                A[i] = [(-bg * x + ag * y) % D for x, y in zip(rk, ri)]
            # clear row k right of the pivot with column combinations
            dirty = False
            for j in range(k + 1, n):
                b = A[k][j]
                if not b:
                    continue
                a = A[k][k]
                g, s, t = _xgcd(a, b)
                ag, bg = a // g, b // g
                for row in A:
                    x, y = row[k], row[j]
                    row[k] = (s * x + t * y) % D
                    row[j] = (-bg * x + ag * y) % D
                dirty = True
            if not dirty or all(A[i][k] == 0 for i in range(k + 1, n)):
                break
        diag.append(A[k][k])
    divs = [gcd(x, D) if x else D for x in diag]
    # repair the divisibility chain
    for i in range(n):
        for j in range(i + 1, n):
            a, b = divs[i], divs[j]
            g = gcd(a, b)
            divs[i], divs[j] = g, a * b // g
    prod = 1
    for x in divs:
        prod *= x
    if prod != D:
        raise ArithmeticError(f"Smith form product {prod} != |det| {D}")
    return divs


# --- characteristic polynomials -------------------------------------------------


def charpoly_leverrier(M) -> list[int]:
    """Coefficients [c_0, ..., c_n] of det(xI - M) for an integer matrix (c_n = 1)."""
    A = as_int_rows(M)
    n = len(A)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    Mk = [[0] * n for _ in range(n)]
    for k in range(1, n + 1):
        c_prev = coeffs[n - k + 1]
        # Mk = A @ M_{k-1} + c_{n-k+1} I
        new = [[sum(A[i][t] * Mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            new[i][i] += c_prev
        Mk = new
        tr = sum(sum(A[i][t] * Mk[t][i] for t in range(n)) for i in range(n))
        if tr % k:
            raise ArithmeticError("non-integral Faddeev-LeVerrier step")
        coeffs[n - k] = -tr // k
    return coeffs


def _is_prime(n):
    if n < 2:
        return False
    for f in range(2, isqrt(n) + 1):
        if n % f == 0:
            return False
    return True


def _modular_primes():
    p = (1 << 25) - 1
    while True:
        if _is_prime(p):
            yield p
        p -= 2


def charpoly_mod_p(M: np.ndarray, p: int) -> np.ndarray:
    """det(xI - M) mod p, coefficients low to high, via Hessenberg reduction.

    Requires p < 2**26 so every intermediate fits an int64.
    """
    H = np.array(M, dtype=np.int64) % p
    n = H.shape[0]
    for j in range(n - 2):
        col = H[j + 1 :, j]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        i = j + 1 + int(nz[0])
        if i != j + 1:
            H[[i, j + 1], :] = H[[j + 1, i], :]
            H[:, [i, j + 1]] = H[:, [j + 1, i]]
        inv = pow(int(H[j + 1, j]), p - 2, p)
        u = (H[j + 2 :, j] * inv) % p
        if not u.any():
            continue
        H[j + 2 :, :] = (H[j + 2 :, :] - (u[:, None] * H[j + 1, :][None, :]) % p) % p
        H[:, j + 1] = (H[:, j + 1] + (H[:, j + 2 :] @ u) % p) % p
    # P[k] = charpoly of the leading k x k block
    P = np.zeros((n + 1, n + 1), dtype=np.int64)
    P[0, 0] = 1
    for k in range(1, n + 1):
        hk = int(H[k - 1, k - 1])
        cur = np.zeros(n + 1, dtype=np.int64)
        cur[1:] = P[k - 1, :-1]
        cur = (cur - hk * P[k - 1]) % p
        if k > 1:
            coef = np.zeros(k - 1, dtype=np.int64)
            prod = 1
            for i in range(k - 1, 0, -1):
                prod = prod * int(H[i, i - 1]) % p
                if prod == 0:
                    break
                coef[i - 1] = int(H[i - 1, k - 1]) * prod % p
            cur = (cur - (coef @ P[: k - 1]) % p) % p
        P[k] = cur
    return P[n]


def charpoly_modular(M) -> list[int]:
    """Exact det(xI - M) for an integer matrix by multi-modular Hessenberg + CRT."""
    A = as_int_rows(M)
    n = len(A)
    if n == 0:
        return [1]
    rho = min(
        max(sum(abs(x) for x in row) for row in A),
        max(sum(abs(A[i][j]) for i in range(n)) for j in range(n)),
    )
    # |c_k| <= C(n,k) rho^(n-k) <= (1 + rho)^n
    bound = max(comb(n, k) * rho ** (n - k) for k in range(n + 1))
    residues, modulus = None, 1
    big = np.array(A, dtype=object)
    for p in _modular_primes():
        r = charpoly_mod_p((big % p).astype(np.int64), p)
        r = [int(x) for x in r]
        if residues is None:
            residues, modulus = r, p
        else:
            inv = pow(modulus, -1, p)
            residues = [x + modulus * (((y - x) * inv) % p) for x, y in zip(residues, r)]
            modulus *= p
        if modulus > 2 * bound:
            break
    return [x - modulus if x > modulus // 2 else x for x in residues]


def charpoly(M, method: str = "auto") -> list[int]:
    """Exact characteristic polynomial of an integer matrix, low to high."""
    n = len(M)
    if method == "auto":
        method = "leverrier" if n <= 12 else "modular"
    if method == "leverrier":
        return charpoly_leverrier(M)
    if method == "modular":
        return charpoly_modular(M)
    raise ValueError(f"unknown method {method!r}")


def clear_denominators(M) -> tuple[list[list[int]], int]:
    """Return (integer matrix L*M, L) for a matrix of Fractions/ints."""
    rows = [[Fraction(x) for x in row] for row in M]
    L = 1
    for row in rows:
        for x in row:
            L = lcm(L, x.denominator)
    return [[int(x * L) for x in row] for row in rows], L


def rational_charpoly(M, method: str = "auto") -> list[Fraction]:
    """Exact characteristic polynomial of a rational matrix, low to high."""
    B, L = clear_denominators(M)
    n = len(B)
    c = charpoly(B, method)
    # det(xI - M) = L^-n det(Lx I - B): coefficient k scales by L^(k-n)
    return [Fraction(ck, L ** (n - k)) for k, ck in enumerate(c)]
