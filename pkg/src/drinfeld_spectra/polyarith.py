"""Arithmetic in F_q, in A = F_q[T], in residue rings A/n and on P^1(A/n).

Field elements are plain integers ``0 <= x < q``.  For prime ``q`` they are
residues mod ``q``; for ``q = p^r`` the integer ``sum c_j p^j`` stands for the
class of ``sum c_j x^j`` modulo a fixed Conway polynomial, so addition is
digit-wise mod ``p`` and multiplication goes through precomputed tables.

Polynomials over F_q are immutable :class:`FqPoly` values with coefficients
stored lowest degree first.  A monic polynomial of degree ``d`` is also
identified with the integer ``sum c_k q^k`` (its *code*); ordering by code is
the lexicographic order on coefficients read from the leading term down.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cache, cached_property

import numpy as np

SUPPORTED_Q = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)

# Conway polynomials, lowest coefficient first (x is a primitive element).
_CONWAY = {
    4: (1, 1, 1),
    8: (1, 1, 0, 1),
    9: (2, 2, 1),
    16: (1, 1, 0, 0, 1),
}


class UnsupportedFieldError(ValueError):
    pass


class PolynomialParseError(ValueError):
    pass


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, r)`` with ``q = p**r``; raise if ``q`` is not a prime power."""
    if q < 2:
        raise UnsupportedFieldError(f"q={q} is not a prime power")
    p = next(f for f in range(2, q + 1) if q % f == 0)
    r, m = 0, q
    while m % p == 0:
        m //= p
        r += 1
    if m != 1:
        raise UnsupportedFieldError(f"q={q} is not a prime power")
    return p, r


class FiniteField:
    """The field F_q with explicit addition/multiplication tables."""

    def __init__(self, q: int):
        if q not in SUPPORTED_Q:
            p, r = prime_power(q)  # raises for non prime powers
            if r > 1:
                raise UnsupportedFieldError(f"q={q}: extension fields only for q in {SUPPORTED_Q}")
        self.q = q
        self.p, self.r = prime_power(q)
        if self.r == 1:
            add = [[(a + b) % q for b in range(q)] for a in range(q)]
            mul = [[(a * b) % q for b in range(q)] for a in range(q)]
        else:
            add = [[self._digit_add(a, b) for b in range(q)] for a in range(q)]
            mul = [[self._poly_mul(a, b) for b in range(q)] for a in range(q)]
        self.add_table = add
        self.mul_table = mul
        self.neg = [next(b for b in range(q) if add[a][b] == 0) for a in range(q)]
        self.inv = [0] + [next(b for b in range(1, q) if mul[a][b] == 1) for a in range(1, q)]
        self.add_np = np.array(add, dtype=np.int64)
        self.mul_np = np.array(mul, dtype=np.int64)
        self.primitive = self._find_primitive()

    def __repr__(self):
        return f"FiniteField({self.q})"

    def _digits(self, a):
        out = []
        for _ in range(self.r):
            a, c = divmod(a, self.p)
            out.append(c)
        return out

    def _from_digits(self, ds):
        return sum(c * self.p**j for j, c in enumerate(ds))

    def _digit_add(self, a, b):
        return self._from_digits([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def _poly_mul(self, a, b):
        p, r = self.p, self.r
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * r - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
        mod = _CONWAY[self.q]
        for k in range(2 * r - 2, r - 1, -1):
            c = prod[k]
            if c:
                for j in range(r + 1):
                    prod[k - r + j] = (prod[k - r + j] - c * mod[j]) % p
        return self._from_digits(prod[:r])

    def _find_primitive(self):
        for g in range(2, self.q) if self.q > 2 else [1]:
            x, order = g, 1
            while x != 1:
                x = self.mul_table[x][g]
                order += 1
            if order == self.q - 1:
                return g
        return 1

    def sub(self, a, b):
        return self.add_table[a][self.neg[b]]

    def units(self):
        return range(1, self.q)


@cache
def get_field(q: int) -> FiniteField:
    return FiniteField(q)


@dataclass(frozen=True)
class FqPoly:
    """Polynomial over F_q; ``coeffs`` lowest degree first, no trailing zeros."""

    q: int
    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        if any(not 0 <= x < self.q for x in c):
            raise ValueError(f"coefficients must lie in [0, {self.q})")
        while c and c[-1] == 0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @property
    def field(self) -> FiniteField:
        return get_field(self.q)

    @classmethod
    def zero(cls, q):
        return cls(q, ())

    @classmethod
    def one(cls, q):
        return cls(q, (1,))

    @classmethod
    def monomial(cls, q, k, c=1):
        return cls(q, (0,) * k + (c,))

    @classmethod
    def from_code(cls, q, code):
        cs = []
        while code:
            code, c = divmod(code, q)
            cs.append(c)
        return cls(q, tuple(cs))

    @property
    def code(self) -> int:
        return sum(c * self.q**k for k, c in enumerate(self.coeffs))

    @property
    def deg(self) -> int | float:
        return len(self.coeffs) - 1 if self.coeffs else float("-inf")

    @property
    def norm(self) -> int:
        """|a| = q^deg(a), with |0| = 0."""
        return self.q ** len(self.coeffs) // self.q if self.coeffs else 0

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self):
        return not self.coeffs

    def is_monic(self):
        return self.lead == 1

    def __bool__(self):
        return bool(self.coeffs)

    def _check(self, other):
        if isinstance(other, int):
            if self.field.r == 1:
                other %= self.q
            other = FqPoly(self.q, (other,))
        if not isinstance(other, FqPoly):
            return NotImplemented
        if other.q != self.q:
            raise ValueError("polynomials over different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        add = self.field.add_table
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        a = a + (0,) * (n - len(a))
        b = b + (0,) * (n - len(b))
        return FqPoly(self.q, tuple(add[x][y] for x, y in zip(a, b)))

    __radd__ = __add__

    def __neg__(self):
        neg = self.field.neg
        return FqPoly(self.q, tuple(neg[x] for x in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        if not self.coeffs or not other.coeffs:
            return FqPoly(self.q)
        add, mul = self.field.add_table, self.field.mul_table
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                row = mul[x]
                for j, y in enumerate(other.coeffs):
                    out[i + j] = add[out[i + j]][row[y]]
        return FqPoly(self.q, tuple(out))

    __rmul__ = __mul__

    def scale(self, c: int) -> FqPoly:
        row = self.field.mul_table[c]
        return FqPoly(self.q, tuple(row[x] for x in self.coeffs))

    def __divmod__(self, other):
        return poly_divmod(self, other)

    def __floordiv__(self, other):
        return poly_divmod(self, other)[0]

    def __mod__(self, other):
        return poly_divmod(self, other)[1]

    def __pow__(self, k):
        result, base = FqPoly.one(self.q), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def monic(self) -> FqPoly:
        if not self.coeffs:
            return self
        return self.scale(self.field.inv[self.lead])

    def __call__(self, x: int) -> int:
        add, mul = self.field.add_table, self.field.mul_table
        acc = 0
        for c in reversed(self.coeffs):
            acc = add[mul[acc][x]][c]
        return acc

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"FqPoly(q={self.q}, {format_poly(self)!r})"

    def sort_key(self):
        return (len(self.coeffs), tuple(reversed(self.coeffs)))

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()


def poly_divmod(a: FqPoly, b: FqPoly) -> tuple[FqPoly, FqPoly]:
    """Euclidean division ``a = b*quotient + remainder`` with deg(remainder) < deg(b)."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.q != b.q:
        raise ValueError("polynomials over different fields")
    F = a.field
    add, mul, neg = F.add_table, F.mul_table, F.neg
    rem = list(a.coeffs)
    db = len(b.coeffs) - 1
    inv_lead = F.inv[b.lead]
    quot = [0] * max(len(rem) - db, 0)
    for k in range(len(rem) - 1, db - 1, -1):
        c = rem[k]
        if not c:
            continue
        t = mul[c][inv_lead]
        quot[k - db] = t
        nt = neg[t]
        for j, bj in enumerate(b.coeffs):
            rem[k - db + j] = add[rem[k - db + j]][mul[nt][bj]]
    return FqPoly(a.q, tuple(quot)), FqPoly(a.q, tuple(rem[:db]) if db > 0 else ())


def poly_gcd(a: FqPoly, b: FqPoly) -> FqPoly:
    while b:
        a, b = b, a % b
    return a.monic()


def poly_xgcd(a: FqPoly, b: FqPoly) -> tuple[FqPoly, FqPoly, FqPoly]:
    """Return ``(g, s, t)`` with ``s*a + t*b = g`` and ``g`` monic."""
    q = a.q
    r0, r1 = a, b
    s0, s1 = FqPoly.one(q), FqPoly.zero(q)
    t0, t1 = FqPoly.zero(q), FqPoly.one(q)
    while r1:
        quo, rem = poly_divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quo * s1
        t0, t1 = t1, t0 - quo * t1
    if not r0:
        return r0, s0, t0
    c = r0.field.inv[r0.lead]
    return r0.scale(c), s0.scale(c), t0.scale(c)


def poly_powmod(a: FqPoly, k: int, m: FqPoly) -> FqPoly:
    result, base = FqPoly.one(a.q) % m, a % m
    while k:
        if k & 1:
            result = (result * base) % m
        base = (base * base) % m
        k >>= 1
    return result


def _prime_factors(n):
    out, f = [], 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(f: FqPoly) -> bool:
    """Rabin's test: x^(q^d) = x mod f and gcd(x^(q^(d/l)) - x, f) = 1 for primes l | d."""
    d = f.deg
    if d < 1:
        return False
    if d == 1:
        return True
    q = f.q
    x = FqPoly.monomial(q, 1)
    frob = [x % f]  # frob[k] = x^(q^k) mod f
    for _ in range(d):
        frob.append(poly_powmod(frob[-1], q, f))
    if frob[d] != x % f:
        return False
    for ell in _prime_factors(d):
        if poly_gcd(frob[d // ell] - x, f).deg != 0:
            return False
    return True


def monic_polys(q: int, d: int):
    """All monic polynomials of degree ``d`` in increasing code order."""
    for c in range(q**d):
        yield FqPoly.from_code(q, q**d + c)


def enumerate_monic_primes(q: int, d: int) -> list[FqPoly]:
    """Monic irreducible polynomials of degree exactly ``d``, sorted by code."""
    get_field(q)
    if d < 1:
        raise ValueError("degree must be >= 1")
    return [f for f in monic_polys(q, d) if is_irreducible(f)]


def count_monic_primes(q: int, d: int) -> int:
    """Necklace formula (1/d) sum_{e | d} mu(e) q^(d/e)."""

    def mobius(n):
        res, f = 1, 2
        while f * f <= n:
            if n % f == 0:
                n //= f
                if n % f == 0:
                    return 0
                res = -res
            f += 1
        return -res if n > 1 else res

    return sum(mobius(e) * q ** (d // e) for e in range(1, d + 1) if d % e == 0) // d


# --- text format -----------------------------------------------------------

_TERM = re.compile(r"^(?:(\d+)\*?)?(T(?:\^(\d+))?)?$")


def parse_poly(text: str, q: int) -> FqPoly:
    """Parse ``"T^3+T+1"`` style text; coefficients are field-element indices."""
    s = text.replace(" ", "")
    if not s:
        raise PolynomialParseError("empty polynomial")
    get_field(q)
    acc = FqPoly.zero(q)
    for term in s.split("+"):
        m = _TERM.match(term)
        if not term or not m or (m.group(1) is None and m.group(2) is None):
            raise PolynomialParseError(f"cannot parse term {term!r} in {text!r}")
        c = int(m.group(1)) if m.group(1) is not None else 1
        if not 0 <= c < q:
            raise PolynomialParseError(f"coefficient {c} is not an element of F_{q}")
        if m.group(2) is None:
            k = 0
        else:
            k = int(m.group(3)) if m.group(3) is not None else 1
        acc = acc + FqPoly.monomial(q, k, c)
    return acc


def format_poly(f: FqPoly) -> str:
    if not f.coeffs:
        return "0"
    parts = []
    for k in range(len(f.coeffs) - 1, -1, -1):
        c = f.coeffs[k]
        if not c:
            continue
        mono = "" if k == 0 else ("T" if k == 1 else f"T^{k}")
        if k == 0:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}*{mono}")
    return "+".join(parts)


# --- residue rings and the projective line -----------------------------------


class ResidueRing:
    """A/n for a monic ``n`` of degree ``d >= 1``.

    Residues are reduced polynomials of degree < d, encoded as integers in
    ``[0, q^d)``.  The vectorised maps (``add_map``, ``mul_map``) return for
    every code ``x`` the code of ``x + c`` or ``e * x``.
    """

    def __init__(self, n: FqPoly):
        if not n.is_monic() or n.deg < 1:
            raise ValueError("modulus must be monic of degree >= 1")
        self.n = n
        self.q = n.q
        self.d = int(n.deg)
        self.size = self.q**self.d
        self.field = n.field

    def __repr__(self):
        return f"ResidueRing({format_poly(self.n)}, q={self.q})"

    def reduce(self, a: FqPoly) -> FqPoly:
        return a % self.n

    def encode(self, a: FqPoly) -> int:
        return (a % self.n).code

    def decode(self, code: int) -> FqPoly:
        return FqPoly.from_code(self.q, code)

    def is_unit(self, a: FqPoly) -> bool:
        return bool(a) and poly_gcd(a, self.n).deg == 0

    def inverse(self, a: FqPoly) -> FqPoly:
        g, s, _ = poly_xgcd(a % self.n, self.n)
        if g.deg != 0:
            raise ZeroDivisionError(f"{a} is not a unit mod {self.n}")
        return s % self.n

    def units(self) -> list[FqPoly]:
        return [a for a in map(self.decode, range(1, self.size)) if self.is_unit(a)]

    @cached_property
    def digits(self) -> np.ndarray:
        """(size, d) array of F_q coefficients of every residue code."""
        codes = np.arange(self.size, dtype=np.int64)
        out = np.empty((self.size, self.d), dtype=np.int64)
        for k in range(self.d):
            out[:, k] = codes % self.q
            codes //= self.q
        return out

    @cached_property
    def _powers(self) -> np.ndarray:
        return self.q ** np.arange(self.d, dtype=np.int64)

    def _encode_digits(self, digs):
        return digs @ self._powers

    def add_map(self, c: FqPoly) -> np.ndarray:
        cd = np.array(((c % self.n).coeffs + (0,) * self.d)[: self.d], dtype=np.int64)
        return self._encode_digits(self.field.add_np[self.digits, cd[None, :]])

    def mul_map(self, e: FqPoly) -> np.ndarray:
        e = e % self.n
        add, mul = self.field.add_np, self.field.mul_np
        acc = np.zeros_like(self.digits)
        basis = e
        t = FqPoly.monomial(self.q, 1)
        for k in range(self.d):
            bk = np.array((basis.coeffs + (0,) * self.d)[: self.d], dtype=np.int64)
            acc = add[acc, mul[self.digits[:, k : k + 1], bk[None, :]]]
            basis = (basis * t) % self.n
        return self._encode_digits(acc)

    def inverse_map(self) -> np.ndarray:
        """Inverse of every nonzero residue (entry 0 maps to 0); needs n irreducible.

        Built from the power sequence of a primitive element, found by trying
        residues in code order.
        """
        if not is_irreducible(self.n):
            raise ValueError(f"{format_poly(self.n)} is not irreducible")
        N = self.size
        for code in range(1, N):
            step = self.mul_map(self.decode(code))
            seq = [1]
            x = int(step[1])
            while x != 1 and len(seq) < N - 1:
                seq.append(x)
                x = int(step[x])
            if x == 1 and len(seq) == N - 1:
                seq = np.array(seq, dtype=np.int64)
                inv = np.zeros(N, dtype=np.int64)
                inv[seq] = seq[(-np.arange(N - 1)) % (N - 1)]
                return inv
        raise AssertionError("finite field without a primitive element")


@dataclass(frozen=True)
class P1Point:
    """A point (u : v) of P^1(A/n) in canonical form."""

    u: FqPoly
    v: FqPoly

    def __str__(self):
        return f"({format_poly(self.u)} : {format_poly(self.v)})"


def _lex_key(ring: ResidueRing, a: FqPoly, b: FqPoly):
    pad = lambda f: tuple(f.coeffs) + (0,) * (ring.d - len(f.coeffs))
    return pad(a) + pad(b)


def is_unimodular(ring: ResidueRing, u: FqPoly, v: FqPoly) -> bool:
    return poly_gcd(poly_gcd(u % ring.n, v % ring.n), ring.n).deg == 0


def p1_normalize(ring: ResidueRing, u: FqPoly, v: FqPoly) -> P1Point:
    """Canonical representative of the class of the unimodular pair (u, v)."""
    u, v = u % ring.n, v % ring.n
    if not is_unimodular(ring, u, v):
        raise ValueError(f"({u} : {v}) is not unimodular mod {ring.n}")
    if ring.is_unit(v):
        return P1Point((u * ring.inverse(v)) % ring.n, FqPoly.one(ring.q))
    if ring.is_unit(u):
        return P1Point(FqPoly.one(ring.q), (v * ring.inverse(u)) % ring.n)
    best = min(
        (((lam * u) % ring.n, (lam * v) % ring.n) for lam in ring.units()),
        key=lambda uv: _lex_key(ring, *uv),
    )
    return P1Point(*best)


def p1_size(n: FqPoly) -> int:
    """|P^1(A/n)| = |n| * prod_{p | n} (1 + 1/|p|), via factorisation by trial division."""
    q = n.q
    size = n.norm
    m = n
    num, den = size, 1
    d = 1
    while m.deg > 0 and d <= m.deg:
        for f in enumerate_monic_primes(q, d):
            if (m % f).is_zero():
                num *= f.norm + 1
                den *= f.norm
                while (m % f).is_zero():
                    m = m // f
        d += 1
    return num // den


def p1_enumerate(n: FqPoly) -> list[P1Point]:
    """Every point of P^1(A/n) once, canonical form; order: (u:1) by code, then the rest by key."""
    ring = ResidueRing(n)
    one = FqPoly.one(n.q)
    pts = [P1Point(ring.decode(c), one) for c in range(ring.size)]
    rest = set()
    nonunits = [ring.decode(c) for c in range(ring.size) if not ring.is_unit(ring.decode(c))]
    for v in nonunits:
        rest.add(P1Point(one, v))
    for u in nonunits:
        for v in nonunits:
            if u and v and is_unimodular(ring, u, v):
                rest.add(p1_normalize(ring, u, v))
    pts.extend(sorted(rest, key=lambda P: _lex_key(ring, P.v, P.u)))
    return pts
