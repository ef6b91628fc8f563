"""Arithmetic in small finite fields F_{p^n}.

Elements are stored as integers: the element sum(c_i t^i) of F_p[t]/(m(t))
is encoded as sum(c_i p^i).  Multiplication goes through exp/log tables built
from a primitive element; addition is XOR in characteristic 2 and uses Zech
logarithms otherwise.  Every scalar operation has a numpy counterpart
(``vadd``, ``vmul``, ...) working elementwise on integer arrays, which is what
the enumeration code uses.

Univariate polynomials over a field are plain lists of element codes in
ascending degree, with the zero polynomial represented by ``[]``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 2**13
# fields up to this size use full addition and multiplication tables
TABLE_LIMIT = 729


class FieldError(ValueError):
    """Invalid field construction or field operation."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


# ---------------------------------------------------------------------------
# Polynomials over the prime field, used only while building a field.
# Coefficient lists are ascending and may carry trailing zeros.
# ---------------------------------------------------------------------------


def _fp_trim(a: list[int]) -> list[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _fp_trim([x % p for x in a])
    m = _fp_trim(m)
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        a = _fp_trim(a)
    return a


def _monic_polys(p: int, degree: int):
    for low in itertools.product(range(p), repeat=degree):
        yield list(low) + [1]


def is_irreducible_fp(poly: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    poly = _fp_trim([c % p for c in poly])
    n = len(poly) - 1
    if n < 1:
        return False
    for d in range(1, n // 2 + 1):
        for cand in _monic_polys(p, d):
            if not _fp_mod(poly, cand, p):
                return False
    return True


def smallest_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree n (low degree first)."""
    # itertools.product varies the last position fastest, so tuples come out
    # in lexicographic order of (c_0, c_1, ..., c_{n-1}).
    for low in itertools.product(range(p), repeat=n):
        cand = list(low) + [1]
        if is_irreducible_fp(cand, p):
            return tuple(cand)
    raise FieldError(f"no irreducible polynomial of degree {n} over F_{p}")  # pragma: no cover


# ---------------------------------------------------------------------------
# Field context
# ---------------------------------------------------------------------------


class FieldCtx:
    """The field F_{p^n} = F_p[t]/(modulus).

    Immutable after construction.  Two contexts with the same (p, n) compare
    equal because the modulus is chosen deterministically.
    """

    def __init__(self, p: int, n: int, modulus: tuple[int, ...] | None = None, cap: int = DEFAULT_CAP):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if n < 1:
            raise FieldError("extension degree must be positive")
        if p**n > cap:
            raise FieldError(f"field size {p}^{n} = {p**n} exceeds cap {cap}")
        if modulus is None:
            modulus = smallest_irreducible(p, n)
        elif len(modulus) != n + 1 or modulus[-1] != 1 or not is_irreducible_fp(list(modulus), p):
            raise FieldError(f"modulus {modulus} is not monic irreducible of degree {n}")
        self.p = p
        self.n = n
        self.modulus = tuple(modulus)
        self.q = p**n
        self._build_tables()

    # -- construction ------------------------------------------------------

    def _digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.n):
            x, d = divmod(x, self.p)
            out.append(d)
        return out

    def _undigits(self, ds) -> int:
        x = 0
        for d in reversed(list(ds)):
            x = x * self.p + d
        return x

    def _mul_slow(self, a: int, b: int) -> int:
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.n)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        return self._undigits(_fp_mod(prod, list(self.modulus), self.p) + [0] * self.n)

    def _build_tables(self) -> None:
        q, p = self.q, self.p
        order = q - 1
        if q == 2:
            self.gen = 1
            powers = [1]
        else:
            for g in range(2, q):
                powers = [1]
                x = g
                while x != 1:
                    powers.append(x)
                    x = self._mul_slow(x, g)
                if len(powers) == order:
                    self.gen = g
                    break
            else:  # pragma: no cover
                raise FieldError("no primitive element found")
        exp = powers + powers
        log = [-1] * q
        for i, x in enumerate(powers):
            log[x] = i
        self._exp = exp
        self._log = log
        self.exp_table = np.array(exp, dtype=np.int64)
        self.log_table = np.array(log, dtype=np.int64)
        # exponent of -1 in the cyclic group
        self._neg_shift = 0 if p == 2 else order // 2
        if p != 2:
            zech = [-1] * order
            for i, x in enumerate(powers):
                y = x - x % p + (x % p + 1) % p
                zech[i] = log[y] if y else -1
            self._zech = zech
            self.zech_table = np.array(zech, dtype=np.int64)
        # rank of each element in low-degree-first lexicographic order of coefficients
        keys = sorted(range(q), key=lambda x: self._digits(x))
        lex = [0] * q
        for rank, x in enumerate(keys):
            lex[x] = rank
        self.lexkey = lex

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, FieldCtx) and (self.p, self.n, self.modulus) == (other.p, other.n, other.modulus)

    def __hash__(self):
        return hash((self.p, self.n, self.modulus))

    def __repr__(self):
        return f"FieldCtx(F_{self.q}, modulus={format_fp_poly(self.modulus)})"

    # -- scalar arithmetic on codes ---------------------------------------

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def from_int(self, k: int) -> int:
        """Image of the integer k in the prime subfield."""
        return k % self.p

    def coeffs(self, x: int) -> tuple[int, ...]:
        return tuple(self._digits(x))

    def from_coeffs(self, cs) -> int:
        cs = [c % self.p for c in cs]
        if len(cs) > self.n:
            cs = _fp_mod(cs, list(self.modulus), self.p)
        return self._undigits(list(cs) + [0] * (self.n - len(cs)))

    def add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log[a]
        z = self._zech[(self._log[b] - la) % (self.q - 1)]
        return 0 if z < 0 else self._exp[la + z]

    def neg(self, a: int) -> int:
        if self.p == 2 or a == 0:
            return a
        return self._exp[self._log[a] + self._neg_shift]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def sum(self, xs) -> int:
        s = 0
        for x in xs:
            s = self.add(s, x)
        return s

    def dot(self, xs, ys) -> int:
        s = 0
        for x, y in zip(xs, ys):
            if x and y:
                s = self.add(s, self._exp[self._log[x] + self._log[y]])
        return s

    def frob(self, x: int, power: int = 1) -> int:
        """x ** (p ** power)."""
        if x == 0:
            return 0
        e = pow(self.p, power, self.q - 1) if self.q > 2 else 0
        return self._exp[(self._log[x] * e) % (self.q - 1)]

    def sqrt_p(self, x: int) -> int:
        """The unique p-th root of x (Frobenius is bijective)."""
        return self.frob(x, self.n - 1)

    # -- vectorized arithmetic on int64 arrays ----------------------------

    @property
    def add_table(self) -> np.ndarray | None:
        """Flat q*q addition table for small odd-characteristic fields."""
        if self.p == 2 or self.q > TABLE_LIMIT:
            return None
        tab = self.__dict__.get("_add_table")
        if tab is None:
            x = np.arange(self.q, dtype=np.int64)
            a, b = x[:, None], x[None, :]
            tab = np.zeros((self.q, self.q), dtype=np.int64)
            scale = 1
            for _ in range(self.n):
                tab += ((a // scale % self.p + b // scale % self.p) % self.p) * scale
                scale *= self.p
            tab = tab.ravel()
            self.__dict__["_add_table"] = tab
        return tab

    def vadd(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        tab = self.add_table
        if tab is not None:
            return tab[a * self.q + b]
        a, b = np.broadcast_arrays(a, b)
        la = self.log_table[a]
        lb = self.log_table[b]
        z = self.zech_table[(lb - la) % (self.q - 1)]
        out = np.where(z < 0, 0, self.exp_table[np.clip(la + z, 0, None)])
        out = np.where(a == 0, b, out)
        return np.where(b == 0, a, out)

    def vneg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a
        return np.where(a == 0, 0, self.exp_table[self.log_table[a] + self._neg_shift])

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    @property
    def mul_table(self) -> np.ndarray | None:
        if self.q > TABLE_LIMIT:
            return None
        tab = self.__dict__.get("_mul_table")
        if tab is None:
            la = self.log_table
            s = la[:, None] + la[None, :]
            tab = np.where((la[:, None] < 0) | (la[None, :] < 0), 0, self.exp_table[np.clip(s, 0, None)]).ravel()
            self.__dict__["_mul_table"] = tab
        return tab

    def vmul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        tab = self.mul_table
        if tab is not None:
            return tab[a * self.q + b]
        a, b = np.broadcast_arrays(a, b)
        out = self.exp_table[self.log_table[a] + self.log_table[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def vscale(self, c: int, a):
        """Multiply an array by one scalar."""
        a = np.asarray(a, dtype=np.int64)
        if c == 0:
            return np.zeros_like(a)
        if c == 1:
            return a
        lc = self._log[c]
        return np.where(a == 0, 0, self.exp_table[self.log_table[a] + lc])

    def vinv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        return self.exp_table[(self.q - 1 - self.log_table[a]) % (self.q - 1)]

    def vfrob(self, a, power: int = 1):
        a = np.asarray(a, dtype=np.int64)
        if self.q == 2:
            return a
        e = pow(self.p, power, self.q - 1)
        return np.where(a == 0, 0, self.exp_table[(self.log_table[a] * e) % (self.q - 1)])

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def subfield(self, m: int) -> np.ndarray:
        """Codes of the subfield F_{p^m}, sorted; empty unless m divides n."""
        if m < 1 or self.n % m:
            return np.zeros(0, dtype=np.int64)
        step = (self.q - 1) // (self.p**m - 1)
        nonzero = self.exp_table[np.arange(0, self.q - 1, step)]
        return np.sort(np.concatenate([[0], nonzero]))

    def elem(self, x) -> "FieldElem":
        if isinstance(x, FieldElem):
            return x
        return FieldElem(self, int(x))

    def element(self, coeffs) -> "FieldElem":
        return FieldElem(self, self.from_coeffs(coeffs))

    @property
    def t(self) -> "FieldElem":
        """The class of the indeterminate t (the modulus root)."""
        return self.element([0, 1])


@functools.lru_cache(maxsize=None)
def _cached_field(p: int, n: int) -> FieldCtx:
    return FieldCtx(p, n, cap=p**n)


def make_field(p: int, n: int, cap: int = DEFAULT_CAP) -> FieldCtx:
    """F_{p^n} presented by the lexicographically smallest irreducible modulus.

    Results are cached, so the same (p, n) returns the same context object.
    """
    if not is_prime(p):
        raise FieldError(f"characteristic {p} is not prime")
    if n < 1:
        raise FieldError("extension degree must be positive")
    if p**n > cap:
        raise FieldError(f"field size {p}^{n} = {p**n} exceeds cap {cap}")
    return _cached_field(p, n)


def format_fp_poly(coeffs, var: str = "t") -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}{mono}")
    return "+".join(terms) or "0"


@dataclass(frozen=True)
class FieldElem:
    """An element of a FieldCtx, with operator overloading.

    The geometry code works on raw integer codes for speed; this wrapper is
    the public face for interactive use and tests.
    """

    ctx: FieldCtx
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.ctx.q:
            raise FieldError(f"code {self.value} out of range for F_{self.ctx.q}")

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.ctx.coeffs(self.value)

    def _other(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.ctx != self.ctx:
                raise FieldError("operands belong to different fields")
            return other.value
        if isinstance(other, int):
            return self.ctx.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return FieldElem(self.ctx, self.ctx.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return FieldElem(self.ctx, self.ctx.sub(self.value, o))

    def __rsub__(self, other):
        o = self._other(other)
        return FieldElem(self.ctx, self.ctx.sub(o, self.value))

    def __neg__(self):
        return FieldElem(self.ctx, self.ctx.neg(self.value))

    def __mul__(self, other):
        o = self._other(other)
        return FieldElem(self.ctx, self.ctx.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return FieldElem(self.ctx, self.ctx.div(self.value, o))

    def __rtruediv__(self, other):
        o = self._other(other)
        return FieldElem(self.ctx, self.ctx.div(o, self.value))

    def __pow__(self, e: int):
        return FieldElem(self.ctx, self.ctx.pow(self.value, e))

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.ctx == other.ctx and self.value == other.value
        if isinstance(other, int):
            return self.value == self.ctx.from_int(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.ctx, self.value))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"FieldElem(F_{self.ctx.q}: {format_fp_poly(self.coeffs)})"


# ---------------------------------------------------------------------------
# Frobenius and subfields
# ---------------------------------------------------------------------------


def _prime_power_exponent(q: int, p: int) -> int | None:
    m = 0
    while q % p == 0:
        q //= p
        m += 1
    return m if q == 1 and m > 0 else None


def frobenius(x: FieldElem, q: int) -> FieldElem:
    """x ** q, the generator of Gal(F_{p^n} / F_q)."""
    m = _prime_power_exponent(q, x.ctx.p)
    if m is None:
        raise FieldError(f"{q} is not a power of the characteristic {x.ctx.p}")
    return FieldElem(x.ctx, x.ctx.frob(x.value, m))


def in_subfield(x: FieldElem, m: int) -> bool:
    """True iff x lies in F_{p^m}, i.e. x ** (p ** m) == x."""
    if m < 1 or x.ctx.n % m:
        return False
    return x.ctx.frob(x.value, m) == x.value


def min_subfield_degree(ctx: FieldCtx, values) -> int:
    """Smallest m | n with every code in ``values`` inside F_{p^m}."""
    for m in sorted(d for d in range(1, ctx.n + 1) if ctx.n % d == 0):
        if all(ctx.frob(v, m) == v for v in values):
            return m
    return ctx.n  # pragma: no cover


# ---------------------------------------------------------------------------
# Univariate polynomials over a FieldCtx (lists of codes, ascending)
# ---------------------------------------------------------------------------


def poly_trim(a) -> list[int]:
    a = [int(x) for x in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_eval(ctx: FieldCtx, a, x: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = ctx.add(ctx.mul(acc, x), c)
    return acc


def poly_veval(ctx: FieldCtx, a, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    acc = np.zeros_like(xs)
    for c in reversed(a):
        acc = ctx.vadd(ctx.vmul(acc, xs), c)
    return acc


def poly_add(ctx, a, b) -> list[int]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return poly_trim(ctx.add(x, y) for x, y in zip(a, b))


def poly_sub(ctx, a, b) -> list[int]:
    return poly_add(ctx, a, [ctx.neg(y) for y in b])


def poly_mul(ctx, a, b) -> list[int]:
    a, b = poly_trim(a), poly_trim(b)
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = ctx.add(out[i + j], ctx.mul(x, y))
    return poly_trim(out)


def poly_divmod(ctx, a, b) -> tuple[list[int], list[int]]:
    a, b = poly_trim(a), poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = ctx.inv(b[-1])
    quot = [0] * max(len(a) - len(b) + 1, 0)
    rem = list(a)
    while len(rem) >= len(b):
        c = ctx.mul(rem[-1], inv_lead)
        shift = len(rem) - len(b)
        quot[shift] = c
        for i, bi in enumerate(b):
            rem[shift + i] = ctx.sub(rem[shift + i], ctx.mul(c, bi))
        rem = poly_trim(rem)
    return poly_trim(quot), rem


def poly_monic(ctx, a) -> list[int]:
    a = poly_trim(a)
    if not a:
        return a
    inv_lead = ctx.inv(a[-1])
    return [ctx.mul(c, inv_lead) for c in a]


def poly_gcd(ctx, a, b) -> list[int]:
    """Monic gcd; gcd(0, 0) = 0."""
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(ctx, a, b)[1]
    return poly_monic(ctx, a)


def poly_deriv(ctx, a) -> list[int]:
    return poly_trim(ctx.mul(ctx.from_int(i), c) for i, c in enumerate(a) if i)


def poly_pth_root(ctx, a) -> list[int]:
    """For a polynomial in t^p, the polynomial whose p-th power it is."""
    p = ctx.p
    return poly_trim(ctx.sqrt_p(a[i]) for i in range(0, len(a), p))


def poly_radical(ctx, a) -> list[int]:
    """Product of the distinct monic irreducible factors of a (over the closure: distinct roots)."""
    a = poly_monic(ctx, a)
    if len(a) <= 1:
        return [1] if a else []
    d = poly_deriv(ctx, a)
    if not d:
        return poly_radical(ctx, poly_pth_root(ctx, a))
    h = poly_gcd(ctx, a, d)
    w = poly_divmod(ctx, a, h)[0]  # squarefree
    r = poly_radical(ctx, h)
    g = poly_gcd(ctx, w, r)
    return poly_monic(ctx, poly_divmod(ctx, poly_mul(ctx, w, r), g)[0])


def distinct_root_count(ctx, a) -> int:
    """Number of distinct roots of a nonzero polynomial over the algebraic closure."""
    a = poly_trim(a)
    if not a:
        raise FieldError("zero polynomial has infinitely many roots")
    return len(poly_radical(ctx, a)) - 1


def roots(ctx: FieldCtx, f, multiplicity: bool = False):
    """Roots of f in the field by exhaustive evaluation.

    Returns a sorted list of codes, or of (code, multiplicity) pairs.
    """
    f = poly_trim(f)
    if not f:
        raise FieldError("roots of the zero polynomial")
    if len(f) == 1:
        return []
    if len(f) == 2:
        r = [ctx.neg(ctx.div(f[0], f[1]))]
    else:
        vals = poly_veval(ctx, f, ctx.elements())
        r = [int(x) for x in np.flatnonzero(vals == 0)]
    if not multiplicity:
        return r
    out = []
    for x in r:
        m, g = 0, f
        while True:
            quot, rem = poly_divmod(ctx, g, [ctx.neg(x), 1])
            if rem:
                break
            m += 1
            g = quot
        out.append((x, m))
    return out


def fp_poly_roots(ctx: FieldCtx, def_poly) -> list[int]:
    """Roots in ctx of a polynomial with prime-field coefficients."""
    return roots(ctx, [ctx.from_int(c) for c in def_poly])


def embed_generator(def_poly, big: FieldCtx) -> FieldElem:
    """Canonical root of a prime-field polynomial in ``big``.

    Among all roots, the one whose coefficient vector is lexicographically
    smallest (low degree first) is returned.
    """
    rs = fp_poly_roots(big, def_poly)
    if not rs:
        raise FieldError(f"{format_fp_poly(def_poly)} has no root in F_{big.q}")
    return FieldElem(big, min(rs, key=lambda x: big.lexkey[x]))


def embedding_table(small: FieldCtx, big: FieldCtx, image_of_t: int) -> np.ndarray:
    """Table of the ring map F_p[t]/(small.modulus) -> big sending t to image_of_t."""
    if small.p != big.p:
        raise FieldError("fields of different characteristic")
    powers = [1]
    for _ in range(small.n - 1):
        powers.append(big.mul(powers[-1], image_of_t))
    digits = np.zeros(small.q, dtype=np.int64)
    out = np.zeros(small.q, dtype=np.int64)
    codes = np.arange(small.q, dtype=np.int64)
    for i in range(small.n):
        digits = (codes // small.p**i) % small.p
        out = big.vadd(out, big.vmul(digits, powers[i]))
    return out


def compatible_embedding(small: FieldCtx, big: FieldCtx, constraints=()) -> np.ndarray:
    """A subfield embedding small -> big as a lookup table.

    ``constraints`` is a sequence of (code in small, code in big) pairs the map
    must respect.  Among the admissible roots of small.modulus the
    lexicographically smallest is used, so the result is deterministic.
    """
    if big.n % small.n:
        raise FieldError(f"F_{small.q} is not a subfield of F_{big.q}")
    for rho in sorted(fp_poly_roots(big, small.modulus), key=lambda x: big.lexkey[x]):
        table = embedding_table(small, big, rho)
        if all(int(table[a]) == b for a, b in constraints):
            return table
    raise FieldError("no embedding satisfies the constraints")
