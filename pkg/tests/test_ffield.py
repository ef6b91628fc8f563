import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from delpezzo.ffield import (
    FieldError,
    compatible_embedding,
    distinct_root_count,
    is_irreducible_fp,
    make_field,
    min_subfield_degree,
    poly_divmod,
    poly_gcd,
    poly_mul,
    roots,
    smallest_irreducible,
)

SMALL = [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3)]


def schoolbook_mul(p, modulus, a, b):
    """Product of coefficient lists modulo a monic polynomial, done by hand."""
    n = len(modulus) - 1
    prod = [0] * (2 * n)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for d in range(len(prod) - 1, n - 1, -1):
        c = prod[d]
        if c:
            for i in range(n + 1):
                prod[d - n + i] = (prod[d - n + i] - c * modulus[i]) % p
    return prod[:n]


@pytest.mark.parametrize("p,n", SMALL)
def test_mul_matches_polynomial_arithmetic(p, n):
    F = make_field(p, n)
    for a in range(F.q):
        for b in range(F.q):
            want = schoolbook_mul(p, F.modulus, list(F.coeffs(a)), list(F.coeffs(b)))
            assert list(F.coeffs(F.mul(a, b))) == want


@pytest.mark.parametrize("p,n", SMALL)
def test_add_is_coefficientwise(p, n):
    F = make_field(p, n)
    for a in range(F.q):
        for b in range(F.q):
            want = [(x + y) % p for x, y in zip(F.coeffs(a), F.coeffs(b))]
            assert list(F.coeffs(F.add(a, b))) == want


@pytest.mark.parametrize("p,n", SMALL)
def test_field_axioms(p, n):
    F = make_field(p, n)
    elems = range(F.q)
    for a in elems:
        assert F.add(a, F.neg(a)) == 0
        assert F.mul(a, 1) == a
        if a:
            assert F.mul(a, F.inv(a)) == 1
        for b in elems:
            assert F.add(a, b) == F.add(b, a)
            assert F.mul(a, b) == F.mul(b, a)
    for a, b, c in itertools.product(range(min(F.q, 9)), repeat=3):
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))


@pytest.mark.parametrize("p,n", SMALL)
def test_vector_ops_match_scalar(p, n):
    F = make_field(p, n)
    a, b = np.meshgrid(F.elements(), F.elements())
    a, b = a.ravel(), b.ravel()
    assert list(F.vadd(a, b)) == [F.add(x, y) for x, y in zip(a, b)]
    assert list(F.vmul(a, b)) == [F.mul(x, y) for x, y in zip(a, b)]
    assert list(F.vsub(a, b)) == [F.sub(x, y) for x, y in zip(a, b)]
    nz = F.elements()[1:]
    assert list(F.vinv(nz)) == [F.inv(x) for x in nz]


@pytest.mark.parametrize("p,n", SMALL)
def test_frobenius_fixes_prime_field_and_has_order_n(p, n):
    F = make_field(p, n)
    fixed = [a for a in range(F.q) if F.frob(a) == a]
    assert len(fixed) == p
    for a in range(F.q):
        assert F.frob(a, n) == a
        assert F.pow(a, F.q) == a


def _sympy_irreducible(coeffs, p):
    x = sympy.symbols("x")
    return sympy.Poly(list(reversed(coeffs)), x, modulus=p).is_irreducible


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (2, 4), (2, 6), (2, 12), (3, 2), (3, 3), (3, 8), (5, 2), (5, 5)])
def test_smallest_irreducible_is_lexicographically_first(p, n):
    poly = smallest_irreducible(p, n)
    assert _sympy_irreducible(list(poly), p)
    for low in itertools.product(range(p), repeat=n):
        cand = list(low) + [1]
        if tuple(cand) == poly:
            break
        assert not _sympy_irreducible(cand, p)


@pytest.mark.parametrize("p,n", [(2, 4), (2, 5), (3, 4), (5, 3)])
def test_irreducibility_against_sympy(p, n):
    for low in itertools.product(range(p), repeat=n):
        cand = list(low) + [1]
        assert is_irreducible_fp(cand, p) == _sympy_irreducible(cand, p)


def test_irreducibility_against_root_count():
    # degree 2 and 3 polynomials are irreducible iff they have no root
    for p in (2, 3, 5):
        for deg in (2, 3):
            for tail in itertools.product(range(p), repeat=deg):
                f = list(tail) + [1]
                has_root = any(sum(c * x**i for i, c in enumerate(f)) % p == 0 for x in range(p))
                assert is_irreducible_fp(f, p) == (not has_root)


@pytest.mark.parametrize("small,big", [((2, 1), (2, 2)), ((2, 2), (2, 4)), ((2, 3), (2, 6)), ((2, 2), (2, 6)), ((3, 1), (3, 2))])
def test_embeddings_are_ring_maps(small, big):
    S, B = make_field(*small), make_field(*big)
    e = compatible_embedding(S, B)
    assert len(set(int(x) for x in e)) == S.q
    for a in range(S.q):
        for b in range(S.q):
            assert e[S.add(a, b)] == B.add(int(e[a]), int(e[b]))
            assert e[S.mul(a, b)] == B.mul(int(e[a]), int(e[b]))


def test_embedding_tower_commutes():
    F4, F16, F64, F4096 = (make_field(2, n) for n in (2, 4, 6, 12))
    e_4_64 = compatible_embedding(F4, F64)
    e_64_4096 = compatible_embedding(F64, F4096)
    e_4_4096 = compatible_embedding(F4, F4096, [(a, int(e_64_4096[e_4_64[a]])) for a in range(4)])
    for a in range(4):
        assert e_4_4096[a] == e_64_4096[e_4_64[a]]


def test_min_subfield_degree():
    F = make_field(2, 6)
    for a in range(F.q):
        m = min_subfield_degree(F, [a])
        assert F.frob(a, m) == a
        assert all(F.frob(a, d) != a for d in range(1, m) if 6 % d == 0)


def test_cap_is_enforced():
    with pytest.raises(FieldError):
        make_field(2, 14, cap=8192)
    with pytest.raises(FieldError):
        make_field(4, 1)


def test_roots_and_distinct_root_count():
    F = make_field(2, 4)
    for r1, r2, r3 in itertools.product(range(F.q), repeat=3):
        if (r1 + r2 + r3) % 7:
            continue
        f = poly_mul(F, poly_mul(F, [F.neg(r1), 1], [F.neg(r2), 1]), [F.neg(r3), 1])
        assert roots(F, f) == sorted({r1, r2, r3})
        assert distinct_root_count(F, f) == len({r1, r2, r3})


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 26), min_size=1, max_size=6), st.lists(st.integers(0, 26), min_size=1, max_size=5))
def test_poly_divmod_identity(a, b):
    F = make_field(3, 3)
    if not any(b):
        return
    q, r = poly_divmod(F, a, b)
    back = poly_mul(F, q, b)
    n = max(len(back), len(r))
    back = back + [0] * (n - len(back))
    rr = r + [0] * (n - len(r))
    total = [F.add(x, y) for x, y in zip(back, rr)]
    a2 = list(a) + [0] * (len(total) - len(a))
    while total and total[-1] == 0:
        total.pop()
    while a2 and a2[-1] == 0:
        a2.pop()
    assert total == a2


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 15), min_size=2, max_size=5), st.lists(st.integers(0, 15), min_size=2, max_size=5))
def test_gcd_divides_both(a, b):
    F = make_field(2, 4)
    if not any(a) or not any(b):
        return
    g = poly_gcd(F, a, b)
    assert not any(poly_divmod(F, a, g)[1])
    assert not any(poly_divmod(F, b, g)[1])


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63), st.integers(1, 63))
def test_field_elem_operators(a, b, c):
    F = make_field(2, 6)
    x, y, z = F.elem(a), F.elem(b), F.elem(c)
    assert (x + y) * z == x * z + y * z
    assert (x * z) / z == x
    assert x - y + y == x
