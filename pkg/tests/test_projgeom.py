import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delpezzo.ffield import make_field
from delpezzo.projgeom import (
    HomForm,
    LineP3,
    gradient,
    line_points_array,
    monomials,
    normalize,
    null_space,
    partials,
    points_on_line,
    proj_points_array,
    rank,
    restrict_form,
    rref,
    substitute,
)

FIELDS = [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2)]


@pytest.mark.parametrize("p,n", FIELDS)
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_projective_space_enumeration(p, n, dim):
    F = make_field(p, n)
    pts = proj_points_array(dim, F)
    assert len(pts) == (F.q ** (dim + 1) - 1) // (F.q - 1)
    assert len({tuple(r) for r in pts.tolist()}) == len(pts)
    for row in pts.tolist():
        assert normalize(F, row) == tuple(row)
    # every nonzero vector is a scalar multiple of exactly one listed point
    if F.q ** (dim + 1) <= 729:
        listed = {tuple(r) for r in pts.tolist()}
        for v in itertools.product(range(F.q), repeat=dim + 1):
            if any(v):
                assert normalize(F, v) in listed


def test_monomial_counts():
    assert len(monomials(4, 3)) == 20
    assert len(monomials(5, 2)) == 15
    assert len(monomials(3, 3)) == 10


def rand_form(F, nvars, degree, seed):
    rng = np.random.default_rng(seed)
    return HomForm.from_dict(F, nvars, degree, {e: int(rng.integers(F.q)) for e in monomials(nvars, degree)})


@pytest.mark.parametrize("p,n", [(2, 2), (3, 1), (5, 1)])
def test_scalar_and_vector_evaluation_agree(p, n):
    F = make_field(p, n)
    f = rand_form(F, 4, 3, 1)
    pts = proj_points_array(3, F)
    vals = f.veval(pts)
    assert list(vals) == [f(tuple(r)) for r in pts.tolist()]


@pytest.mark.parametrize("p,n,deg", [(2, 2, 3), (3, 1, 3), (5, 1, 3), (3, 1, 2), (2, 3, 2)])
def test_euler_identity(p, n, deg):
    F = make_field(p, n)
    f = rand_form(F, 4, deg, 2)
    parts = partials(f)
    for row in proj_points_array(3, F).tolist():
        g = gradient(f, row, parts)
        assert F.dot(row, g) == F.mul(F.from_int(deg), f(row))


@pytest.mark.parametrize("p,n", [(2, 2), (3, 1)])
def test_restriction_to_lines_and_planes(p, n):
    F = make_field(p, n)
    f = rand_form(F, 4, 3, 3)
    rng = np.random.default_rng(4)
    for _ in range(20):
        rows = rng.integers(F.q, size=(2, 4)).tolist()
        if rank(F, rows) < 2:
            continue
        line = LineP3.from_rows(F, rows)
        g = restrict_form(f, line)
        r1, r2 = line.basis
        for s, t in itertools.product(range(F.q), repeat=2):
            pt = [F.add(F.mul(s, a), F.mul(t, b)) for a, b in zip(r1, r2)]
            assert g((s, t)) == f(pt)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=12, max_size=12), st.lists(st.integers(0, 8), min_size=4, max_size=4))
def test_substitute_composes(mat, x):
    F = make_field(3, 2)
    M = [mat[4 * i:4 * i + 4] for i in range(3)] + [[1, 0, 0, 0]]
    f = rand_form(F, 4, 3, 5)
    g = substitute(f, M)
    y = [F.sum(F.mul(c, xi) for c, xi in zip(row, x)) for row in M]
    assert g(x) == f(y)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 8), min_size=5, max_size=5), min_size=1, max_size=4))
def test_null_space_and_rank(rows):
    F = make_field(3, 2)
    r = rank(F, rows)
    ns = null_space(F, rows, 5)
    assert r + len(ns) == 5
    for v in ns:
        for row in rows:
            assert F.dot(row, v) == 0
    R = rref(F, rows)
    for row in R:
        piv = next(j for j, x in enumerate(row) if x)
        assert row[piv] == 1
        assert all(other[piv] == 0 for other in R if other is not row)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 1), (2, 3)])
def test_points_on_line(p, n):
    F = make_field(p, n)
    line = LineP3.from_rows(F, [(1, 0, 1, 0), (0, 1, 0, 1)])
    pts = points_on_line(line)
    assert len(pts) == F.q + 1
    assert len({pt.coords for pt in pts}) == F.q + 1
    assert all(line.contains(pt.coords) for pt in pts)
    arr = line_points_array(F, *line.basis)
    assert {tuple(r) for r in arr.tolist()} == {pt.coords for pt in pts}
