"""Projective points, lines, planes and homogeneous forms over a FieldCtx.

Coordinates are tuples of integer field codes.  Canonical representatives:
points have first nonzero coordinate 1, lines are 2x4 matrices in reduced
row echelon form, planes are covectors with first nonzero coordinate 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ffield import FieldCtx, FieldError

ENUM_CAP = 2**24


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Linear algebra over a field
# ---------------------------------------------------------------------------


def rref(field: FieldCtx, rows) -> tuple[tuple[int, ...], ...]:
    """Reduced row echelon form; zero rows are dropped."""
    m = [list(r) for r in rows]
    ncols = len(m[0]) if m else 0
    out = []
    pivot_row = 0
    for col in range(ncols):
        piv = next((i for i in range(pivot_row, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[pivot_row], m[piv] = m[piv], m[pivot_row]
        inv = field.inv(m[pivot_row][col])
        m[pivot_row] = [field.mul(x, inv) for x in m[pivot_row]]
        for i in range(len(m)):
            if i != pivot_row and m[i][col]:
                c = m[i][col]
                m[i] = [field.sub(x, field.mul(c, y)) for x, y in zip(m[i], m[pivot_row])]
        pivot_row += 1
        if pivot_row == len(m):
            break
    for r in m[:pivot_row]:
        out.append(tuple(r))
    return tuple(out)


def rank(field: FieldCtx, rows) -> int:
    return len(rref(field, rows))


def null_space(field: FieldCtx, rows, ncols: int | None = None) -> tuple[tuple[int, ...], ...]:
    """RREF basis of {x : rows . x = 0}."""
    r = rref(field, rows)
    if ncols is None:
        ncols = len(rows[0])
    pivots = [next(j for j, x in enumerate(row) if x) for row in r]
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for fj in free:
        v = [0] * ncols
        v[fj] = 1
        for row, pj in zip(r, pivots):
            v[pj] = field.neg(row[fj])
        basis.append(v)
    return rref(field, basis) if basis else ()


def normalize(field: FieldCtx, v) -> tuple[int, ...]:
    """Scale so that the first nonzero entry is 1."""
    v = tuple(int(x) for x in v)
    lead = next((x for x in v if x), None)
    if lead is None:
        raise GeometryError("zero vector is not a projective point")
    if lead == 1:
        return v
    inv = field.inv(lead)
    return tuple(field.mul(x, inv) for x in v)


def lin_comb(field: FieldCtx, coeffs, vectors) -> tuple[int, ...]:
    n = len(vectors[0])
    out = [0] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for i in range(n):
                if v[i]:
                    out[i] = field.add(out[i], field.mul(c, v[i]))
    return tuple(out)


def vnormalize(field: FieldCtx, arr: np.ndarray) -> np.ndarray:
    """Row-wise canonical scaling of an (N, d) array of nonzero vectors."""
    arr = np.asarray(arr, dtype=np.int64)
    lead_idx = np.argmax(arr != 0, axis=1)
    lead = arr[np.arange(len(arr)), lead_idx]
    if np.any(lead == 0):
        raise GeometryError("zero vector is not a projective point")
    inv = field.vinv(lead)
    return field.vmul(arr, inv[:, None])


# ---------------------------------------------------------------------------
# Geometric value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjPoint:
    coords: tuple[int, ...]
    field: FieldCtx

    @classmethod
    def of(cls, field: FieldCtx, coords) -> "ProjPoint":
        return cls(normalize(field, coords), field)

    @property
    def dim(self) -> int:
        return len(self.coords) - 1

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __repr__(self):
        return f"[{','.join(str(c) for c in self.coords)}]"


@dataclass(frozen=True)
class LineP3:
    """A line in P^n given by its 2-row RREF basis (n = 3 unless stated)."""

    basis: tuple[tuple[int, ...], tuple[int, ...]]
    field: FieldCtx

    @classmethod
    def from_rows(cls, field: FieldCtx, rows) -> "LineP3":
        r = rref(field, rows)
        if len(r) != 2:
            raise GeometryError(f"rows span a space of rank {len(r)}, not a line")
        return cls(r, field)

    def contains(self, pt) -> bool:
        return rank(self.field, list(self.basis) + [tuple(pt)]) == 2

    def sort_key(self) -> tuple:
        lex = self.field.lexkey
        return tuple(lex[x] for row in self.basis for x in row)

    def __repr__(self):
        return f"Line({list(self.basis[0])}, {list(self.basis[1])})"


@dataclass(frozen=True)
class PlaneP3:
    dual: tuple[int, ...]
    field: FieldCtx

    @classmethod
    def of(cls, field: FieldCtx, covector) -> "PlaneP3":
        return cls(normalize(field, covector), field)

    def basis(self) -> tuple[tuple[int, ...], ...]:
        """RREF basis of the 3-dimensional subspace cut out by the covector."""
        return null_space(self.field, [self.dual])

    def contains(self, pt) -> bool:
        return self.field.dot(self.dual, pt) == 0


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def proj_points_array(dim: int, field: FieldCtx, cap: int = ENUM_CAP) -> np.ndarray:
    """All canonical points of P^dim(F) as an (N, dim+1) array.

    Ordered by pivot position, then lexicographically by the free coordinates.
    """
    q = field.q
    count = (q ** (dim + 1) - 1) // (q - 1)
    if count > cap:
        raise GeometryError(f"|P^{dim}(F_{q})| = {count} exceeds enumeration cap {cap}")
    blocks = []
    for piv in range(dim + 1):
        nfree = dim - piv
        block = np.zeros((q**nfree, dim + 1), dtype=np.int64)
        block[:, piv] = 1
        if nfree:
            grids = np.meshgrid(*([np.arange(q)] * nfree), indexing="ij")
            for j, g in enumerate(grids):
                block[:, piv + 1 + j] = g.ravel()
        blocks.append(block)
    return np.concatenate(blocks)


def enum_points(dim: int, field: FieldCtx, cap: int = ENUM_CAP) -> list[ProjPoint]:
    if dim not in (1, 2, 3, 4):
        raise GeometryError("dimension must be 1..4")
    arr = proj_points_array(dim, field, cap)
    return [ProjPoint(tuple(int(x) for x in row), field) for row in arr]


def line_through(a: ProjPoint, b: ProjPoint) -> LineP3:
    if a.field != b.field:
        raise FieldError("points over different fields")
    if normalize(a.field, a.coords) == normalize(b.field, b.coords):
        raise GeometryError("a line needs two distinct points")
    return LineP3.from_rows(a.field, [a.coords, b.coords])


def points_on_line(line: LineP3) -> list[ProjPoint]:
    f = line.field
    r1, r2 = line.basis
    pts = [ProjPoint(normalize(f, r1), f)]
    for t in range(f.q):
        pts.append(ProjPoint(normalize(f, lin_comb(f, (t, 1), (r1, r2))), f))
    return pts


def line_points_array(field: FieldCtx, r1, r2) -> np.ndarray:
    """The q+1 points of the line spanned by r1, r2 as a normalized array."""
    t = field.elements()
    r1 = np.asarray(r1, dtype=np.int64)
    r2 = np.asarray(r2, dtype=np.int64)
    pts = field.vadd(field.vmul(t[:, None], r1[None, :]), r2[None, :])
    pts = np.concatenate([r1[None, :], pts])
    return vnormalize(field, pts)


# ---------------------------------------------------------------------------
# Homogeneous forms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of the given degree in lexicographically descending order."""
    exps = [e for e in itertools.product(range(degree + 1), repeat=nvars) if sum(e) == degree]
    return tuple(sorted(exps, reverse=True))


@dataclass(frozen=True)
class HomForm:
    nvars: int
    degree: int
    coeffs: tuple[int, ...]
    field: FieldCtx

    def __post_init__(self):
        if len(self.coeffs) != len(monomials(self.nvars, self.degree)):
            raise GeometryError(
                f"a degree-{self.degree} form in {self.nvars} variables needs "
                f"{len(monomials(self.nvars, self.degree))} coefficients, got {len(self.coeffs)}"
            )

    @classmethod
    def from_dict(cls, field: FieldCtx, nvars: int, degree: int, terms: dict) -> "HomForm":
        index = {e: i for i, e in enumerate(monomials(nvars, degree))}
        coeffs = [0] * len(index)
        for e, c in terms.items():
            e = tuple(e)
            if e not in index:
                raise GeometryError(f"exponent {e} is not a degree-{degree} monomial in {nvars} variables")
            coeffs[index[e]] = field.add(coeffs[index[e]], int(c))
        return cls(nvars, degree, tuple(coeffs), field)

    @classmethod
    def zero(cls, field: FieldCtx, nvars: int, degree: int) -> "HomForm":
        return cls(nvars, degree, (0,) * len(monomials(nvars, degree)), field)

    def terms(self) -> dict[tuple[int, ...], int]:
        return {e: c for e, c in zip(monomials(self.nvars, self.degree), self.coeffs) if c}

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __call__(self, pt) -> int:
        f = self.field
        acc = 0
        for e, c in zip(monomials(self.nvars, self.degree), self.coeffs):
            if not c:
                continue
            term = c
            for x, k in zip(pt, e):
                if k:
                    if not x:
                        term = 0
                        break
                    term = f.mul(term, f.pow(x, k))
            if term:
                acc = f.add(acc, term)
        return acc

    def veval(self, pts) -> np.ndarray:
        """Evaluate at every row of an (N, nvars) array."""
        f = self.field
        pts = np.asarray(pts, dtype=np.int64)
        powers = []
        for j in range(self.nvars):
            col = pts[:, j]
            pw = [np.ones_like(col), col]
            for _ in range(2, self.degree + 1):
                pw.append(f.vmul(pw[-1], col))
            powers.append(pw)
        acc = np.zeros(len(pts), dtype=np.int64)
        for e, c in zip(monomials(self.nvars, self.degree), self.coeffs):
            if not c:
                continue
            term = None
            for j, k in enumerate(e):
                if k:
                    term = powers[j][k] if term is None else f.vmul(term, powers[j][k])
            term = np.full(len(pts), c, dtype=np.int64) if term is None else f.vscale(c, term)
            acc = f.vadd(acc, term)
        return acc

    def __repr__(self):
        return f"HomForm({format_form(self)})"


def format_form(form: HomForm, names=None) -> str:
    if names is None:
        names = "XYZW" if form.nvars == 4 else [f"x{i}" for i in range(form.nvars)]
    parts = []
    for e, c in form.terms().items():
        mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
        coeff = "" if c == 1 else f"<{c}>"
        parts.append((coeff + ("*" if coeff and mono else "") + mono) or "1")
    return " + ".join(parts) or "0"


def partials(form: HomForm) -> list[HomForm]:
    """Formal partial derivatives (exponents reduced mod p)."""
    if form.degree < 1:
        raise GeometryError("cannot differentiate a constant form")
    f = form.field
    out = []
    for i in range(form.nvars):
        terms: dict = {}
        for e, c in form.terms().items():
            if e[i] == 0:
                continue
            k = f.from_int(e[i])
            if not k:
                continue
            ne = list(e)
            ne[i] -= 1
            terms[tuple(ne)] = f.mul(c, k)
        out.append(HomForm.from_dict(f, form.nvars, form.degree - 1, terms))
    return out


def gradient(form: HomForm, pt, parts: list[HomForm] | None = None) -> tuple[int, ...]:
    parts = parts if parts is not None else partials(form)
    return tuple(d(pt) for d in parts)


def _poly_mul_dict(field: FieldCtx, a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = field.add(out.get(e, 0), field.mul(ca, cb))
    return {e: c for e, c in out.items() if c}


def substitute(form: HomForm, matrix) -> HomForm:
    """The form in new variables y, where x_i = sum_j matrix[i][j] y_j."""
    f = form.field
    m = len(matrix[0])
    linear = []
    for row in matrix:
        lin = {}
        for j, c in enumerate(row):
            if c:
                e = [0] * m
                e[j] = 1
                lin[tuple(e)] = c
        linear.append(lin)
    total: dict = {}
    for e, c in form.terms().items():
        acc = {(0,) * m: c}
        for i, k in enumerate(e):
            for _ in range(k):
                acc = _poly_mul_dict(f, acc, linear[i])
        for ee, cc in acc.items():
            total[ee] = f.add(total.get(ee, 0), cc)
    return HomForm.from_dict(f, m, form.degree, {e: c for e, c in total.items() if c})


def restrict_form(form: HomForm, target) -> HomForm:
    """Pull a form back along a line (binary result) or plane (ternary result).

    A line with basis rows r1, r2 is parameterized as s*r1 + t*r2; a plane by
    a*v1 + b*v2 + c*v3 over its RREF basis.
    """
    if isinstance(target, LineP3):
        rows = target.basis
    elif isinstance(target, PlaneP3):
        rows = target.basis()
    else:
        rows = tuple(target)
    matrix = [[row[i] for row in rows] for i in range(form.nvars)]
    return substitute(form, matrix)


def binary_coeffs(form: HomForm) -> list[int]:
    """Coefficients of a binary form as a polynomial in t = x1/x0, ascending.

    The form c_d x0^d + ... + c_0 x1^d maps to [c_d, ..., c_0] read as
    sum c_{d-i} t^i; i.e. entry i is the coefficient of x0^(d-i) x1^i.
    """
    if form.nvars != 2:
        raise GeometryError("not a binary form")
    by_exp = dict(zip(monomials(2, form.degree), form.coeffs))
    return [by_exp[(form.degree - i, i)] for i in range(form.degree + 1)]
