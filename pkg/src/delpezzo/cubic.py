"""Cubic surfaces over F_q and the machinery shared with other surfaces.

A surface is stored over its base field F_q = F_{p^r}: each coefficient is a
polynomial (list of F_p values) in a generator alpha of F_q, a root of
``gen_poly``.  For any extension degree k the surface can be viewed over
F_{q^k}; there alpha is mapped to the canonical root of ``gen_poly`` (see
``ffield.embed_generator``).  Embeddings F_{q^a} -> F_{q^b} are chosen
compatibly with that choice, so points and lines found in different fields
can be compared after embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ffield import (
    DEFAULT_CAP,
    FieldCtx,
    FieldError,
    compatible_embedding,
    embed_generator,
    is_irreducible_fp,
    is_prime,
    make_field,
)
from .projgeom import (
    HomForm,
    LineP3,
    null_space,
    PlaneP3,
    ProjPoint,
    gradient,
    monomials,
    normalize,
    partials,
    proj_points_array,
    restrict_form,
)

# Default smoothness scan: every k <= 6 with q^k within this size.
SMOOTH_SCAN_SIZE = 128


class SurfaceError(ValueError):
    """Malformed surface data."""


class SingularSurfaceError(ValueError):
    """The surface has a singular point (or contains a plane)."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class OutOfRangeError(ValueError):
    """The requested computation needs a field beyond the configured cap."""


@dataclass(frozen=True)
class BaseSurface:
    """Surface cut out by one or more forms over F_q.

    ``blocks`` holds one tuple per form of (exponent tuple, value) records,
    where value is the coefficient as a polynomial in alpha (F_p entries,
    ascending).
    """

    p: int
    r: int
    blocks: tuple
    gen_poly: tuple[int, ...] | None = None
    name: str = field(default="", compare=False)

    NVARS = 4
    DEGREE = 3
    NFORMS = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise SurfaceError(f"p = {self.p} is not prime")
        if self.r < 1:
            raise SurfaceError("r must be positive")
        if self.r > 1:
            if self.gen_poly is None:
                raise SurfaceError("gen_poly is required when r > 1")
            gp = [c % self.p for c in self.gen_poly]
            if len(gp) != self.r + 1 or gp[-1] == 0 or not is_irreducible_fp(gp, self.p):
                raise SurfaceError(f"gen_poly {self.gen_poly} is not irreducible of degree {self.r}")
        if len(self.blocks) != self.NFORMS:
            raise SurfaceError(f"expected {self.NFORMS} form(s), got {len(self.blocks)}")
        valid = set(monomials(self.NVARS, self.DEGREE))
        for b, block in enumerate(self.blocks):
            seen = set()
            for idx, (exps, value) in enumerate(block):
                if tuple(exps) not in valid:
                    raise SurfaceError(f"form {b}, record {idx}: invalid exponent tuple {exps}")
                if tuple(exps) in seen:
                    raise SurfaceError(f"form {b}, record {idx}: duplicate exponent tuple {exps}")
                seen.add(tuple(exps))
                if len(value) > self.r:
                    raise SurfaceError(f"form {b}, record {idx}: value longer than r = {self.r}")
            if not any(any(c % self.p for c in v) for _, v in block):
                raise SurfaceError(f"form {b} is identically zero")

    @classmethod
    def from_terms(cls, p: int, forms, r: int = 1, gen_poly=None, name: str = ""):
        """Build from dicts {exponent tuple: value}, value an int (r = 1) or F_p list."""
        if isinstance(forms, dict):
            forms = [forms]
        blocks = []
        for terms in forms:
            block = []
            for e, v in terms.items():
                v = (v,) if isinstance(v, int) else tuple(v)
                block.append((tuple(e), tuple(c % p for c in v)))
            blocks.append(tuple(sorted(block, reverse=True)))
        gp = tuple(gen_poly) if gen_poly is not None else None
        return cls(p, r, tuple(blocks), gp, name)

    @property
    def q(self) -> int:
        return self.p**self.r

    # -- fields ------------------------------------------------------------

    def field(self, k: int, cap: int = DEFAULT_CAP) -> FieldCtx:
        """F_{q^k}."""
        try:
            return make_field(self.p, self.r * k, cap)
        except FieldError as exc:
            raise OutOfRangeError(str(exc)) from exc

    def level(self, fld: FieldCtx) -> int:
        """The k with fld = F_{q^k}."""
        if fld.p != self.p or fld.n % self.r:
            raise FieldError(f"F_{fld.q} does not contain F_{self.q}")
        return fld.n // self.r

    def alpha(self, k: int) -> int:
        """Image of the base generator in F_{q^k}."""
        return _alpha(self, k)

    def forms(self, k: int) -> list[HomForm]:
        return _forms(self, k)

    def embedding(self, a: int, b: int) -> np.ndarray:
        """Lookup table F_{q^a} -> F_{q^b} compatible with alpha, for a | b."""
        return _embedding(self, a, b)

    def frob_exp(self) -> int:
        """Exponent m with x -> x^(p^m) equal to the q-power Frobenius."""
        return self.r


@lru_cache(maxsize=None)
def _alpha(S: BaseSurface, k: int) -> int:
    fld = S.field(k, cap=max(DEFAULT_CAP, S.q**k))
    if S.r == 1:
        return 1
    return embed_generator(S.gen_poly, fld).value


@lru_cache(maxsize=None)
def _forms(S: BaseSurface, k: int) -> list[HomForm]:
    fld = S.field(k, cap=max(DEFAULT_CAP, S.q**k))
    a = S.alpha(k)
    powers = [1]
    for _ in range(S.r - 1):
        powers.append(fld.mul(powers[-1], a))
    out = []
    for block in S.blocks:
        terms = {}
        for exps, value in block:
            c = fld.sum(fld.mul(fld.from_int(v), pw) for v, pw in zip(value, powers))
            if c:
                terms[tuple(exps)] = c
        out.append(HomForm.from_dict(fld, S.NVARS, S.DEGREE, terms))
    return out


@lru_cache(maxsize=None)
def _embedding(S: BaseSurface, a: int, b: int) -> np.ndarray:
    if b % a:
        raise FieldError(f"F_{{q^{a}}} is not a subfield of F_{{q^{b}}}")
    small = S.field(a, cap=max(DEFAULT_CAP, S.q**a))
    big = S.field(b, cap=max(DEFAULT_CAP, S.q**b))
    if a == b:
        return np.arange(small.q, dtype=np.int64)
    constraints = [(S.alpha(a), S.alpha(b))] if S.r > 1 else []
    return compatible_embedding(small, big, constraints)


def embed_coords(S: BaseSurface, coords, a: int, b: int):
    """Map coordinates (array or tuple) from F_{q^a} into F_{q^b}."""
    table = S.embedding(a, b)
    if isinstance(coords, np.ndarray):
        return table[coords]
    return tuple(int(table[x]) for x in coords)


class CubicSurface(BaseSurface):
    """A cubic surface in P^3 over F_q."""

    NVARS = 4
    DEGREE = 3
    NFORMS = 1

    def form(self, k: int = 1) -> HomForm:
        return self.forms(k)[0]


# ---------------------------------------------------------------------------
# Point enumeration
# ---------------------------------------------------------------------------


@dataclass
class SurfacePointSet:
    k: int
    field: FieldCtx
    coords: np.ndarray  # (N, nvars) canonical points, sorted

    @property
    def points(self) -> list[ProjPoint]:
        return [ProjPoint(tuple(int(x) for x in row), self.field) for row in self.coords]

    def __len__(self):
        return len(self.coords)

    def __contains__(self, pt) -> bool:
        pt = np.asarray(tuple(pt), dtype=np.int64)
        return bool(np.any(np.all(self.coords == pt, axis=1)))


def split_last_variable(form: HomForm) -> list[HomForm]:
    """Forms c_d in the first n-1 variables with form = sum_d c_d * x_last^d."""
    n, deg = form.nvars, form.degree
    out = []
    for d in range(deg + 1):
        terms = {e[:-1]: c for e, c in form.terms().items() if e[-1] == d}
        out.append(HomForm.from_dict(form.field, n - 1, deg - d, terms))
    return out


def sort_points(arr: np.ndarray) -> np.ndarray:
    if len(arr) == 0:
        return arr
    order = np.lexsort(arr.T[::-1])
    return arr[order]


def hypersurface_points(form: HomForm) -> np.ndarray:
    """All points of {form = 0} in P^{n-1}(F), by solving for the last coordinate.

    Every point with (x_0..x_{n-2}) != 0 is (P, t) with P a canonical point
    of P^{n-2} and t in F; the remaining point is (0, ..., 0, 1).
    """
    fld = form.field
    base = proj_points_array(form.nvars - 2, fld)
    cs = [c.veval(base) for c in split_last_variable(form)]
    found = []
    for t in range(fld.q):
        acc = cs[-1]
        for c in reversed(cs[:-1]):
            acc = fld.vadd(fld.vscale(t, acc), c)
        hit = np.flatnonzero(acc == 0)
        if len(hit):
            block = np.concatenate([base[hit], np.full((len(hit), 1), t, dtype=np.int64)], axis=1)
            found.append(block)
    last = (0,) * (form.nvars - 1) + (1,)
    if form(last) == 0:
        found.append(np.array([last], dtype=np.int64))
    if not found:
        return np.zeros((0, form.nvars), dtype=np.int64)
    return sort_points(np.concatenate(found))


def surface_points(S: CubicSurface, k: int = 1, cap: int = DEFAULT_CAP) -> SurfacePointSet:
    return _surface_points(S, k, cap)


@lru_cache(maxsize=64)
def _surface_points(S: CubicSurface, k: int, cap: int) -> SurfacePointSet:
    fld = S.field(k, cap)
    pts = hypersurface_points(S.form(k))
    return SurfacePointSet(k, fld, pts)


def singular_points(S: CubicSurface, k: int = 1, cap: int = DEFAULT_CAP) -> list[ProjPoint]:
    """Points of S(F_{q^k}) where every partial derivative vanishes."""
    pts = surface_points(S, k, cap)
    if not len(pts):
        return []
    bad = np.ones(len(pts), dtype=bool)
    for d in partials(S.form(k)):
        bad &= d.veval(pts.coords) == 0
    return [ProjPoint(tuple(int(x) for x in row), pts.field) for row in pts.coords[bad]]


def smoothness_scan(S: BaseSurface, max_size: int = SMOOTH_SCAN_SIZE, max_k: int = 6):
    """Degrees k scanned and the first singular point found (or None)."""
    scanned = []
    finder = singular_points if isinstance(S, CubicSurface) else None
    if finder is None:
        from .dp4 import dp4_singular_points as finder
    for k in range(1, max_k + 1):
        if S.q**k > max_size and k > 1:
            break
        scanned.append(k)
        sing = finder(S, k)
        if sing:
            return scanned, sing[0]
    return scanned, None


def require_smooth(S: BaseSurface, max_size: int = SMOOTH_SCAN_SIZE) -> list[int]:
    scanned, bad = smoothness_scan(S, max_size)
    if bad is not None:
        raise SingularSurfaceError(f"singular point {bad} over F_{bad.field.q}", bad)
    return scanned


# ---------------------------------------------------------------------------
# Tangent planes and tangent sections
# ---------------------------------------------------------------------------


def _point_level(S: BaseSurface, pt: ProjPoint) -> int:
    k = S.level(pt.field)
    if S.field(k, cap=max(DEFAULT_CAP, pt.field.q)) != pt.field:
        raise FieldError("point is not over a field of this surface")
    return k


def tangent_plane(S: CubicSurface, pt: ProjPoint) -> PlaneP3:
    k = _point_level(S, pt)
    f = S.form(k)
    if f(pt.coords) != 0:
        raise SurfaceError(f"{pt} is not on the surface")
    grad = gradient(f, pt.coords, _partials(f))
    if not any(grad):
        raise SingularSurfaceError(f"{pt} is a singular point", pt)
    return PlaneP3.of(pt.field, grad)


@lru_cache(maxsize=256)
def _partials(f: HomForm) -> list[HomForm]:
    return partials(f)


def plane_coordinates(basis, pt) -> tuple[int, ...]:
    """Coordinates of a point of the plane in its RREF basis."""
    pivots = [next(j for j, x in enumerate(row) if x) for row in basis]
    return tuple(pt[j] for j in pivots)


@dataclass(frozen=True)
class TangentCubic:
    plane: PlaneP3
    basis: tuple
    form: HomForm  # ternary cubic in plane coordinates
    point: tuple[int, ...]  # plane coordinates of the tangency point


def tangent_cubic(S: CubicSurface, pt: ProjPoint) -> TangentCubic:
    plane = tangent_plane(S, pt)
    basis = plane.basis()
    k = S.level(pt.field)
    curve = restrict_form(S.form(k), plane)
    return TangentCubic(plane, basis, curve, normalize(pt.field, plane_coordinates(basis, pt.coords)))


def is_singular_at(form: HomForm, pt) -> bool:
    return form(pt) == 0 and not any(gradient(form, pt))


def linear_factors(form: HomForm) -> list[tuple[int, ...]]:
    """Lines (as normalized covectors) dividing a ternary form, by exhaustive search."""
    fld = form.field
    out = []
    for cov in proj_points_array(2, fld):
        cov = tuple(int(x) for x in cov)
        rows = null_space(fld, [cov])
        if restrict_form(form, LineP3(rows, fld)).is_zero():
            out.append(cov)
    return out


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // math.gcd(out, x)
    return out
