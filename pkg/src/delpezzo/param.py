"""Third-point maps on cubic surfaces and conic bundles from lines.

For a line through a, b the restriction of a cubic form f is the binary cubic
f(a) s^3 + (b.grad f(a)) s^2 t + (a.grad f(b)) s t^2 + f(b) t^3, so when a and
b lie on the surface the residual point is (a.grad f(b)) a - (b.grad f(a)) b.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cubic import (
    CubicSurface,
    OutOfRangeError,
    SurfaceError,
    _partials,
    embed_coords,
    lcm,
    surface_points,
    tangent_cubic,
)
from .ffield import (
    DEFAULT_CAP,
    FieldCtx,
    distinct_root_count,
    poly_add,
    poly_eval,
    poly_gcd,
    poly_mul,
    poly_trim,
)
from .lines import LineConfiguration, LineOnSurface
from .projgeom import (
    HomForm,
    LineP3,
    ProjPoint,
    binary_coeffs,
    gradient,
    lin_comb,
    monomials,
    normalize,
    null_space,
    partials,
    proj_points_array,
    rank,
    restrict_form,
    rref,
    vnormalize,
)


class _Indeterminate:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INDETERMINATE"

    def __bool__(self):
        return False


INDETERMINATE = _Indeterminate()


class ParamError(ValueError):
    """Invalid input for a parameterization."""


def _dot(fld: FieldCtx, a, b) -> int:
    return fld.sum(fld.mul(x, y) for x, y in zip(a, b))


def _scaled_diff(fld, ca, a, cb, b):
    return tuple(fld.sub(fld.mul(ca, x), fld.mul(cb, y)) for x, y in zip(a, b))


def third_point(S: CubicSurface, a: ProjPoint, b: ProjPoint) -> ProjPoint:
    """The residual intersection of line(a, b) with S."""
    fld = a.field
    if b.field != fld:
        raise ParamError("points over different fields")
    f = S.form(S.level(fld))
    if a.coords == b.coords:
        raise ParamError("points coincide")
    if f(a.coords) or f(b.coords):
        raise SurfaceError("point not on the surface")
    parts = _partials(f)
    ca = _dot(fld, a.coords, gradient(f, b.coords, parts))
    cb = _dot(fld, b.coords, gradient(f, a.coords, parts))
    v = _scaled_diff(fld, ca, a.coords, cb, b.coords)
    if not any(v):
        raise SurfaceError("line is contained in the surface")
    return ProjPoint(normalize(fld, v), fld)


# ---------------------------------------------------------------------------
# Nodal parameterization
# ---------------------------------------------------------------------------


def _polar_quadric(form: HomForm, node) -> HomForm:
    """d -> node . grad C(d), a quadric in d."""
    fld = form.field
    parts = partials(form)
    terms: dict = {}
    for ni, part in zip(node, parts):
        if ni == 0:
            continue
        for e, c in part.terms().items():
            terms[e] = fld.add(terms.get(e, 0), fld.mul(ni, c))
    return HomForm.from_dict(fld, form.nvars, form.degree - 1, {e: c for e, c in terms.items() if c})


def _binary_along(form: HomForm, r1, r2) -> list[int]:
    return binary_coeffs(restrict_form(form, (r1, r2)))


@dataclass(frozen=True)
class NodalParam:
    """P^1 -> C through a double point: direction d(u) = u0 e_a + u1 e_b."""

    form: HomForm
    node: tuple[int, ...]
    polar: HomForm
    a: int
    b: int
    cusp: bool

    @property
    def field(self) -> FieldCtx:
        return self.form.field

    def direction(self, u) -> tuple[int, ...]:
        d = [0] * self.form.nvars
        d[self.a], d[self.b] = u[0], u[1]
        return tuple(d)

    def raw(self, u) -> tuple[int, ...]:
        fld = self.field
        d = self.direction(u)
        return _scaled_diff(fld, self.polar(d), d, self.form(d), self.node)

    def __call__(self, u) -> tuple[int, ...]:
        return normalize(self.field, self.raw(u))

    def varray(self, us: np.ndarray) -> np.ndarray:
        """Unnormalized images of an (N, 2) array of parameters."""
        fld = self.field
        us = np.asarray(us, dtype=np.int64)
        D = np.zeros((len(us), self.form.nvars), dtype=np.int64)
        D[:, self.a], D[:, self.b] = us[:, 0], us[:, 1]
        qv = self.polar.veval(D)
        cv = self.form.veval(D)
        node = np.array(self.node, dtype=np.int64)
        return fld.vsub(fld.vmul(D, qv[:, None]), fld.vmul(cv[:, None], node[None, :]))

    def branch_directions(self) -> list[tuple[int, ...]]:
        """Parameters over this field mapping to the node."""
        return [tuple(int(x) for x in u) for u in proj_points_array(1, self.field) if self.polar(self.direction(u)) == 0]


def nodal_param(C: HomForm, node) -> NodalParam:
    """Parameterize a ternary (or any) cubic through a double point."""
    fld = C.field
    node = normalize(fld, tuple(node))
    if C.degree != 3:
        raise ParamError("expected a cubic form")
    if C(node) != 0 or any(gradient(C, node)):
        raise ParamError("point is not a double point of the curve")
    polar = _polar_quadric(C, node)
    if polar.is_zero():
        raise ParamError("point of multiplicity 3: the curve is a cone of lines")
    piv = next(i for i, x in enumerate(node) if x)
    free = [i for i in range(C.nvars) if i != piv]
    if len(free) != 2:
        raise ParamError("nodal_param needs a plane curve")
    a, b = free
    ea = tuple(int(i == a) for i in range(C.nvars))
    eb = tuple(int(i == b) for i in range(C.nvars))
    # a line through the node lies in C iff C(d) and polar(d) share a root
    cb = _binary_along(C, ea, eb)
    qb = _binary_along(polar, ea, eb)
    if (cb[-1] == 0 and qb[-1] == 0) or len(poly_gcd(fld, cb, qb)) > 1:
        raise ParamError("curve is reducible: it contains a line through the double point")
    cusp = distinct_root_count(fld, qb) + (1 if len(poly_trim(qb)) < 3 else 0) == 1
    return NodalParam(C, node, polar, a, b, cusp)


# ---------------------------------------------------------------------------
# Third-point map data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TangentParam:
    """Nodal parameterization of the tangent section at s, in P^3 coordinates."""

    s: tuple[int, ...]
    basis: tuple  # RREF basis of the tangent plane
    curve: NodalParam

    def __call__(self, u) -> tuple[int, ...]:
        fld = self.curve.field
        return normalize(fld, lin_comb(fld, self.curve(u), self.basis))

    def varray(self, us) -> np.ndarray:
        fld = self.curve.field
        plane = self.curve.varray(us)
        B = np.array(self.basis, dtype=np.int64)
        out = np.zeros((len(plane), 4), dtype=np.int64)
        for i in range(3):
            out = fld.vadd(out, fld.vmul(plane[:, i:i + 1], B[i][None, :]))
        return out


def tangent_param(S: CubicSurface, s: ProjPoint) -> TangentParam:
    tc = tangent_cubic(S, s)
    return TangentParam(s.coords, tc.basis, nodal_param(tc.form, tc.point))


@dataclass(frozen=True)
class ThirdPointMapData:
    surface: CubicSurface
    x: ProjPoint  # over F_q
    line: LineP3  # over F_q
    level: int  # working field is F_{q^level}, level even
    s: ProjPoint
    s_conj: ProjPoint
    p_s: TangentParam
    p_s_conj: TangentParam
    calL: LineP3  # intersection of the two tangent planes

    @property
    def field(self) -> FieldCtx:
        return self.s.field

    @cached_property
    def indeterminacy(self) -> "Indeterminacy":
        return indeterminacy(self)


def _on_some_line(S: CubicSurface, cfg: LineConfiguration, coords, k: int, cap: int) -> bool:
    K = cfg.splitting_degree
    L = lcm(k, K)
    if S.q**L > cap:
        raise OutOfRangeError(f"F_{S.q**L} exceeds cap {cap}")
    big = S.field(L, cap)
    pt = embed_coords(S, coords, k, L)
    for lo in cfg.lines:
        rows = [embed_coords(S, r, K, L) for r in lo.line.basis]
        if rank(big, rows + [pt]) == 2:
            return True
    return False


def lines_through(fld: FieldCtx, x) -> list[LineP3]:
    """The lines of P^3 over fld through x, in canonical order."""
    piv = next(i for i, v in enumerate(x) if v)
    free = [i for i in range(4) if i != piv]
    out = []
    for w in proj_points_array(2, fld):
        y = [0] * 4
        for i, v in zip(free, w):
            y[i] = int(v)
        out.append(LineP3.from_rows(fld, [x, y]))
    out.sort(key=LineP3.sort_key)
    return out


def residual_quadratic(S: CubicSurface, line: LineP3, x) -> list[int] | None:
    """Coefficients [c2, c1, c0] of f(t x + y) / (root at x) as c2 t^2 + c1 t + c0.

    y is the basis row of the line not proportional to x.  None when the line
    lies in S.
    """
    fld = line.field
    f = S.form(S.level(fld))
    y = next(r for r in line.basis if rank(fld, [x, r]) == 2)
    parts = _partials(f)
    c2 = _dot(fld, y, gradient(f, x, parts))
    c1 = _dot(fld, x, gradient(f, y, parts))
    c0 = f(y)
    if not (c2 or c1 or c0):
        return None
    return [c2, c1, c0]


def find_kollar_line(
    S: CubicSurface, cfg: LineConfiguration, x: ProjPoint, level: int = 2, cap: int = DEFAULT_CAP
) -> ThirdPointMapData:
    """First line through x whose other two intersections are conjugate and off the 27 lines."""
    fld1 = S.field(1)
    if x.field != fld1:
        raise ParamError("x must be an F_q-point")
    f = S.form(1)
    if f(x.coords):
        raise SurfaceError(f"{x} is not on the surface")
    if level % 2:
        raise ParamError("working level must be even")
    fld2 = S.field(2, cap)
    emb = S.embedding(1, 2)
    for line in lines_through(fld1, x.coords):
        quad = residual_quadratic(S, line, x.coords)
        if quad is None:
            continue
        c2, c1, c0 = quad
        if c2 == 0 or any(fld1.add(fld1.add(fld1.mul(c2, fld1.mul(t, t)), fld1.mul(c1, t)), c0) == 0 for t in range(fld1.q)):
            continue
        y = next(r for r in line.basis if rank(fld1, [x.coords, r]) == 2)
        X2 = embed_coords(S, x.coords, 1, 2)
        Y2 = embed_coords(S, y, 1, 2)
        q2 = [int(emb[c]) for c in (c2, c1, c0)]
        ts = [t for t in range(fld2.q) if fld2.add(fld2.add(fld2.mul(q2[0], fld2.mul(t, t)), fld2.mul(q2[1], t)), q2[2]) == 0]
        pts = sorted((normalize(fld2, lin_comb(fld2, (t, 1), (X2, Y2))) for t in ts), key=lambda v: [fld2.lexkey[c] for c in v])
        if len(pts) != 2:
            continue
        s2 = pts[0]
        if _on_some_line(S, cfg, s2, 2, cap):
            continue
        return build_map_data(S, x, line, s2, level, cap)
    raise ParamError(f"no admissible line through {x}")


def build_map_data(S: CubicSurface, x: ProjPoint, line: LineP3, s2, level: int, cap: int = DEFAULT_CAP) -> ThirdPointMapData:
    """Assemble the map data at F_{q^level} from s over F_{q^2}."""
    W = S.field(level, cap)
    m = S.frob_exp()
    s = tuple(embed_coords(S, s2, 2, level))
    sc = tuple(W.frob(c, m) for c in s)
    if sc == s:
        raise ParamError("s is rational")
    sP, scP = ProjPoint(s, W), ProjPoint(sc, W)
    ps, psc = tangent_param(S, sP), tangent_param(S, scP)
    f = S.form(level)
    g1 = gradient(f, s)
    g2 = gradient(f, sc)
    calL = LineP3.from_rows(W, null_space(W, [g1, g2]))
    return ThirdPointMapData(S, x, line, level, sP, scP, ps, psc, calL)


def at_level(data: ThirdPointMapData, level: int, cap: int = DEFAULT_CAP) -> ThirdPointMapData:
    """The same map data over F_{q^level}."""
    S = data.surface
    W2 = S.field(2, cap)
    # recover s over F_{q^2}
    table = S.embedding(2, data.level)
    inv = {int(v): i for i, v in enumerate(table)}
    s2 = tuple(inv[c] for c in data.s.coords)
    return build_map_data(S, data.x, data.line, normalize(W2, s2), level, cap)


# ---------------------------------------------------------------------------
# The maps
# ---------------------------------------------------------------------------


def phi_bar(data: ThirdPointMapData, u, v):
    """Third point of the line through p_s(u) and p_s'(v), or INDETERMINATE."""
    W = data.field
    a = data.p_s(u)
    b = data.p_s_conj(v)
    if a == b:
        return INDETERMINATE
    f = data.surface.form(data.level)
    parts = _partials(f)
    ca = _dot(W, a, gradient(f, b, parts))
    cb = _dot(W, b, gradient(f, a, parts))
    w = _scaled_diff(W, ca, a, cb, b)
    if not any(w):
        return INDETERMINATE
    return ProjPoint(normalize(W, w), W)


def conj_param(data: ThirdPointMapData, u) -> tuple[int, ...]:
    W = data.field
    return normalize(W, tuple(W.frob(c, data.surface.frob_exp()) for c in u))


def phi(data: ThirdPointMapData, u):
    return phi_bar(data, u, conj_param(data, u))


def _vdot(W: FieldCtx, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    prod = W.vmul(A, B)
    acc = prod[..., 0]
    for i in range(1, prod.shape[-1]):
        acc = W.vadd(acc, prod[..., i])
    return acc


def phi_bar_grid(data: ThirdPointMapData):
    """phi_bar on all of P^1 x P^1 over the working field.

    Returns (params, images, determinate) with images of shape (N, N, 4);
    rows of images are normalized where determinate.
    """
    W = data.field
    f = data.surface.form(data.level)
    parts = _partials(f)
    params = proj_points_array(1, W)
    A = vnormalize(W, data.p_s.varray(params))
    B = vnormalize(W, data.p_s_conj.varray(params))
    GA = np.stack([p.veval(A) for p in parts], axis=1)
    GB = np.stack([p.veval(B) for p in parts], axis=1)
    ca = _vdot(W, A[:, None, :], GB[None, :, :])  # a . grad f(b)
    cb = _vdot(W, B[None, :, :], GA[:, None, :])  # b . grad f(a)
    out = W.vsub(W.vmul(ca[..., None], A[:, None, :]), W.vmul(cb[..., None], B[None, :, :]))
    same = np.all(A[:, None, :] == B[None, :, :], axis=-1)
    det = np.any(out != 0, axis=-1) & ~same
    flat = out.reshape(-1, 4)
    norm = flat.copy()
    norm[det.ravel()] = vnormalize(W, flat[det.ravel()])
    return params, norm.reshape(out.shape), det


@dataclass(frozen=True)
class FiberAnalysis:
    level: int
    domain_size: int
    determinate: int
    image_size: int
    histogram: dict  # rational fiber size -> number of image points
    modal_size: int
    max_size: int
    # fiber sizes over the closure for every point of S(F_{q^level});
    # None counts points whose fiber is a curve
    geometric_histogram: dict | None = None
    geometric_modal_size: int | None = None
    geometric_max_finite: int | None = None
    positive_dimensional: tuple = ()


def _mode(hist: dict) -> int:
    return min(hist, key=lambda size: (-hist[size], size)) if hist else 0


def fiber_analysis(data: ThirdPointMapData, m: int, cap: int = DEFAULT_CAP, geometric: bool = False) -> FiberAnalysis:
    """Fiber sizes of phi_bar over F_{(q^2)^m}.

    The rational histogram groups the ((q^2)^m + 1)^2 parameter pairs by
    image.  With geometric=True every point z of S(F_{(q^2)^m}) also gets the
    number of parameters over the closure mapping to it.
    """
    S = data.surface
    if S.q ** (2 * m) > cap:
        raise OutOfRangeError(f"F_{S.q ** (2 * m)} exceeds cap {cap}")
    d = data if data.level == 2 * m else at_level(data, 2 * m, cap)
    params, images, det = phi_bar_grid(d)
    pts = images[det]
    _, counts = np.unique(pts, axis=0, return_counts=True)
    hist = Counter(int(c) for c in counts)
    extra = {}
    if geometric:
        ghist: Counter = Counter()
        curves = []
        for z in surface_points(S, d.level, cap).points:
            size = geometric_fiber_size(d, z.coords)
            ghist[size] += 1
            if size is None:
                curves.append(z)
        finite = {k: v for k, v in ghist.items() if k is not None}
        extra = dict(
            geometric_histogram=dict(sorted(ghist.items(), key=lambda kv: (kv[0] is None, kv[0] or 0))),
            geometric_modal_size=_mode(finite),
            geometric_max_finite=max(finite) if finite else 0,
            positive_dimensional=tuple(curves),
        )
    return FiberAnalysis(
        level=2 * m,
        domain_size=len(params) ** 2,
        determinate=int(det.sum()),
        image_size=len(counts),
        histogram=dict(sorted(hist.items())),
        modal_size=_mode(hist),
        max_size=max(hist) if hist else 0,
        **extra,
    )


def preimage_counts(data: ThirdPointMapData, m: int, cap: int = DEFAULT_CAP) -> dict:
    """Map each image point of phi_bar over F_{(q^2)^m} to its fiber size."""
    d = data if data.level == 2 * m else at_level(data, 2 * m, cap)
    _, images, det = phi_bar_grid(d)
    pts, counts = np.unique(images[det], axis=0, return_counts=True)
    return {tuple(int(x) for x in p): int(c) for p, c in zip(pts, counts)}


def fiber_form(data: ThirdPointMapData, z) -> list[int]:
    """G_z(t) with G_z(t) = 0 iff (p_s(1, t), b) maps to z for some b on C_s'.

    The partner of a = p_s(u) is forced to be the residual point of the line
    (z, a), so the condition is that this point lies on the tangent plane at
    s'.  G_z has degree at most 6 in t; the coefficient of t^6 is the value
    at u = (0, 1).  Returned ascending; empty when z has a positive-dimensional
    fiber.
    """
    W = data.field
    f = data.surface.form(data.level)
    z = tuple(z)
    if f(z):
        raise SurfaceError("z is not on the surface")
    if W.q < 7:
        raise OutOfRangeError("need at least 7 field elements to interpolate")
    parts = _partials(f)
    grad_sc = gradient(f, data.s_conj.coords, parts)
    grad_z = gradient(f, z, parts)

    def value(u):
        a = lin_comb(W, data.p_s.curve.raw(u), data.p_s.basis)
        b = _scaled_diff(W, _dot(W, z, gradient(f, a, parts)), z, _dot(W, a, grad_z), a)
        return _dot(W, grad_sc, b)

    ts = list(range(7))
    poly = _interpolate(W, ts, [value((1, t)) for t in ts])
    top = value((0, 1))
    if len(poly) == 7 and poly[6] != top or len(poly) < 7 and top:
        raise AssertionError("fiber form has degree above 6")
    return poly


def geometric_fiber_size(data: ThirdPointMapData, z) -> int | None:
    """Number of parameters u over the closure in the fiber over z (None if infinite)."""
    poly = fiber_form(data, z)
    if not poly:
        return None
    at_inf = 1 if len(poly) < 7 else 0
    return (distinct_root_count(data.field, poly) if len(poly) > 1 else 0) + at_inf


def _interpolate(W: FieldCtx, xs, ys) -> list[int]:
    """Lagrange interpolation, ascending coefficients."""
    out: list[int] = []
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        if yi == 0:
            continue
        num = [1]
        den = 1
        for j, xj in enumerate(xs):
            if j != i:
                num = poly_mul(W, num, [W.neg(xj), 1])
                den = W.mul(den, W.sub(xi, xj))
        scale = W.mul(yi, W.inv(den))
        out = poly_add(W, out, [W.mul(scale, c) for c in num])
    return poly_trim(out)


# ---------------------------------------------------------------------------
# Indeterminacy on the line T_s cap T_s'
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Indeterminacy:
    binary: list[int]  # f restricted to calL, ascending in t
    distinct_roots: int  # over the closure, including infinity
    simple: bool
    points: list  # roots over the working field, as P^3 points


def indeterminacy(data: ThirdPointMapData) -> Indeterminacy:
    W = data.field
    f = data.surface.form(data.level)
    binary = binary_coeffs(restrict_form(f, data.calL))
    if not any(binary):
        raise SurfaceError("the line T_s . T_s' lies in the surface")
    deg = len(poly_trim(binary)) - 1
    at_inf = 1 if deg < 3 else 0
    finite = distinct_root_count(W, binary) if deg > 0 else 0
    r1, r2 = data.calL.basis
    pts = []
    for t in range(W.q):
        if poly_eval(W, binary, t) == 0:
            pts.append(normalize(W, lin_comb(W, (1, t), (r1, r2))))
    if at_inf:
        pts.append(normalize(W, r2))
    total = finite + at_inf
    # multiplicity one for all roots iff the roots are distinct and count 3
    return Indeterminacy(binary, total, total == 3, sorted(pts, key=lambda v: [W.lexkey[c] for c in v]))


# ---------------------------------------------------------------------------
# Conic bundles on a cubic surface
# ---------------------------------------------------------------------------


def _half_discriminant(fld: FieldCtx, Q: HomForm) -> int:
    """Zero iff the ternary quadric is singular; valid in every characteristic."""
    c = dict(Q.terms())
    g = lambda e: c.get(e, 0)
    a, b, cc = g((2, 0, 0)), g((0, 2, 0)), g((0, 0, 2))
    f_, e, d = g((1, 1, 0)), g((1, 0, 1)), g((0, 1, 1))
    m = fld.mul
    four = fld.from_int(4)
    terms = [m(four, m(a, m(b, cc))), m(d, m(e, f_))]
    neg = [m(a, m(d, d)), m(b, m(e, e)), m(cc, m(f_, f_))]
    return fld.sub(fld.sum(terms), fld.sum(neg))


@dataclass(frozen=True)
class ConicFiber:
    param: tuple[int, int]
    plane: tuple[int, ...]  # covector
    conic: HomForm  # residual quadric in coordinates (x, y, z) -> x r1 + y r2 + z w
    singular: bool


@dataclass(frozen=True)
class ConicBundle:
    axis: LineP3
    field: FieldCtx
    fibers: tuple
    discriminant: list[int]  # in t for planes (1 : t), ascending
    singular_count: int  # over the closure

    @property
    def singular_params(self):
        return [fb.param for fb in self.fibers if fb.singular]


def _pencil(fld: FieldCtx, axis: LineP3):
    c1, c2 = null_space(fld, axis.basis)
    # w1, w2 dual to c1, c2
    M = [list(c1), list(c2)]
    w = []
    for target in ((1, 0), (0, 1)):
        # solve [c1; c2] w = target with a particular solution
        aug = [row + [t] for row, t in zip(M, target)]
        R = rref(fld, aug)
        sol = [0] * 4
        for row in R:
            piv = next(j for j, x in enumerate(row) if x)
            sol[piv] = row[4]
        w.append(tuple(sol))
    return c1, c2, w[0], w[1]


def _fiber(S: CubicSurface, k: int, axis: LineP3, c1, c2, w1, w2, lam) -> ConicFiber:
    fld = axis.field
    l0, l1 = lam
    plane = normalize(fld, tuple(fld.add(fld.mul(l0, x), fld.mul(l1, y)) for x, y in zip(c1, c2)))
    w = tuple(fld.sub(fld.mul(l1, x), fld.mul(l0, y)) for x, y in zip(w1, w2))
    cubic = restrict_form(S.form(k), (axis.basis[0], axis.basis[1], w))
    terms = cubic.terms()
    if any(e[2] == 0 for e in terms):
        raise SurfaceError("axis is not contained in the surface")
    conic = HomForm.from_dict(fld, 3, 2, {(e[0], e[1], e[2] - 1): c for e, c in terms.items()})
    return ConicFiber(lam, plane, conic, _half_discriminant(fld, conic) == 0)


def conic_bundle(S: CubicSurface, line: LineOnSurface | LineP3, cap: int = DEFAULT_CAP) -> ConicBundle:
    """The pencil of planes through a line on S with residual conics."""
    axis = line.line if isinstance(line, LineOnSurface) else line
    fld = axis.field
    k = S.level(fld)
    f = S.form(k)
    if any(binary_coeffs(restrict_form(f, axis))):
        raise SurfaceError("line is not on the surface")
    c1, c2, w1, w2 = _pencil(fld, axis)
    fibers = tuple(
        _fiber(S, k, axis, c1, c2, w1, w2, tuple(int(x) for x in lam)) for lam in proj_points_array(1, fld)
    )
    # the discriminant is a binary quintic; interpolate it over a field with >= 6 elements
    K = k
    while S.q**K < 6:
        K *= 2
    if S.q**K > cap:
        raise OutOfRangeError("field for the discriminant exceeds cap")
    big = S.field(K, cap)
    bax = LineP3.from_rows(big, [embed_coords(S, r, k, K) for r in axis.basis])
    e = lambda v: tuple(embed_coords(S, v, k, K))
    B = (e(c1), e(c2), e(w1), e(w2))
    ts = list(range(6))
    vals = [_half_discriminant(big, _fiber(S, K, bax, *B, (1, t)).conic) for t in ts]
    disc = _interpolate(big, ts, vals)
    if not disc:
        raise SurfaceError("every fiber is singular: the surface is singular")
    at_inf = 1 if len(disc) - 1 < 5 else 0
    count = distinct_root_count(big, disc) + at_inf
    return ConicBundle(axis, fld, fibers, disc, count)
