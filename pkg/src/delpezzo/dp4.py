"""Del Pezzo surfaces of degree 4: two quadrics in P^4.

Points are found by solving the pair of quadrics for the last coordinate over
every point of P^3.  Lines are found as for cubics: every line meets the
hyperplane {x0 = 0}, and the lines through a point P of the surface lie in
its tangent plane T_P, so for each P in S cap {x0 = 0} we solve for the
directions d in T_P on both quadrics.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cubic import (
    BaseSurface,
    OutOfRangeError,
    SingularSurfaceError,
    SurfaceError,
    SurfacePointSet,
    sort_points,
    split_last_variable,
)
from .ffield import DEFAULT_CAP, FieldCtx, min_subfield_degree, poly_gcd, poly_trim, roots
from .lines import ALWAYS_SEARCH_SIZE, LineOnSurface, LineSearchError, cycle_type, permutation_cycles
from .projgeom import (
    HomForm,
    LineP3,
    ProjPoint,
    gradient,
    lin_comb,
    normalize,
    null_space,
    partials,
    proj_points_array,
    rank,
    rref,
)

# Frobenius orders in W(D5); the splitting degree of the 16 lines is one of these.
DP4_SEARCH_DEGREES = (1, 2, 3, 4, 5, 6, 8, 12)
CHUNK = 1 << 20


class DP4Surface(BaseSurface):
    """Intersection of two quadrics in P^4 over F_q."""

    NVARS = 5
    DEGREE = 2
    NFORMS = 2

    def __post_init__(self):
        super().__post_init__()
        fs = self.forms(1)
        if rank(fs[0].field, [fs[0].coeffs, fs[1].coeffs]) < 2:
            raise SurfaceError("the two quadrics are linearly dependent")


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


def _proj_chunks(dim: int, fld: FieldCtx, chunk: int = CHUNK):
    """proj_points_array(dim, fld) in blocks of at most about `chunk` rows."""
    q = fld.q
    for piv in range(dim + 1):
        nfree = dim - piv
        total = q**nfree
        step = max(1, chunk)
        for start in range(0, total, step):
            idx = np.arange(start, min(total, start + step), dtype=np.int64)
            block = np.zeros((len(idx), dim + 1), dtype=np.int64)
            block[:, piv] = 1
            rem = idx.copy()
            for j in range(nfree - 1, -1, -1):
                block[:, piv + 1 + j] = rem % q
                rem //= q
            yield block


def _split_two(form: HomForm):
    """Coefficients of a quadric in the last two variables s, t.

    Q = A t^2 + (b0(y) + b1 s) t + (c0(y) + c1(y) s + c2 s^2), with y the
    remaining variables.  Returns (A, b0, b1, c0, c1, c2) where b0, c0, c1
    are forms in y and the rest are constants.
    """
    fld, n = form.field, form.nvars
    parts: dict = {}
    for e, c in form.terms().items():
        parts.setdefault((e[-2], e[-1]), {})[e[:-2]] = c

    def sub(es, et, deg):
        return HomForm.from_dict(fld, n - 2, deg, parts.get((es, et), {}))

    const = lambda es, et: parts.get((es, et), {}).get((0,) * (n - 2), 0)
    return const(0, 2), sub(0, 1, 1), const(1, 1), sub(0, 0, 2), sub(1, 0, 1), const(2, 0)


def _vpoly_mul(fld: FieldCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise product of polynomials stored as (N, da) and (N, db) arrays."""
    out = np.zeros((a.shape[0], a.shape[1] + b.shape[1] - 1), dtype=np.int64)
    for i in range(a.shape[1]):
        for j in range(b.shape[1]):
            out[:, i + j] = fld.vadd(out[:, i + j], fld.vmul(a[:, i], b[:, j]))
    return out


def _vpoly_lin(fld: FieldCtx, terms) -> np.ndarray:
    """Sum of c * poly over (c, poly) pairs, padding to a common degree."""
    width = max(p.shape[1] for _, p in terms)
    out = np.zeros((terms[0][1].shape[0], width), dtype=np.int64)
    for c, p in terms:
        out[:, : p.shape[1]] = fld.vadd(out[:, : p.shape[1]], fld.vmul(c, p))
    return out


def _vpoly_eval_grid(fld: FieldCtx, poly: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Values of each row polynomial at every x: shape (N, len(xs))."""
    acc = np.repeat(poly[:, -1:], len(xs), axis=1)
    for i in range(poly.shape[1] - 2, -1, -1):
        acc = fld.vadd(fld.vmul(acc, xs[None, :]), poly[:, i:i + 1])
    return acc


def _vpoly_eval(fld: FieldCtx, poly: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row i of poly evaluated at x[i]."""
    acc = poly[:, -1]
    for i in range(poly.shape[1] - 2, -1, -1):
        acc = fld.vadd(fld.vmul(acc, x), poly[:, i])
    return acc


def _pair_points_on_base(fld: FieldCtx, split1, split2, base: np.ndarray, chunk: int) -> list[np.ndarray]:
    """Common zeros (y, s, t) of two quadrics for y over the rows of base.

    Eliminating t^2 gives L(s) t + M(s) = 0, so wherever L(s) != 0 the point
    is t = -M/L and must make the resultant R(s) vanish.  Pairs with
    L(s) = M(s) = 0 are solved by scanning t.
    """
    N = len(base)
    ones = np.ones(N, dtype=np.int64)

    def arrays(sp):
        A, b0, b1, c0, c1, c2 = sp
        B = np.stack([b0.veval(base), b1 * ones], axis=1)
        C = np.stack([c0.veval(base), c1.veval(base), c2 * ones], axis=1)
        return A, B, C

    (A1, B1, C1), (A2, B2, C2) = arrays(split1), arrays(split2)
    if A1 == 0 and A2 != 0:
        (A1, B1, C1), (A2, B2, C2) = (A2, B2, C2), (A1, B1, C1)
    if A1:
        L = _vpoly_lin(fld, [(A1, B2), (fld.neg(A2), B1)])
        M = _vpoly_lin(fld, [(A1, C2), (fld.neg(A2), C1)])
        R = _vpoly_lin(
            fld,
            [(A1, _vpoly_mul(fld, M, M)), (fld.neg(1), _vpoly_mul(fld, B1, _vpoly_mul(fld, M, L))), (1, _vpoly_mul(fld, C1, _vpoly_mul(fld, L, L)))],
        )
        fallback = (A1, B1, C1)
    else:
        L, M = B1, C1
        R = _vpoly_lin(fld, [(fld.neg(1), _vpoly_mul(fld, B2, M)), (1, _vpoly_mul(fld, C2, L))])
        fallback = (0, B2, C2)
    xs = np.arange(fld.q, dtype=np.int64)
    out = []
    step = max(1, chunk // fld.q)
    for start in range(0, N, step):
        sl = slice(start, min(N, start + step))
        vals = _vpoly_eval_grid(fld, R[sl], xs)
        rows, ss = np.nonzero(vals == 0)
        rows = rows + start
        if not len(rows):
            continue
        lv = _vpoly_eval(fld, L[rows], ss)
        good = lv != 0
        rows, ss, lv = rows[good], ss[good], lv[good]
        mv = _vpoly_eval(fld, M[rows], ss)
        ts = fld.vneg(fld.vmul(mv, fld.vinv(lv)))
        out.append(np.concatenate([base[rows], ss[:, None], ts[:, None]], axis=1))
    # pairs (row, s) with L(s) = M(s) = 0
    cand = []
    lin = np.flatnonzero(L[:, 1] != 0)
    if len(lin):
        s_star = fld.vneg(fld.vmul(L[lin, 0], fld.vinv(L[lin, 1])))
        hit = _vpoly_eval(fld, M[lin], s_star) == 0
        cand.extend(zip(lin[hit].tolist(), s_star[hit].tolist()))
    for r in np.flatnonzero((L[:, 0] == 0) & (L[:, 1] == 0)).tolist():
        mv = _vpoly_eval_grid(fld, M[r:r + 1], xs)[0]
        cand.extend((r, int(s)) for s in np.flatnonzero(mv == 0))
    FA, FB, FC = fallback
    for r, s in cand:
        b = int(_vpoly_eval(fld, FB[r:r + 1], np.array([s]))[0])
        c = int(_vpoly_eval(fld, FC[r:r + 1], np.array([s]))[0])
        vals = fld.vadd(fld.vmul(fld.vadd(fld.vscale(FA, xs), b), xs), c)
        ts = np.flatnonzero(vals == 0)
        if len(ts):
            block = np.repeat(np.concatenate([base[r], [s, 0]])[None, :], len(ts), axis=0)
            block[:, -1] = ts
            out.append(block)
    return out


def complete_intersection_points(forms: list[HomForm], chunk: int = CHUNK) -> np.ndarray:
    """Common zeros in P^{n-1} of two quadrics in n variables, sorted.

    Points with some of the first n-2 coordinates nonzero are (y, s, t) with
    y a canonical point of P^{n-3}; the rest form a P^1 checked directly.
    """
    fld = forms[0].field
    n = forms[0].nvars
    splits = [_split_two(f) for f in forms]
    found = []
    for base in _proj_chunks(n - 3, fld, chunk):
        found.extend(_pair_points_on_base(fld, splits[0], splits[1], base, chunk))
    tail = proj_points_array(1, fld)
    tail = np.concatenate([np.zeros((len(tail), n - 2), dtype=np.int64), tail], axis=1)
    keep = (forms[0].veval(tail) == 0) & (forms[1].veval(tail) == 0)
    found.append(tail[keep])
    pts = np.concatenate(found)
    return sort_points(pts)


def dp4_points(S: DP4Surface, k: int = 1, cap: int = DEFAULT_CAP) -> SurfacePointSet:
    return _dp4_points(S, k, cap)


@lru_cache(maxsize=64)
def _dp4_points(S: DP4Surface, k: int, cap: int) -> SurfacePointSet:
    fld = S.field(k, cap)
    return SurfacePointSet(k, fld, complete_intersection_points(S.forms(k)))


def dp4_points_full_scan(S: DP4Surface, k: int = 1, max_points: int = 2_000_000) -> SurfacePointSet:
    """Reference enumeration: evaluate both forms on all of P^4(F_{q^k})."""
    fld = S.field(k)
    count = (fld.q**5 - 1) // (fld.q - 1)
    if count > max_points:
        raise OutOfRangeError(f"|P^4(F_{fld.q})| = {count} is too large for a full scan")
    pts = proj_points_array(4, fld)
    f1, f2 = S.forms(k)
    keep = (f1.veval(pts) == 0) & (f2.veval(pts) == 0)
    return SurfacePointSet(k, fld, sort_points(pts[keep]))


def _jacobian_rank_le1(S: DP4Surface, k: int, coords: np.ndarray) -> np.ndarray:
    fld = S.field(k)
    g1 = np.stack([d.veval(coords) for d in partials(S.forms(k)[0])], axis=1)
    g2 = np.stack([d.veval(coords) for d in partials(S.forms(k)[1])], axis=1)
    bad = np.ones(len(coords), dtype=bool)
    for i, j in itertools.combinations(range(5), 2):
        minor = fld.vsub(fld.vmul(g1[:, i], g2[:, j]), fld.vmul(g1[:, j], g2[:, i]))
        bad &= minor == 0
    return bad


def dp4_singular_points(S: DP4Surface, k: int = 1, cap: int = DEFAULT_CAP) -> list[ProjPoint]:
    """Points of S(F_{q^k}) where the 2x5 Jacobian has rank <= 1."""
    pts = dp4_points(S, k, cap)
    if not len(pts):
        return []
    bad = _jacobian_rank_le1(S, k, pts.coords)
    return [ProjPoint(tuple(int(x) for x in row), pts.field) for row in pts.coords[bad]]


# ---------------------------------------------------------------------------
# Lines
# ---------------------------------------------------------------------------


def _tangent_plane_frame(fld: FieldCtx, P, g1, g2):
    """u, w spanning, with P, the tangent plane {g1 . d = g2 . d = 0}."""
    basis = null_space(fld, [g1, g2])
    if len(basis) != 3:
        raise SingularSurfaceError(f"singular point {list(P)} over F_{fld.q}", ProjPoint(tuple(P), fld))
    for u, w in itertools.combinations(basis, 2):
        if rank(fld, [P, u, w]) == 3:
            return u, w
    raise AssertionError("tangent plane does not contain the point")  # pragma: no cover


def dp4_lines_through_point(forms, parts, P) -> list[tuple[int, ...]]:
    """Directions d with line(P, d) on both quadrics; P a smooth point."""
    fld = forms[0].field
    g1 = gradient(forms[0], P, parts[0])
    g2 = gradient(forms[1], P, parts[1])
    u, w = _tangent_plane_frame(fld, P, g1, g2)
    # Q(u + t w) = Q(u) + (w . grad Q(u)) t + Q(w) t^2
    polys = []
    for f, pa in zip(forms, parts):
        polys.append(poly_trim([f(u), fld.dot(w, gradient(f, u, pa)), f(w)]))
    if not polys[0] and not polys[1]:
        raise SingularSurfaceError(f"the tangent plane at {list(P)} lies on the surface")
    out = []
    if forms[0](w) == 0 and forms[1](w) == 0:
        out.append(w)
    common = poly_gcd(fld, polys[0], polys[1])
    if len(common) > 1:
        for t in roots(fld, common):
            out.append(lin_comb(fld, (1, t), (u, w)))
    return out


def _dp4_line_candidates(forms, parts, P: np.ndarray) -> np.ndarray:
    """Mask of points of P (on both quadrics) that may lie on a line.

    Both quadrics restrict to the tangent plane with P in their kernel, so
    with T_P = <P, u, w> a line through P is a common zero of the binary
    quadrics Q_i(a u + b w).  Rows with a vanishing resultant, or with a
    degenerate tangent space, are kept for the exact test.
    """
    fld = forms[0].field
    n, nv = P.shape
    rows = np.arange(n)
    G1 = np.stack([d.veval(P) for d in parts[0]], axis=1)
    G2 = np.stack([d.veval(P) for d in parts[1]], axis=1)

    def pivot(G):
        j = np.argmax(G != 0, axis=1)
        piv = G[rows, j]
        ok = piv != 0
        return j, fld.vmul(G, fld.vinv(np.where(ok, piv, 1))[:, None]), ok

    j1, A, ok1 = pivot(G1)
    G2 = fld.vsub(G2, fld.vmul(G2[rows, j1][:, None], A))
    j2, B, ok2 = pivot(G2)
    A = fld.vsub(A, fld.vmul(A[rows, j2][:, None], B))
    keep = ~(ok1 & ok2)
    free = np.ones((n, nv), dtype=bool)
    free[rows, j1] = False
    free[rows, j2] = False
    m = np.argmax(free & (P != 0), axis=1)
    free[rows, m] = False
    idx = np.sort(np.argsort(~free, axis=1, kind="stable")[:, :2], axis=1)

    def basis(f):
        V = np.zeros((n, nv), dtype=np.int64)
        V[rows, f] = 1
        V[rows, j1] = fld.vneg(A[rows, f])
        V[rows, j2] = fld.vneg(B[rows, f])
        return V

    U, W = basis(idx[:, 0]), basis(idx[:, 1])
    UW = fld.vadd(U, W)
    coeffs = []
    for f in forms:
        c0, c2 = f.veval(U), f.veval(W)
        coeffs.append((c0, fld.vsub(fld.vsub(f.veval(UW), c0), c2), c2))
    (a0, a1, a2), (b0, b1, b2) = coeffs
    x = fld.vsub(fld.vmul(a2, b0), fld.vmul(a0, b2))
    y = fld.vsub(fld.vmul(a2, b1), fld.vmul(a1, b2))
    z = fld.vsub(fld.vmul(a1, b0), fld.vmul(a0, b1))
    res = fld.vsub(fld.vmul(x, x), fld.vmul(y, z))
    return keep | (res == 0)


def dp4_lines_over(S: DP4Surface, k: int, cap: int = DEFAULT_CAP) -> list[LineP3]:
    """All lines of S defined over F_{q^k}, sorted canonically."""
    fld = S.field(k, cap)
    forms = S.forms(k)
    parts = [partials(f) for f in forms]
    section = [HomForm.from_dict(fld, 4, 2, {e[1:]: c for e, c in f.terms().items() if e[0] == 0}) for f in forms]
    if rank(fld, [section[0].coeffs, section[1].coeffs]) < 2:
        raise SingularSurfaceError("hyperplane section x0 = 0 is not a curve")
    found = {}
    pts = complete_intersection_points(section)
    pts = np.concatenate([np.zeros((len(pts), 1), dtype=np.int64), pts], axis=1)
    for row in pts[_dp4_line_candidates(forms, parts, pts)] if len(pts) else pts:
        P = tuple(int(x) for x in row)
        for d in dp4_lines_through_point(forms, parts, P):
            ln = LineP3.from_rows(fld, [P, d])
            found[ln.basis] = ln
    return sorted(found.values(), key=lambda ln: ln.sort_key())


def _rref_rows(n: int, q: int, pivot: int, skip: int | None) -> np.ndarray:
    """All rows with a 1 at `pivot`, zeros before it and at `skip`, free entries elsewhere."""
    free = [j for j in range(pivot + 1, n) if j != skip]
    vals = np.indices((q,) * len(free)).reshape(len(free), -1).T if free else np.zeros((1, 0), dtype=np.int64)
    rows = np.zeros((len(vals), n), dtype=np.int64)
    rows[:, pivot] = 1
    rows[:, free] = vals
    return rows


def dp4_brute_force_lines(S: DP4Surface, k: int = 1, cap: int = 64) -> list[LineP3]:
    """Reference search over every line of P^4(F_{q^k}) via its RREF basis.

    Both RREF rows are points of the line, so rows off the surface are
    dropped first.  A binary quadratic vanishing at three points of P^1 is
    zero, so a surviving pair (a, b) spans a line on a quadric exactly when
    the quadric also vanishes at a + b.
    """
    fld = S.field(k)
    if fld.q > cap:
        raise OutOfRangeError(f"brute-force line enumeration is limited to fields of size <= {cap}")
    forms = S.forms(k)
    n = S.NVARS
    on = lambda rows: np.all([f.veval(rows) == 0 for f in forms], axis=0)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            a = _rref_rows(n, fld.q, i, j)
            b = _rref_rows(n, fld.q, j, None)
            a, b = a[on(a)], b[on(b)]
            if not len(a) or not len(b):
                continue
            A = np.repeat(a, len(b), axis=0)
            B = np.tile(b, (len(a), 1))
            for idx in np.flatnonzero(on(fld.vadd(A, B))):
                rows = (tuple(int(x) for x in A[idx]), tuple(int(x) for x in B[idx]))
                out.append(LineP3(rows, fld))
    return sorted(out, key=lambda ln: ln.sort_key())


@dataclass
class DP4LineConfiguration:
    surface: DP4Surface
    field: FieldCtx
    splitting_degree: int
    lines: list[LineOnSurface]
    incidence: np.ndarray
    frobenius_perm: tuple[int, ...]
    searched: dict = field(default_factory=dict)

    @property
    def min_degrees(self) -> list[int]:
        return [lo.min_degree for lo in self.lines]

    def orbits(self) -> list[tuple[int, ...]]:
        return permutation_cycles(self.frobenius_perm)

    @property
    def frobenius_cycle_type(self) -> tuple[int, ...]:
        return cycle_type(self.frobenius_perm)


@lru_cache(maxsize=1)
def d5_cycle_types() -> dict[tuple[int, ...], int]:
    """Cycle types of W(D5) on the 16 lines, with element counts.

    W(D5) is the group of signed permutations of 5 coordinates with an even
    number of sign changes; the lines correspond to the sign vectors in
    {+1, -1}^5 with an even number of -1 entries.
    """
    weights = [v for v in itertools.product((1, -1), repeat=5) if v.count(-1) % 2 == 0]
    index = {v: i for i, v in enumerate(weights)}
    out = Counter()
    for sigma in itertools.permutations(range(5)):
        for signs in weights:
            perm = [index[tuple(signs[i] * v[sigma[i]] for i in range(5))] for v in weights]
            out[cycle_type(perm)] += 1
    return dict(out)


def consistent_dp4_orders(searched: dict) -> set[int]:
    """Orders of W(D5) elements whose k-th powers fix searched[k] lines for every k."""
    out = set()
    for ct in d5_cycle_types():
        if all(sum(d for d in ct if k % d == 0) == n for k, n in searched.items()):
            out.add(math.lcm(*ct))
    return out


def dp4_lines(S: DP4Surface, cap: int = DEFAULT_CAP) -> DP4LineConfiguration:
    """Search k = 1, 2, ... for the field over which all 16 lines are defined.

    As for cubics, fields larger than ALWAYS_SEARCH_SIZE are skipped unless
    some W(D5) element matching the line counts so far has order dividing k.
    """
    searched = {}
    for k in DP4_SEARCH_DEGREES:
        if S.q**k > cap:
            break
        if S.q**k > ALWAYS_SEARCH_SIZE:
            orders = consistent_dp4_orders(searched)
            if orders and not any(k % o == 0 for o in orders):
                continue
        found = dp4_lines_over(S, k, cap)
        searched[k] = len(found)
        if len(found) > 16:
            raise SingularSurfaceError(f"{len(found)} lines over F_{S.q**k}: not a smooth dP4")
        if len(found) == 16:
            return _build(S, k, found, searched)
    raise LineSearchError(
        f"splitting field exceeds search bound: only {max(searched.values(), default=0)} lines "
        f"found over fields of size <= {cap}; Frobenius orders still possible: "
        f"{sorted(consistent_dp4_orders(searched))}"
    )


def _build(S: DP4Surface, K: int, found, searched) -> DP4LineConfiguration:
    from .lines import _degree_over_base

    fld = S.field(K, cap=max(DEFAULT_CAP, S.q**K))
    lines = []
    for ln in found:
        m = min_subfield_degree(fld, [x for row in ln.basis for x in row])
        lines.append(LineOnSurface(ln, _degree_over_base(m, S.r)))
    lines.sort(key=lambda lo: (lo.min_degree, lo.line.sort_key()))
    n = len(lines)
    inc = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            inc[i, j] = inc[j, i] = 1 if rank(fld, list(lines[i].line.basis) + list(lines[j].line.basis)) == 3 else 0
    index = {lo.line.basis: i for i, lo in enumerate(lines)}
    m = S.frob_exp()
    perm = []
    for lo in lines:
        img = tuple(tuple(fld.frob(x, m) for x in row) for row in lo.line.basis)
        if img not in index:
            raise ValueError("Frobenius image of a line is not among the 16 lines")
        perm.append(index[img])
    return DP4LineConfiguration(S, fld, K, lines, inc, tuple(perm), searched)


# ---------------------------------------------------------------------------
# Points versus lines
# ---------------------------------------------------------------------------


def line_membership(S: DP4Surface, cfg: DP4LineConfiguration, k: int = 1, cap: int = DEFAULT_CAP) -> dict:
    """Map each point of S(F_{q^k}) to the indices of the lines through it."""
    from .cubic import embed_coords, lcm

    pts = dp4_points(S, k, cap)
    K = cfg.splitting_degree
    L = lcm(k, K)
    if S.q**L > cap:
        raise OutOfRangeError(f"common field F_{S.q**L} exceeds cap {cap}")
    big = S.field(L, cap)
    P = embed_coords(S, pts.coords, k, L)
    member = np.zeros((len(P), len(cfg.lines)), dtype=bool)
    for j, lo in enumerate(cfg.lines):
        r1 = np.array(embed_coords(S, lo.line.basis[0], K, L), dtype=np.int64)
        r2 = np.array(embed_coords(S, lo.line.basis[1], K, L), dtype=np.int64)
        p1 = next(i for i in range(5) if r1[i])
        p2 = next(i for i in range(5) if r2[i])
        resid = big.vsub(P, big.vadd(big.vmul(P[:, p1:p1 + 1], r1[None, :]), big.vmul(P[:, p2:p2 + 1], r2[None, :])))
        member[:, j] = np.all(resid == 0, axis=1)
    return {tuple(int(x) for x in row): tuple(int(j) for j in np.flatnonzero(m)) for row, m in zip(pts.coords, member)}


@dataclass(frozen=True)
class DP4ConicBundle:
    pair: tuple[int, int]  # two meeting lines spanning the base plane
    plane: tuple  # basis of span(L_i, L_j)
    singular_hyperplanes: tuple  # normalized covectors, over the splitting field
    components: tuple  # (line, line) pairs forming the singular fibers
    defined_over_base: bool
    rational_singular: int  # singular fibers that are F_q-rational hyperplanes
    smooth_rational_fiber: bool

    @property
    def singular_count(self) -> int:
        return len(self.singular_hyperplanes)


def conic_bundle_dp4(S: DP4Surface, cfg: DP4LineConfiguration, i: int, j: int) -> DP4ConicBundle:
    """Pencil of hyperplanes through the plane spanned by meeting lines i and j.

    The residual conic of such a hyperplane degenerates exactly when the
    hyperplane contains a further line, and such a line meets exactly one of
    the two base lines.
    """
    if not cfg.incidence[i, j]:
        raise ValueError("the two lines do not meet")
    fld = cfg.field
    plane = rref(fld, list(cfg.lines[i].line.basis) + list(cfg.lines[j].line.basis))
    hyper: dict = {}
    for m in range(len(cfg.lines)):
        if m in (i, j) or cfg.incidence[m, i] + cfg.incidence[m, j] != 1:
            continue
        rows = list(plane) + list(cfg.lines[m].line.basis)
        cov = null_space(fld, rows)
        if len(cov) != 1:
            raise AssertionError("line does not span a hyperplane with the base plane")
        hyper.setdefault(normalize(fld, cov[0]), []).append(m)
    comps = tuple(tuple(v) for v in hyper.values())
    if any(len(c) != 2 for c in comps):
        raise AssertionError(f"singular fibers are not line pairs: {comps}")
    # rationality over F_q
    e = S.frob_exp()
    frob = lambda v: tuple(fld.frob(x, e) for x in v)
    base_rows = null_space(fld, list(plane))  # covectors vanishing on the plane
    img = [frob(r) for r in base_rows]
    stable = rank(fld, list(base_rows) + img) == len(base_rows)
    rational = sum(1 for h in hyper if tuple(frob(h)) == h) if stable else 0
    smooth = stable and S.q + 1 > rational
    return DP4ConicBundle((i, j), plane, tuple(sorted(hyper)), comps, stable, rational, smooth)


@dataclass(frozen=True)
class DP4Classification:
    case: str  # "i", "ii" or "iii"
    membership: dict  # rational point -> line indices
    witness: tuple | None  # a point realizing the case
    bundles: tuple = ()  # conic bundles in case (iii)

    @property
    def counts(self) -> Counter:
        return Counter(len(v) for v in self.membership.values())


def classify_points(S: DP4Surface, cfg: DP4LineConfiguration, cap: int = DEFAULT_CAP) -> DP4Classification:
    member = line_membership(S, cfg, 1, cap)
    if not member:
        raise AssertionError("a dP4 over a finite field has a rational point")
    if max(len(v) for v in member.values()) > 2:
        raise AssertionError("a point lies on more than two lines")
    for case, want in (("i", 0), ("ii", 1)):
        for pt, idx in member.items():
            if len(idx) == want:
                return DP4Classification(case, member, pt)
    pt = next(iter(member))
    l1, l2 = member[pt]
    bundles = case_iii_bundles(cfg, l1, l2, S)
    return DP4Classification("iii", member, pt, bundles)


def case_iii_bundles(cfg: DP4LineConfiguration, l1: int, l2: int, S: DP4Surface):
    """Bundles from pairs (L1, L3) and (L2, L4) with L1.L3 = L2.L4 = L3.L4 = 1."""
    inc = cfg.incidence
    n = len(cfg.lines)
    for l3 in range(n):
        if l3 in (l1, l2) or not inc[l1, l3]:
            continue
        for l4 in range(n):
            if l4 in (l1, l2, l3) or not inc[l2, l4] or not inc[l3, l4]:
                continue
            return (conic_bundle_dp4(S, cfg, l1, l3), conic_bundle_dp4(S, cfg, l2, l4))
    raise AssertionError("no line pairs for the conic bundles")
