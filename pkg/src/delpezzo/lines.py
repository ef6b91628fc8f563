"""The 27 lines of a smooth cubic surface over finite fields.

Lines are found in F_{q^k} for k = 1, 2, ... until all 27 appear.  Every line
meets the plane {x0 = 0}, and every line through a smooth point P lies in the
tangent plane T_P.  So it suffices to walk the points P of the plane cubic
S cap {x0 = 0} and, for each, solve for the directions d in T_P with
f(d) = 0 and P . grad f(d) = 0 (the restriction of f to the line P d is
f(P) s^3 + (d . grad f(P)) s^2 t + (P . grad f(d)) s t^2 + f(d) t^3).
Parameterizing d = u + t w along a line of T_P missing P turns both
conditions into univariate polynomials, whose common roots are the roots of
their gcd.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cubic import (
    CubicSurface,
    OutOfRangeError,
    SingularSurfaceError,
    embed_coords,
    hypersurface_points,
    lcm,
    surface_points,
)
from .ffield import DEFAULT_CAP, FieldCtx, min_subfield_degree, poly_gcd, poly_trim, roots
from .projgeom import (
    HomForm,
    LineP3,
    ProjPoint,
    gradient,
    lin_comb,
    normalize,
    null_space,
    partials,
    rank,
    restrict_form,
)

# Frobenius orders in W(E6); line degrees are cycle lengths, so 7 and 11 never occur.
WEYL_E6_ORDERS = (1, 2, 3, 4, 5, 6, 8, 9, 10, 12)
SEARCH_DEGREES = tuple(k for k in range(1, 13) if k not in (7, 11))
ECKARDT_COUNTS = {2: {1, 3, 5, 9, 13, 45}, "odd": {1, 2, 3, 4, 6, 9, 10, 18}}
# Line search always covers fields up to this size; see find_lines.
ALWAYS_SEARCH_SIZE = 729


class LineSearchError(OutOfRangeError):
    """Fewer than 27 lines found within the field cap."""


@dataclass(frozen=True)
class LineOnSurface:
    line: LineP3
    min_degree: int


@dataclass
class LineConfiguration:
    surface: CubicSurface
    field: FieldCtx
    splitting_degree: int
    lines: list[LineOnSurface]
    incidence: np.ndarray
    frobenius_perm: tuple[int, ...]
    eckardt: list = field(default_factory=list)
    searched: dict = field(default_factory=dict)  # k -> number of lines over F_{q^k}

    @property
    def min_degrees(self) -> list[int]:
        return [ln.min_degree for ln in self.lines]

    def orbits(self) -> list[tuple[int, ...]]:
        return permutation_cycles(self.frobenius_perm)


def permutation_cycles(perm) -> list[tuple[int, ...]]:
    seen = set()
    out = []
    for i in range(len(perm)):
        if i in seen:
            continue
        cyc = [i]
        seen.add(i)
        j = perm[i]
        while j != i:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        out.append(tuple(cyc))
    return out


def cycle_type(perm) -> tuple[int, ...]:
    return tuple(sorted((len(c) for c in permutation_cycles(perm)), reverse=True))


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------


def _tangent_frame(fld: FieldCtx, P, grad):
    """Vectors u, w with span(P, u, w) the tangent plane and P not on line(u, w)."""
    basis = null_space(fld, [grad])
    for u, w in itertools.combinations(basis, 2):
        if rank(fld, [P, u, w]) == 3:
            return u, w
    raise AssertionError("tangent plane basis does not contain the point")  # pragma: no cover


def lines_through_point(f: HomForm, parts, P) -> list[tuple[int, ...]]:
    """Directions d with line(P, d) contained in {f = 0}; P a smooth point of it."""
    fld = f.field
    grad = gradient(f, P, parts)
    if not any(grad):
        raise SingularSurfaceError(f"singular point {list(P)} over F_{fld.q}", ProjPoint(tuple(P), fld))
    u, w = _tangent_frame(fld, P, grad)
    uw = tuple(fld.add(a, b) for a, b in zip(u, w))
    gu, gw, guw = (gradient(f, v, parts) for v in (u, w, uw))
    fu, fw = f(u), f(w)
    g = [fu, fld.dot(w, gu), fld.dot(u, gw), fw]
    hu, hw, huw = fld.dot(P, gu), fld.dot(P, gw), fld.dot(P, guw)
    h = [hu, fld.sub(fld.sub(huw, hu), hw), hw]
    g, h = poly_trim(g), poly_trim(h)
    if not g and not h:
        raise SingularSurfaceError(f"the tangent plane at {list(P)} lies on the surface")
    out = []
    if fw == 0 and hw == 0:
        out.append(w)
    common = poly_gcd(fld, g, h)
    if len(common) > 1:
        for t in roots(fld, common):
            out.append(lin_comb(fld, (1, t), (u, w)))
    return out


def _line_candidates(f: HomForm, parts, P: np.ndarray) -> np.ndarray:
    """Mask of points of P (on f = 0) that may lie on a line of the surface.

    Vectorized form of the test in lines_through_point: with the tangent
    plane framed by u, w, a line through P exists iff the binary cubic
    g(t) = f(u + t w) and quadric h(t) = P . grad f(u + t w) share a root.
    Rows where h has degree < 2 or divides g are kept for the exact test.
    """
    fld = f.field
    n = len(P)
    G = np.stack([d.veval(P) for d in parts], axis=1)
    keep = ~G.any(axis=1)
    rows = np.arange(n)
    j = np.argmax(G != 0, axis=1)
    Gj = G[rows, j]
    inv = fld.vinv(np.where(Gj == 0, 1, Gj))
    # third basis vector of the tangent plane is dropped: an index i != j with P_i != 0
    Pmask = (P != 0) & (np.arange(4)[None, :] != j[:, None])
    m = np.argmax(Pmask, axis=1)
    U = np.zeros((n, 4), dtype=np.int64)
    W = np.zeros((n, 4), dtype=np.int64)
    rest = np.ones((n, 4), dtype=bool)
    rest[rows, j] = False
    rest[rows, m] = False
    idx = np.sort(np.argsort(~rest, axis=1, kind="stable")[:, :2], axis=1)
    a, b = idx[:, 0], idx[:, 1]
    U[rows, a] = 1
    U[rows, j] = fld.vneg(fld.vmul(G[rows, a], inv))
    W[rows, b] = 1
    W[rows, j] = fld.vneg(fld.vmul(G[rows, b], inv))
    UW = fld.vadd(U, W)

    def dot(X, Y):
        acc = np.zeros(n, dtype=np.int64)
        for i in range(4):
            acc = fld.vadd(acc, fld.vmul(X[:, i], Y[:, i]))
        return acc

    gU = np.stack([d.veval(U) for d in parts], axis=1)
    gW = np.stack([d.veval(W) for d in parts], axis=1)
    gUW = np.stack([d.veval(UW) for d in parts], axis=1)
    g0, g1, g2, g3 = f.veval(U), dot(W, gU), dot(U, gW), f.veval(W)
    h0, h2 = dot(P, gU), dot(P, gW)
    h1 = fld.vsub(fld.vsub(dot(P, gUW), h0), h2)
    keep |= h2 == 0
    hinv = fld.vinv(np.where(h2 == 0, 1, h2))
    a1, a0 = fld.vmul(h1, hinv), fld.vmul(h0, hinv)
    # g mod (t^2 + a1 t + a0) = r1 t + r0
    r1 = fld.vadd(fld.vsub(g1, fld.vmul(g2, a1)), fld.vmul(g3, fld.vsub(fld.vmul(a1, a1), a0)))
    r0 = fld.vadd(fld.vsub(g0, fld.vmul(g2, a0)), fld.vmul(g3, fld.vmul(a1, a0)))
    keep |= (r1 == 0) & (r0 == 0)
    t0 = fld.vneg(fld.vmul(r0, fld.vinv(np.where(r1 == 0, 1, r1))))
    ht0 = fld.vadd(fld.vadd(fld.vmul(t0, t0), fld.vmul(a1, t0)), a0)
    keep |= (r1 != 0) & (ht0 == 0)
    return keep


def lines_over(S: CubicSurface, k: int, cap: int = DEFAULT_CAP) -> list[LineP3]:
    """All lines of S defined over F_{q^k}, sorted canonically."""
    fld = S.field(k, cap)
    f = S.form(k)
    parts = partials(f)
    section = HomForm.from_dict(fld, 3, 3, {e[1:]: c for e, c in f.terms().items() if e[0] == 0})
    pts = hypersurface_points(section)
    P = np.concatenate([np.zeros((len(pts), 1), dtype=np.int64), pts], axis=1)
    found = {}
    for row in P[_line_candidates(f, parts, P)] if len(P) else P:
        P0 = tuple(int(x) for x in row)
        for d in lines_through_point(f, parts, P0):
            ln = LineP3.from_rows(fld, [P0, d])
            found[ln.basis] = ln
    return sorted(found.values(), key=lambda ln: ln.sort_key())


def brute_force_lines(S: CubicSurface, k: int, cap: int = 64) -> list[LineP3]:
    """Every line of P^3(F_{q^k}) on S, by walking all RREF line matrices.

    Both rows of a line's RREF basis are points of the line, so rows off the
    surface are discarded before pairing; each surviving pair is tested by
    evaluating f at four points of the line (a binary cubic vanishing at four
    points of P^1 is zero), or by full restriction over F_2.
    """
    fld = S.field(k)
    if fld.q > cap:
        raise OutOfRangeError(f"brute-force line enumeration is limited to fields of size <= {cap}")
    f = S.form(k)
    q = fld.q
    grid = np.array(list(itertools.product(range(q), repeat=2)), dtype=np.int64)
    one = np.ones(len(grid), dtype=np.int64)
    zero = np.zeros(len(grid), dtype=np.int64)
    single = np.arange(q, dtype=np.int64)
    ones1 = np.ones(q, dtype=np.int64)
    zeros1 = np.zeros(q, dtype=np.int64)
    rows1 = {
        (0, 1): np.stack([one, zero, grid[:, 0], grid[:, 1]], 1),
        (0, 2): np.stack([one, grid[:, 0], zero, grid[:, 1]], 1),
        (0, 3): np.stack([one, grid[:, 0], grid[:, 1], zero], 1),
        (1, 2): np.stack([zeros1, ones1, zeros1, single], 1),
        (1, 3): np.stack([zeros1, ones1, single, zeros1], 1),
        (2, 3): np.array([[0, 0, 1, 0]], dtype=np.int64),
    }
    rows2 = {
        (0, 1): np.stack([zero, one, grid[:, 0], grid[:, 1]], 1),
        (0, 2): np.stack([zeros1, zeros1, ones1, single], 1),
        (0, 3): np.array([[0, 0, 0, 1]], dtype=np.int64),
        (1, 2): np.stack([zeros1, zeros1, ones1, single], 1),
        (1, 3): np.array([[0, 0, 0, 1]], dtype=np.int64),
        (2, 3): np.array([[0, 0, 0, 1]], dtype=np.int64),
    }
    lam = 2 if q > 2 else None  # an element outside {0, 1}
    out = []
    for key in rows1:
        a = rows1[key][f.veval(rows1[key]) == 0]
        b = rows2[key][f.veval(rows2[key]) == 0]
        if not len(a) or not len(b):
            continue
        A = np.repeat(a, len(b), axis=0)
        B = np.tile(b, (len(a), 1))
        if lam is not None:
            ok = f.veval(fld.vadd(A, B)) == 0
            ok &= f.veval(fld.vadd(A, fld.vscale(lam, B))) == 0
            cand = np.flatnonzero(ok)
        else:
            cand = range(len(A))
        for i in cand:
            rows = (tuple(int(x) for x in A[i]), tuple(int(x) for x in B[i]))
            ln = LineP3(rows, fld)
            if lam is None and not restrict_form(f, ln).is_zero():
                continue
            out.append(ln)
    return sorted(out, key=lambda ln: ln.sort_key())


def find_lines(S: CubicSurface, cap: int = DEFAULT_CAP) -> LineConfiguration:
    """Search k = 1, 2, ... for the field over which all 27 lines are defined.

    Fields larger than ALWAYS_SEARCH_SIZE are only searched when some class of
    W(E6) matching the line counts found so far has order dividing k.
    """
    searched = {}
    pruned = []
    for k in SEARCH_DEGREES:
        if S.q**k > cap:
            break
        if S.q**k > ALWAYS_SEARCH_SIZE:
            orders = consistent_frobenius_orders(searched)
            if orders and not any(k % o == 0 for o in orders):
                pruned.append(k)
                continue
        found = lines_over(S, k, cap)
        searched[k] = len(found)
        if len(found) > 27:
            raise SingularSurfaceError(f"{len(found)} lines over F_{S.q**k}: the surface is not a smooth cubic")
        if len(found) == 27:
            return _build_configuration(S, k, found, searched)
    orders = consistent_frobenius_orders(searched)
    raise LineSearchError(
        f"splitting field exceeds search bound: only {max(searched.values(), default=0)} lines "
        f"found over fields of size <= {cap}; Frobenius orders still possible: {sorted(orders)}"
    )


def consistent_frobenius_orders(searched: dict) -> set[int]:
    """Orders of W(E6) classes whose k-th powers fix searched[k] lines for every k."""
    from .picard import conjugacy_classes

    out = set()
    for rec in conjugacy_classes():
        if all(sum(d for d in rec.cycle_type if k % d == 0) == n for k, n in searched.items()):
            out.add(rec.order)
    return out


def _build_configuration(S, K, found, searched) -> LineConfiguration:
    fld = S.field(K, cap=max(DEFAULT_CAP, S.q**K))
    lines = []
    for ln in found:
        m = min_subfield_degree(fld, [x for row in ln.basis for x in row])
        # m is a degree over F_p; the base field has degree r
        d = _degree_over_base(m, S.r)
        lines.append(LineOnSurface(ln, d))
    lines.sort(key=lambda lo: (lo.min_degree, lo.line.sort_key()))
    inc = np.zeros((27, 27), dtype=np.int64)
    for i in range(27):
        for j in range(i + 1, 27):
            inc[i, j] = inc[j, i] = incidence(lines[i], lines[j])
    cfg = LineConfiguration(S, fld, K, lines, inc, (), searched=searched)
    cfg.frobenius_perm = frobenius_permutation(cfg, S)
    cfg.eckardt = eckardt_points(cfg)
    return cfg


def _degree_over_base(m: int, r: int) -> int:
    """Smallest d with the subfield F_{p^m} contained in F_{q^d} = F_{p^(r d)}."""
    return lcm(m, r) // r


# ---------------------------------------------------------------------------
# Configuration data
# ---------------------------------------------------------------------------


def incidence(l1: LineOnSurface | LineP3, l2: LineOnSurface | LineP3) -> int:
    a = l1.line if isinstance(l1, LineOnSurface) else l1
    b = l2.line if isinstance(l2, LineOnSurface) else l2
    if a.basis == b.basis:
        raise ValueError("incidence of a line with itself")
    return 1 if rank(a.field, list(a.basis) + list(b.basis)) == 3 else 0


def intersection_point(a: LineP3, b: LineP3) -> tuple[int, ...]:
    fld = a.field
    # x a1 + y b1 = z a2 + w b2: kernel of the 4x4 matrix with those columns
    cols = [a.basis[0], a.basis[1], [fld.neg(x) for x in b.basis[0]], [fld.neg(x) for x in b.basis[1]]]
    rows = [[cols[j][i] for j in range(4)] for i in range(4)]
    ker = null_space(fld, rows, 4)
    if len(ker) != 1:
        raise ValueError("lines do not meet in a single point")
    x, y = ker[0][0], ker[0][1]
    return normalize(fld, lin_comb(fld, (x, y), a.basis))


def eckardt_points(cfg: LineConfiguration) -> list[tuple[ProjPoint, tuple[int, ...]]]:
    """Points where three (or more) of the lines meet."""
    meets: dict = {}
    for i in range(27):
        for j in range(i + 1, 27):
            if cfg.incidence[i, j]:
                pt = intersection_point(cfg.lines[i].line, cfg.lines[j].line)
                meets.setdefault(pt, set()).update((i, j))
    out = [(ProjPoint(pt, cfg.field), tuple(sorted(idx))) for pt, idx in meets.items() if len(idx) >= 3]
    out.sort(key=lambda e: tuple(cfg.field.lexkey[x] for x in e[0].coords))
    return out


def frobenius_permutation(cfg: LineConfiguration, S: CubicSurface) -> tuple[int, ...]:
    """perm[i] = index of the image of line i under x -> x^q."""
    fld = cfg.field
    index = {lo.line.basis: i for i, lo in enumerate(cfg.lines)}
    m = S.frob_exp()
    perm = []
    for lo in cfg.lines:
        img = tuple(tuple(fld.frob(x, m) for x in row) for row in lo.line.basis)
        if img not in index:
            raise ValueError("Frobenius image of a line is not among the 27 lines")
        perm.append(index[img])
    return tuple(perm)


def has_rational_line(cfg: LineConfiguration) -> bool:
    return any(lo.min_degree == 1 for lo in cfg.lines)


def _pairwise_skew(cfg: LineConfiguration, idx) -> bool:
    return all(cfg.incidence[i, j] == 0 for i, j in itertools.combinations(idx, 2))


def is_minimal(cfg: LineConfiguration) -> tuple[bool, tuple[int, ...]]:
    """Minimality over F_q and, when not minimal, a contractible witness.

    A union of Frobenius orbits is pairwise skew only if each orbit in it is,
    so the surface is non-minimal exactly when some orbit is pairwise skew.
    The witness grows the first such orbit greedily by further orbits skew to
    everything chosen so far.
    """
    orbits = [o for o in cfg.orbits() if _pairwise_skew(cfg, o)]
    if not orbits:
        return True, ()
    chosen = list(orbits[0])
    for o in orbits[1:]:
        if all(cfg.incidence[i, j] == 0 for i in chosen for j in o):
            chosen.extend(o)
    return False, tuple(sorted(chosen))


def minimal_by_subset_search(cfg: LineConfiguration) -> bool:
    """Reference check: try every nonempty union of orbits (small orbit counts only)."""
    orbits = cfg.orbits()
    if len(orbits) > 20:
        raise ValueError("too many orbits for exhaustive subset search")
    for mask in range(1, 2 ** len(orbits)):
        idx = [i for b, o in enumerate(orbits) if mask >> b & 1 for i in o]
        if _pairwise_skew(cfg, idx):
            return False
    return True


def points_on_exceptional_locus(S: CubicSurface, cfg: LineConfiguration, k: int, cap: int = DEFAULT_CAP):
    """Split S(F_{q^k}) into points on some line and points on none."""
    pts = surface_points(S, k, cap)
    K = cfg.splitting_degree
    L = lcm(k, K)
    if S.q**L > cap:
        raise OutOfRangeError(f"common field F_{S.q**L} for k={k}, K={K} exceeds cap {cap}")
    big = S.field(L, cap)
    P = embed_coords(S, pts.coords, k, L)
    on = np.zeros(len(P), dtype=bool)
    for lo in cfg.lines:
        r1 = np.array(embed_coords(S, lo.line.basis[0], K, L), dtype=np.int64)
        r2 = np.array(embed_coords(S, lo.line.basis[1], K, L), dtype=np.int64)
        p1 = next(j for j in range(4) if r1[j])
        p2 = next(j for j in range(4) if r2[j])
        resid = big.vsub(P, big.vadd(big.vmul(P[:, p1:p1 + 1], r1[None, :]), big.vmul(P[:, p2:p2 + 1], r2[None, :])))
        on |= np.all(resid == 0, axis=1)
    fld = pts.field
    to_pts = lambda arr: [ProjPoint(tuple(int(x) for x in row), fld) for row in arr]
    return to_pts(pts.coords[on]), to_pts(pts.coords[~on])


def eckardt_count_listed(p: int, count: int) -> bool:
    """Whether an Eckardt count is in the characteristic's list of positive counts."""
    return count in ECKARDT_COUNTS[2 if p == 2 else "odd"]


def eckardt_count_allowed(p: int, count: int) -> bool:
    """Listed counts plus 0: a general cubic surface has no Eckardt point."""
    return count == 0 or eckardt_count_listed(p, count)


def descend_line(S: CubicSurface, cfg: LineConfiguration, i: int, k: int) -> LineP3:
    """Line i written over F_{q^k}; needs min_degree | k."""
    lo = cfg.lines[i]
    if k % lo.min_degree:
        raise ValueError(f"line {i} is not defined over F_{{q^{k}}}")
    K = cfg.splitting_degree
    sub = S.field(k, cap=max(DEFAULT_CAP, S.q**k))
    g = math.gcd(k, K)
    table = S.embedding(g, K)
    inv = {int(v): j for j, v in enumerate(table)}
    rows = [tuple(inv[c] for c in r) for r in lo.line.basis]
    if g != k:
        rows = [embed_coords(S, r, g, k) for r in rows]
    return LineP3.from_rows(sub, rows)
