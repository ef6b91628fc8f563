import itertools
import random

import numpy as np
import pytest

from delpezzo.cli import sample_forms
from delpezzo.cubic import OutOfRangeError, SurfaceError, require_smooth, surface_points
from delpezzo.ffield import make_field
from delpezzo.lines import lines_over
from delpezzo.param import (
    INDETERMINATE,
    ParamError,
    at_level,
    conic_bundle,
    fiber_analysis,
    fiber_form,
    find_kollar_line,
    geometric_fiber_size,
    nodal_param,
    phi,
    phi_bar,
    preimage_counts,
    third_point,
)
from delpezzo.projgeom import HomForm, LineP3, ProjPoint, lin_comb, normalize, null_space, proj_points_array, rank


def points_on_line(fld, f, a, b):
    """Brute force: the points of line(a, b) over fld on f = 0."""
    out = []
    for u in proj_points_array(1, fld):
        v = normalize(fld, lin_comb(fld, tuple(int(x) for x in u), (a, b)))
        if f(v) == 0:
            out.append(v)
    return out


@pytest.fixture(scope="module")
def eq1_data(surfaces, configs):
    S = surfaces["eq1"]
    x = ProjPoint((1, 0, 0, 0), S.field(1))
    return find_kollar_line(S, configs["eq1"], x, 2)


# -- third point ------------------------------------------------------------


def test_third_point_example(surfaces):
    S = surfaces["eq2"]
    F = S.field(1)
    z = third_point(S, ProjPoint((1, 0, 0, 0), F), ProjPoint((0, 1, 0, 0), F))
    assert z.coords == (1, 1, 0, 0)


def test_third_point_against_line_enumeration(surfaces):
    S = surfaces["eq1"]
    fld = S.field(3)
    f = S.form(3)
    pts = [p.coords for p in surface_points(S, 3).points]
    rng = random.Random(5)
    checked = 0
    for _ in range(400):
        a, b = rng.sample(pts, 2)
        on = points_on_line(fld, f, a, b)
        if len(on) == 3:
            (c,) = [v for v in on if v not in (a, b)]
            assert third_point(S, ProjPoint(a, fld), ProjPoint(b, fld)).coords == c
            checked += 1
    assert checked > 50


def test_third_point_is_symmetric_and_on_surface(surfaces):
    S = surfaces["eq3_alpha"]
    fld = S.field(2)
    f = S.form(2)
    pts = [p.coords for p in surface_points(S, 2).points]
    for a, b in itertools.islice(itertools.combinations(pts, 2), 300):
        try:
            c = third_point(S, ProjPoint(a, fld), ProjPoint(b, fld))
        except SurfaceError:
            # the line lies in S: every point of it is on the surface
            assert len(points_on_line(fld, f, a, b)) == fld.q + 1
            continue
        assert f(c.coords) == 0
        assert rank(fld, [a, b, c.coords]) <= 2
        assert third_point(S, ProjPoint(b, fld), ProjPoint(a, fld)) == c


def test_third_point_errors(surfaces):
    S = surfaces["eq2"]
    F = S.field(1)
    a = ProjPoint((1, 0, 0, 0), F)
    with pytest.raises(ParamError):
        third_point(S, a, a)
    off = next(tuple(int(x) for x in v) for v in proj_points_array(3, F) if S.form(1)(tuple(int(x) for x in v)))
    with pytest.raises(SurfaceError):
        third_point(S, a, ProjPoint(off, F))
    with pytest.raises(ParamError):
        third_point(S, a, ProjPoint((0, 1, 0, 0), S.field(2)))


# -- nodal curves -------------------------------------------------------------


@pytest.mark.parametrize("p", [5, 7, 11])
def test_nodal_cubic_textbook(p):
    # y^2 z = x^2 (x + z), node at (0 : 0 : 1), parameterized by (t^2 - 1 : t (t^2 - 1) : 1)
    F = make_field(p, 1)
    C = HomForm.from_dict(F, 3, 3, {(0, 2, 1): 1, (3, 0, 0): p - 1, (2, 0, 1): p - 1})
    par = nodal_param(C, (0, 0, 1))
    assert not par.cusp
    for t in range(p):
        x = (t * t - 1) % p
        expected = normalize(F, (x, t * x % p, 1)) if x else (0, 0, 1)
        assert par((1, t)) == expected
    # the map hits every point of the curve; only the two branches at t = +-1 go to the node
    curve = {tuple(int(c) for c in v) for v in proj_points_array(2, F) if C(tuple(int(c) for c in v)) == 0}
    image = [par(tuple(int(c) for c in u)) for u in proj_points_array(1, F)]
    assert set(image) == curve
    assert sorted(par.branch_directions()) == sorted([(1, 1), (1, p - 1)])
    assert image.count((0, 0, 1)) == 2
    assert len(set(image)) == len(image) - 1


def test_cuspidal_cubic():
    F = make_field(5, 1)
    # y^2 z = x^3
    C = HomForm.from_dict(F, 3, 3, {(0, 2, 1): 1, (3, 0, 0): 4})
    par = nodal_param(C, (0, 0, 1))
    assert par.cusp
    image = {par(tuple(int(c) for c in u)) for u in proj_points_array(1, F)}
    assert all(C(v) == 0 for v in image)
    assert len(image) == 6


def test_nodal_param_errors():
    F = make_field(5, 1)
    C = HomForm.from_dict(F, 3, 3, {(0, 2, 1): 1, (3, 0, 0): 4, (2, 0, 1): 4})
    with pytest.raises(ParamError):
        nodal_param(C, (1, 0, 0))  # not on the curve
    with pytest.raises(ParamError):
        nodal_param(C, (4, 0, 1))  # smooth point
    # x (y^2 z - x^2 z - x^3) ... reducible: x * (x^2 + y z) has a line through its double point
    R = HomForm.from_dict(F, 3, 3, {(3, 0, 0): 1, (1, 1, 1): 1})
    with pytest.raises(ParamError):
        nodal_param(R, (0, 0, 1))
    cone = HomForm.from_dict(F, 3, 3, {(3, 0, 0): 1, (0, 3, 0): 1})
    with pytest.raises(ParamError):
        nodal_param(cone, (0, 0, 1))
    conic = HomForm.from_dict(F, 3, 2, {(2, 0, 0): 1, (0, 1, 1): 1})
    with pytest.raises(ParamError):
        nodal_param(conic, (0, 0, 1))


# -- the third-point map on eq1 ------------------------------------------------


def test_kollar_line(eq1_data, surfaces, configs):
    d = eq1_data
    S = surfaces["eq1"]
    f2 = S.form(2)
    assert d.x.coords == (1, 0, 0, 0)
    assert d.s != d.s_conj
    assert f2(d.s.coords) == 0 and f2(d.s_conj.coords) == 0
    # s and its conjugate lie on the chosen rational line through x
    W = d.field
    x = tuple(int(c) for c in S.embedding(1, d.level)[list(d.x.coords)])
    assert rank(W, [x, d.s.coords, d.s_conj.coords]) == 2


def test_kollar_line_errors(surfaces, configs):
    S = surfaces["eq1"]
    cfg = configs["eq1"]
    with pytest.raises(ParamError):
        find_kollar_line(S, cfg, ProjPoint((1, 0, 0, 0), S.field(1)), level=3)
    with pytest.raises(ParamError):
        find_kollar_line(S, cfg, ProjPoint((1, 0, 0, 0), S.field(2)))
    with pytest.raises(SurfaceError):
        find_kollar_line(S, cfg, ProjPoint((0, 1, 0, 0), S.field(1)))


def test_indeterminacy(eq1_data, surfaces):
    ind = eq1_data.indeterminacy
    assert ind.distinct_roots == 3
    assert ind.simple
    W = eq1_data.field
    f = surfaces["eq1"].form(eq1_data.level)
    for v in ind.points:
        assert f(v) == 0
        assert rank(W, list(eq1_data.calL.basis) + [v]) == 2
    brute = sorted(points_on_line(W, f, *eq1_data.calL.basis), key=lambda v: [W.lexkey[c] for c in v])
    assert ind.points == brute


def test_phi_values_rational(eq1_data, surfaces):
    S = surfaces["eq1"]
    d = eq1_data
    emb = S.embedding(1, 2)
    rational = {tuple(int(emb[c]) for c in p.coords) for p in surface_points(S, 1).points}
    params = [tuple(int(c) for c in u) for u in proj_points_array(1, d.field)]
    values = [phi(d, u) for u in params]
    det = [v for v in values if v is not INDETERMINATE]
    assert det
    assert all(v.coords in rational for v in det)
    # the same map over F_16 agrees on the embedded parameters
    d4 = at_level(d, 4)
    e24 = S.embedding(2, 4)
    for u, v in zip(params, values):
        w = phi(d4, normalize(d4.field, tuple(int(e24[c]) for c in u)))
        if v is INDETERMINATE:
            assert w is INDETERMINATE
        else:
            assert w.coords == tuple(int(e24[c]) for c in v.coords)


def test_phi_bar_collinear(eq1_data, surfaces):
    d = eq1_data
    W = d.field
    f = surfaces["eq1"].form(d.level)
    params = [tuple(int(c) for c in u) for u in proj_points_array(1, W)]
    for u, v in itertools.product(params, repeat=2):
        z = phi_bar(d, u, v)
        if z is INDETERMINATE:
            continue
        assert f(z.coords) == 0
        assert rank(W, [d.p_s(u), d.p_s_conj(v), z.coords]) <= 2


def test_rational_fibers_against_scalar_loop(eq1_data):
    for m in (1, 2):
        d = eq1_data if m == 1 else at_level(eq1_data, 2 * m)
        params = [tuple(int(c) for c in u) for u in proj_points_array(1, d.field)]
        counts = {}
        for u, v in itertools.product(params, repeat=2):
            z = phi_bar(d, u, v)
            if z is not INDETERMINATE:
                counts[z.coords] = counts.get(z.coords, 0) + 1
        assert preimage_counts(eq1_data, m) == counts
        fa = fiber_analysis(eq1_data, m)
        assert fa.domain_size == len(params) ** 2
        assert fa.determinate == sum(counts.values())
        assert fa.image_size == len(counts)


def test_fiber_analysis_f64(eq1_data):
    fa = fiber_analysis(eq1_data, 3, geometric=True)
    assert fa.domain_size == 65**2 == 4225
    assert fa.geometric_modal_size == 6
    assert fa.geometric_max_finite <= 9
    # the only positive-dimensional fiber is over x
    assert [z.coords for z in fa.positive_dimensional] == [(1, 0, 0, 0)]


def test_geometric_fiber_bounds_rational_fiber(eq1_data):
    d = at_level(eq1_data, 4)
    counts = preimage_counts(eq1_data, 2)
    for z, c in counts.items():
        g = geometric_fiber_size(d, z)
        if g is None:
            continue
        # for fixed u the partner v is forced, so each rational pair is one parameter u
        assert c <= g
        assert len(fiber_form(d, z)) <= 7


def test_fiber_form_errors(eq1_data, surfaces):
    S = surfaces["eq1"]
    W = eq1_data.field
    off = next(tuple(int(x) for x in v) for v in proj_points_array(3, W) if S.form(2)(tuple(int(x) for x in v)))
    with pytest.raises(SurfaceError):
        fiber_form(eq1_data, off)
    with pytest.raises(OutOfRangeError):
        fiber_form(eq1_data, eq1_data.s.coords)  # F_4 has too few elements to interpolate


# -- conic bundles --------------------------------------------------------------


@pytest.mark.parametrize("name", ["eq1", "eq3_alpha"])
def test_conic_bundles_have_five_singular_fibers(surfaces, configs, name):
    S, cfg = surfaces[name], configs[name]
    for i, lo in enumerate(cfg.lines):
        cb = conic_bundle(S, lo)
        assert cb.singular_count == 5
        # all 27 lines are defined over the configuration field, so are all 5 singular planes
        assert len(cb.singular_params) == 5
        fld = cfg.field
        planes = set()
        for j in np.flatnonzero(cfg.incidence[i]):
            rows = list(lo.line.basis) + list(cfg.lines[j].line.basis)
            cov = null_space(fld, rows)
            assert len(cov) == 1
            planes.add(normalize(fld, cov[0]))
        assert len(planes) == 5
        assert planes == {fb.plane for fb in cb.fibers if fb.singular}


def test_conic_bundle_over_f5():
    # seeded smooth cubics over F_5 with rational lines
    found = 0
    for S in sample_forms("cubic", 5, 1, 60, 3):
        if S is None:
            continue
        try:
            require_smooth(S)
        except Exception:
            continue
        rational = lines_over(S, 1)
        for ln in rational:
            cb = conic_bundle(S, ln)
            assert cb.singular_count == 5
            assert len(cb.fibers) == 6
            # singular fibers over F_5 are roots of the discriminant there
            assert len(cb.singular_params) <= 5
            found += 1
        if found >= 3:
            break
    assert found >= 3


def test_conic_bundle_rejects_line_off_surface(surfaces):
    S = surfaces["eq2"]
    F = S.field(1)
    # eq2 does not vanish identically on x0 = x1 = 0
    ln = LineP3.from_rows(F, [(0, 0, 1, 0), (0, 0, 0, 1)])
    assert any(S.form(1)(v) for v in [(0, 0, 1, 0), (0, 0, 0, 1), (0, 0, 1, 1)])
    with pytest.raises(SurfaceError):
        conic_bundle(S, ln)
