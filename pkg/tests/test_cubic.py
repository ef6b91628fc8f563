import itertools

import numpy as np
import pytest

from delpezzo.cubic import (
    CubicSurface,
    OutOfRangeError,
    SingularSurfaceError,
    SurfaceError,
    embed_coords,
    linear_factors,
    require_smooth,
    singular_points,
    smoothness_scan,
    surface_points,
    tangent_cubic,
)
from delpezzo.lines import points_on_exceptional_locus
from delpezzo.projgeom import ProjPoint, proj_points_array, rank


def brute_points(S, k):
    f = S.form(k)
    pts = proj_points_array(3, S.field(k))
    return sorted(tuple(r) for r in pts[f.veval(pts) == 0].tolist())


@pytest.mark.parametrize("name", ["eq1", "eq2", "eq3_alpha", "eq3_alpha1"])
def test_point_enumeration_matches_full_scan(surfaces, name):
    S = surfaces[name]
    for k in (1, 2, 3):
        if S.q**k > 64:
            break
        got = sorted(tuple(r) for r in surface_points(S, k).coords.tolist())
        assert got == brute_points(S, k)


def test_fixture_point_counts(surfaces):
    # exhaustive enumeration, frozen
    assert [len(surface_points(surfaces["eq1"], k)) for k in (1, 2, 3)] == [1, 9, 121]
    assert [len(surface_points(surfaces["eq2"], k)) for k in (1, 2, 3)] == [3, 21, 105]
    for name in ("eq3_alpha", "eq3_alpha1"):
        assert [len(surface_points(surfaces[name], k)) for k in (1, 2)] == [9, 225]


def test_points_embed_into_extensions(surfaces):
    S = surfaces["eq3_alpha"]
    small = surface_points(S, 1)
    big = {tuple(r) for r in surface_points(S, 3).coords.tolist()}
    for row in small.coords.tolist():
        assert tuple(embed_coords(S, row, 1, 3)) in big


def test_fixtures_are_smooth(surfaces):
    for name in ("eq1", "eq2", "eq3_alpha", "eq3_alpha1"):
        scanned, bad = smoothness_scan(surfaces[name])
        assert bad is None
        assert scanned[0] == 1


def test_fermat_in_char_three_is_singular():
    S = CubicSurface.from_terms(3, {(3, 0, 0, 0): 1, (0, 3, 0, 0): 1, (0, 0, 3, 0): 1, (0, 0, 0, 3): 1})
    assert singular_points(S, 1)
    with pytest.raises(SingularSurfaceError):
        require_smooth(S)


def test_cone_is_singular_at_vertex():
    # a cone over a smooth plane cubic: vertex [0,0,0,1]
    S = CubicSurface.from_terms(5, {(3, 0, 0, 0): 1, (0, 3, 0, 0): 1, (0, 0, 3, 0): 1})
    sing = singular_points(S, 1)
    assert ProjPoint((0, 0, 0, 1), S.field(1)) in sing


def test_singular_points_against_gradient_scan(surfaces):
    S = CubicSurface.from_terms(2, {(2, 1, 0, 0): 1, (0, 0, 3, 0): 1, (0, 1, 0, 2): 1, (1, 0, 0, 2): 1})
    for k in (1, 2):
        f = S.form(k)
        from delpezzo.projgeom import partials

        parts = partials(f)
        want = [tuple(r) for r in proj_points_array(3, S.field(k)).tolist()
                if f(r) == 0 and all(d(r) == 0 for d in parts)]
        assert sorted(p.coords for p in singular_points(S, k)) == sorted(want)


def test_malformed_surfaces_rejected():
    with pytest.raises(SurfaceError):
        CubicSurface.from_terms(4, {(3, 0, 0, 0): 1})
    with pytest.raises(SurfaceError):
        CubicSurface.from_terms(2, {(2, 0, 0, 0): 1})
    with pytest.raises(SurfaceError):
        CubicSurface.from_terms(2, {(3, 0, 0, 0): 0})
    with pytest.raises(SurfaceError):
        CubicSurface.from_terms(2, {(3, 0, 0, 0): 1}, r=2, gen_poly=(1, 0, 1))


def test_cap_gives_out_of_range(surfaces):
    with pytest.raises(OutOfRangeError):
        surfaces["eq1"].field(20)


def test_tangent_cubic_at_eckardt_point_is_three_concurrent_lines(surfaces, configs):
    S = surfaces["eq3_alpha"]
    for pt in surface_points(S, 1).points:
        tc = tangent_cubic(S, pt)
        F = tc.form.field
        # split the tangent cubic over F_{4^3}, where the lines live
        S3 = S.field(3)
        big = tangent_cubic(S, ProjPoint(tuple(embed_coords(S, pt.coords, 1, 3)), S3))
        facs = linear_factors(big.form)
        assert len(facs) == 3
        assert rank(S3, facs) == 2  # concurrent: the three covectors are dependent
        for cov in facs:
            assert S3.dot(cov, big.point) == 0


def test_tangent_cubic_off_lines_has_no_linear_factor(surfaces, configs):
    S, cfg = surfaces["eq1"], configs["eq1"]
    on, off = points_on_exceptional_locus(S, cfg, 2)
    for pt in off[:3]:
        tc = tangent_cubic(S, pt)
        assert linear_factors(tc.form) == []
        # the tangency point is singular on the plane cubic
        from delpezzo.cubic import is_singular_at

        assert is_singular_at(tc.form, tc.point)
