"""Certification checks behind ``delpezzo paper-check``.

Each check function returns a list of Check records, one per claim, and never
raises on a mismatch: failures are reported, not hidden.
"""

from __future__ import annotations

import os
import time
from dataclasses import asdict, dataclass
from typing import Any

from .cli import load_fixture, load_surface, run_minimal_search, run_scan
from .cubic import CubicSurface, embed_coords, surface_points
from .dp4 import dp4_brute_force_lines, dp4_lines_over, dp4_points, dp4_points_full_scan
from .lines import brute_force_lines, find_lines, is_minimal, lines_over, points_on_exceptional_locus
from .param import INDETERMINATE, fiber_analysis, find_kollar_line, phi
from .picard import conjugacy_classes, is_square, schlafli_label, trace_frobenius, weil_check, weyl_generate
from .projgeom import ProjPoint, proj_points_array

CUBIC_FIXTURES = ("eq1", "eq2", "eq3_alpha", "eq3_alpha1")
DP4_FIXTURES = ("dp4_f2", "dp4_f3")
SCANS = (("cubic", 2, 50), ("cubic", 3, 50), ("cubic", 5, 50), ("dp4", 2, 30), ("dp4", 3, 30))
SCAN_SEED = 42
MINIMAL_SEARCH_COUNT = 10000


@dataclass(frozen=True)
class Check:
    criterion: int
    claim: str
    expected: Any
    computed: Any

    @property
    def passed(self) -> bool:
        return self.expected == self.computed

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return {k: (v if isinstance(v, (int, str, bool, type(None))) else repr(v)) for k, v in d.items()}


class Fixtures:
    """Fixture loader; reads from a directory when one is given."""

    def __init__(self, directory: str | None = None):
        self.directory = directory
        self._cache = {}

    def __getitem__(self, name: str):
        if name not in self._cache:
            if self.directory:
                self._cache[name] = load_surface(os.path.join(self.directory, f"{name}.json"))
            else:
                self._cache[name] = load_fixture(name)
        return self._cache[name]


def _rational_points(S: CubicSurface) -> list[tuple[int, ...]]:
    return [p.coords for p in surface_points(S, 1).points]


def _eckardt_set(S: CubicSurface, cfg, k: int) -> set:
    """Eckardt points lying over F_{q^k}, written over F_{q^k}."""
    K = cfg.splitting_degree
    emb = S.embedding(k, K) if K % k == 0 else None
    pts = surface_points(S, k).points
    if emb is None:
        return set()
    table = {tuple(int(emb[c]) for c in p.coords): p.coords for p in pts}
    return {table[pt.coords] for pt, _ in cfg.eckardt if pt.coords in table}


def criterion_1(fx: Fixtures) -> list[Check]:
    S = fx["eq1"]
    cfg = find_lines(S)
    pts = _rational_points(S)
    eck = _eckardt_set(S, cfg, 1)
    through = [idx for pt, idx in cfg.eckardt if pt.coords == tuple(embed_coords(S, (1, 0, 0, 0), 1, cfg.splitting_degree))]
    return [
        Check(1, "eq1: rational points", [(1, 0, 0, 0)], pts),
        Check(1, "eq1: [1,0,0,0] is Eckardt", True, (1, 0, 0, 0) in eck),
        Check(1, "eq1: lines through [1,0,0,0]", 3, len(through[0]) if through else 0),
    ]


def criterion_2(fx: Fixtures) -> list[Check]:
    S = fx["eq1"]
    cfg = find_lines(S)
    on, off = points_on_exceptional_locus(S, cfg, 3)
    return [
        Check(2, "eq1: |S(F_8)|", 121, len(surface_points(S, 3))),
        Check(2, "eq1: F_8 points off the lines", 0, len(off)),
        Check(2, "eq1: Eckardt points", 13, len(cfg.eckardt)),
        Check(2, "eq1: line min_degrees", [3] * 27, cfg.min_degrees),
    ]


def criterion_3(fx: Fixtures) -> list[Check]:
    S = fx["eq1"]
    cfg = find_lines(S)
    q = S.q
    on, off = points_on_exceptional_locus(S, cfg, 2)
    return [
        Check(3, "eq1: |S(F_4)| = q^4-2q^2+1", q**4 - 2 * q**2 + 1, len(on) + len(off)),
        Check(3, "eq1: F_4 points on lines = q^2-2q+1", q**2 - 2 * q + 1, len(on)),
        Check(3, "eq1: F_4 points off lines = q(q+2)(q-1)^2", q * (q + 2) * (q - 1) ** 2, len(off)),
    ]


def criterion_4(fx: Fixtures) -> list[Check]:
    S = fx["eq2"]
    cfg = find_lines(S)
    pts = _rational_points(S)
    eck = _eckardt_set(S, cfg, 1)
    minimal, witness = is_minimal(cfg)
    degs = cfg.min_degrees
    return [
        Check(4, "eq2: rational points", sorted([(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0)]), sorted(pts)),
        Check(4, "eq2: all rational points Eckardt", True, all(p in eck for p in pts)),
        Check(4, "eq2: lines with min_degree <= 3", 15, sum(d <= 3 for d in degs)),
        Check(4, "eq2: lines with min_degree 6", 12, sum(d == 6 for d in degs)),
        Check(4, "eq2: minimal", False, minimal),
        Check(4, "eq2: witness is nonempty", True, len(witness) > 0),
    ]


def criterion_5(fx: Fixtures) -> list[Check]:
    out = []
    for name in ("eq3_alpha", "eq3_alpha1"):
        S = fx[name]
        cfg = find_lines(S)
        pts = _rational_points(S)
        eck = _eckardt_set(S, cfg, 1)
        out += [
            Check(5, f"{name}: rational points", 9, len(pts)),
            Check(5, f"{name}: all rational points Eckardt", True, all(p in eck for p in pts)),
            Check(5, f"{name}: lines over F_4 or F_16", 0, sum(d in (1, 2) for d in cfg.min_degrees)),
            Check(5, f"{name}: lines within F_64", True, S.q**cfg.splitting_degree <= 64),
            Check(5, f"{name}: minimal", True, is_minimal(cfg)[0]),
        ]
    return out


def criterion_6(fx: Fixtures) -> list[Check]:
    traces = {"eq1": -2, "eq2": -1, "eq3_alpha": -2, "eq3_alpha1": -2}
    out = []
    for name, want in traces.items():
        S = fx[name]
        cfg = find_lines(S)
        lab = schlafli_label(cfg)
        tr = trace_frobenius(cfg, lab)
        out.append(Check(6, f"{name}: Tr F*", want, tr))
        for k in (1, 2, 3):
            ok, count, pred = weil_check(S, cfg, k, lab)
            out.append(Check(6, f"{name}: Weil k={k}", pred, count))
        if is_minimal(cfg)[0]:
            out.append(Check(6, f"{name}: minimal trace in [-2, 2]", True, -2 <= tr <= 2))
    return out


def criterion_7(fx: Fixtures = None) -> list[Check]:
    t0 = time.perf_counter()
    order = len(weyl_generate())
    classes = conjugacy_classes()
    elapsed = time.perf_counter() - t0
    orders = {rec.h1.order for rec in classes}
    structs = {rec.h1.invariant_factors for rec in classes if rec.h1.invariant_factors}
    return [
        Check(7, "W(E6) order", 51840, order),
        Check(7, "conjugacy classes", 25, len(classes)),
        Check(7, "class sizes sum to group order", 51840, sum(rec.size for rec in classes)),
        Check(7, "H^1 orders within {1,4,9}", True, orders <= {1, 4, 9}),
        Check(7, "nonzero H^1 structures", [(2, 2), (3, 3)], sorted(structs)),
        Check(7, "all H^1 orders square", True, all(is_square(o) for o in orders)),
        Check(7, "table runtime under 120 s", True, elapsed < 120),
    ]


def criterion_8(fx: Fixtures) -> list[Check]:
    S = fx["eq1"]
    cfg = find_lines(S)
    t0 = time.perf_counter()
    x = ProjPoint((1, 0, 0, 0), S.field(1))
    data = find_kollar_line(S, cfg, x)
    ind = data.indeterminacy
    fa = fiber_analysis(data, 3)
    W = data.field
    emb = S.embedding(1, data.level)
    rational = {tuple(int(emb[c]) for c in p) for p in _rational_points(S)}
    values = [phi(data, tuple(int(c) for c in u)) for u in proj_points_array(1, W)]
    values = [v for v in values if v is not INDETERMINATE]
    elapsed = time.perf_counter() - t0
    geo = fiber_analysis(data, 3, geometric=True)
    return [
        Check(8, "eq1: admissible line from [1,0,0,0]", True, data is not None),
        Check(8, "eq1: indeterminacy points on L", 3, ind.distinct_roots),
        Check(8, "eq1: indeterminacy points simple", True, ind.simple),
        Check(8, "eq1: parameter pairs over F_64", 4225, fa.domain_size),
        Check(8, "eq1: modal fiber size over F_64", 6, fa.modal_size),
        Check(8, "eq1: largest fiber over F_64 at most 9", True, fa.max_size <= 9),
        Check(8, "eq1: phi values in S(F_2)", True, bool(values) and all(v.coords in rational for v in values)),
        Check(8, "eq1: map runtime under 60 s", True, elapsed < 60),
        Check(8, "eq1: geometric modal fiber size", 6, geo.geometric_modal_size),
        Check(8, "eq1: largest finite geometric fiber at most 9", True, geo.geometric_max_finite <= 9),
    ]


def criterion_9(fx: Fixtures = None, scans=SCANS, seed: int = SCAN_SEED) -> list[Check]:
    out = []
    for kind, p, count in scans:
        res = run_scan(kind, p, 1, count, seed)
        tag = f"scan {kind} F_{p} x{count}"
        bad = [(v["sample"], v["check"]) for v in res["violations"]]
        out.append(Check(9, f"{tag}: some samples analyzed", True, res["status"]["ok"] > 0))
        out.append(Check(9, f"{tag}: invariant violations", [], [b for b in bad if b[1] != "eckardt_count_listed"]))
        if kind == "cubic":
            out.append(Check(9, f"{tag}: Eckardt counts in the listed set", [],
                             [(v["sample"], v["info"]["eckardt"]) for v in res["violations"] if v["check"] == "eckardt_count_listed"]))
            if p >= 5:
                out.append(Check(9, f"{tag}: minimal samples checked for off-line points", res["minimal"],
                                 res["checks_passed"].get("off_line_point", 0)))
                # uniform draws rarely give a minimal cubic whose lines fit the cap
                ms = run_minimal_search(p, 1, MINIMAL_SEARCH_COUNT, seed)
                mtag = f"minimal search F_{p} x{MINIMAL_SEARCH_COUNT}"
                out.append(Check(9, f"{mtag}: minimal cubics found", True, ms["minimal"] > 0))
                out.append(Check(9, f"{mtag}: minimal cubics with a point off all lines", ms["minimal"],
                                 ms["checks_passed"].get("off_line_point", 0)))
                out.append(Check(9, f"{mtag}: invariant violations", [],
                                 [(v["sample"], v["check"]) for v in ms["violations"]]))
    return out


def criterion_10(fx: Fixtures) -> list[Check]:
    out = []
    for name in CUBIC_FIXTURES + DP4_FIXTURES:
        S = fx[name]
        k = 1
        while S.q**k <= 64:
            if isinstance(S, CubicSurface):
                fast, slow = lines_over(S, k), brute_force_lines(S, k)
            else:
                fast, slow = dp4_lines_over(S, k), dp4_brute_force_lines(S, k)
            out.append(Check(10, f"{name}: lines over F_{S.q**k}", [ln.basis for ln in slow], [ln.basis for ln in fast]))
            k += 1
    for name in DP4_FIXTURES:
        S = fx[name]
        k = 1
        while (S.q**k) ** 4 <= 2_000_000:
            full = dp4_points_full_scan(S, k)
            chart = dp4_points(S, k)
            out.append(Check(10, f"{name}: points over F_{S.q**k}", full.coords.tolist(), chart.coords.tolist()))
            k += 1
    return out


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_all(fixtures_dir: str | None = None, include_scans: bool = True) -> list[Check]:
    fx = Fixtures(fixtures_dir)
    out = []
    for n, fn in CRITERIA.items():
        if n == 9 and not include_scans:
            continue
        out += run_criterion(n, fx)
    return out


def run_criterion(n: int, fx: Fixtures | None = None) -> list[Check]:
    """Run one criterion; an exception becomes a failing check."""
    fx = fx if fx is not None else Fixtures()
    try:
        return CRITERIA[n](fx)
    except Exception as exc:  # reported, not swallowed
        return [Check(n, "criterion ran to completion", "no error", f"{type(exc).__name__}: {exc}")]
