"""Command-line entry point.

Subcommands: analyze, param, paper-check, weyl-table, scan.  Surfaces are read
from JSON surface files::

    {"kind": "cubic", "p": 2, "r": 2, "gen_poly": [1, 1, 1],
     "coeffs": [{"exps": [3, 0, 0, 0], "value": [1]}, ...]}

For kind "dp4" ``coeffs`` is a list of two such record lists.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np

from .cubic import (
    BaseSurface,
    CubicSurface,
    OutOfRangeError,
    SingularSurfaceError,
    SurfaceError,
    require_smooth,
    surface_points,
)
from .dp4 import DP4Surface, classify_points, conic_bundle_dp4, dp4_lines, dp4_points
from .ffield import FieldError, is_prime, min_subfield_degree, smallest_irreducible
from .lines import (
    cycle_type,
    eckardt_count_allowed,
    eckardt_count_listed,
    find_lines,
    has_rational_line,
    is_minimal,
    points_on_exceptional_locus,
)
from .param import INDETERMINATE, ParamError, fiber_analysis, find_kollar_line, phi
from .picard import (
    class_is_minimal,
    class_power_trace,
    conjugacy_classes,
    frobenius_class,
    schlafli_label,
    surface_h1,
    trace_frobenius,
    weil_check,
    weil_count,
    weyl_table_summary,
)
from .projgeom import ProjPoint, monomials, proj_points_array

SCHEMA_VERSION = 1
DEFAULT_EXTENSION_CAP = 8192
FIXTURES = ("eq1", "eq2", "eq3_alpha", "eq3_alpha1", "dp4_f2", "dp4_f3")

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_OUT_OF_RANGE = 2
EXIT_SINGULAR = 3
EXIT_CHECK_FAILED = 4

KINDS = {"cubic": CubicSurface, "dp4": DP4Surface}


class MalformedInput(ValueError):
    pass


class StageError(Exception):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


# ---------------------------------------------------------------------------
# Surface files
# ---------------------------------------------------------------------------


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _parse_block(records, nvars: int, degree: int, p: int, r: int, where: str):
    if not isinstance(records, list):
        raise MalformedInput(f"{where}: expected a list of records")
    terms = []
    seen = {}
    for i, rec in enumerate(records):
        tag = f"{where}[{i}]"
        if not isinstance(rec, dict) or set(rec) != {"exps", "value"}:
            raise MalformedInput(f"{tag}: a record needs exactly the keys 'exps' and 'value'")
        exps, value = rec["exps"], rec["value"]
        if not isinstance(exps, list) or not all(_is_int(e) and e >= 0 for e in exps):
            raise MalformedInput(f"{tag}: exponent tuple must be a list of non-negative integers")
        if len(exps) != nvars or sum(exps) != degree:
            raise MalformedInput(f"{tag}: exponent tuple {exps} must have length {nvars} and sum {degree}")
        if tuple(exps) in seen:
            raise MalformedInput(f"{tag}: exponent tuple {exps} repeats record {seen[tuple(exps)]}")
        seen[tuple(exps)] = i
        if not isinstance(value, list) or not all(_is_int(c) for c in value):
            raise MalformedInput(f"{tag}: value must be a list of integers")
        if len(value) > r:
            raise MalformedInput(f"{tag}: value {value} has more than r = {r} entries")
        if any(not 0 <= c < p for c in value):
            raise MalformedInput(f"{tag}: value {value} is not reduced mod {p}")
        if any(value):
            terms.append((tuple(exps), tuple(value)))
    return tuple(sorted(terms, reverse=True))


def parse_surface(doc, name: str = "") -> BaseSurface:
    """Validate a decoded surface document and build the surface."""
    if not isinstance(doc, dict):
        raise MalformedInput("surface document must be an object")
    unknown = set(doc) - {"kind", "p", "r", "gen_poly", "coeffs", "name"}
    if unknown:
        raise MalformedInput(f"unknown keys {sorted(unknown)}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise MalformedInput(f"kind must be one of {sorted(KINDS)}, got {kind!r}")
    cls = KINDS[kind]
    p, r = doc.get("p"), doc.get("r", 1)
    if not _is_int(p) or not is_prime(p):
        raise MalformedInput(f"p = {p!r} is not a prime")
    if not _is_int(r) or r < 1:
        raise MalformedInput(f"r = {r!r} is not a positive integer")
    gen = doc.get("gen_poly")
    if r > 1:
        if not isinstance(gen, list) or not all(_is_int(c) and 0 <= c < p for c in gen):
            raise MalformedInput("gen_poly must be a list of F_p coefficients when r > 1")
        gen = tuple(gen)
    elif gen is not None:
        raise MalformedInput("gen_poly must be omitted when r = 1")
    coeffs = doc.get("coeffs")
    if cls.NFORMS == 1:
        blocks = (_parse_block(coeffs, cls.NVARS, cls.DEGREE, p, r, "coeffs"),)
    else:
        if not isinstance(coeffs, list) or len(coeffs) != cls.NFORMS:
            raise MalformedInput(f"coeffs must hold {cls.NFORMS} record lists")
        blocks = tuple(
            _parse_block(c, cls.NVARS, cls.DEGREE, p, r, f"coeffs[{b}]") for b, c in enumerate(coeffs)
        )
    try:
        return cls(p, r, blocks, gen, doc.get("name", name))
    except (SurfaceError, FieldError) as exc:
        raise MalformedInput(str(exc)) from exc


def load_surface(path) -> BaseSurface:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise MalformedInput(f"{path}: {exc.strerror}") from exc
    return parse_surface(doc, os.path.splitext(os.path.basename(str(path)))[0])


def surface_to_doc(S: BaseSurface) -> dict:
    kind = "cubic" if isinstance(S, CubicSurface) else "dp4"
    blocks = [[{"exps": list(e), "value": list(v)} for e, v in block] for block in S.blocks]
    doc = {"kind": kind, "p": S.p, "r": S.r}
    if S.r > 1:
        doc["gen_poly"] = list(S.gen_poly)
    doc["coeffs"] = blocks[0] if kind == "cubic" else blocks
    if S.name:
        doc["name"] = S.name
    return doc


def fixture_path(name: str):
    return resources.files("delpezzo") / "fixtures" / f"{name}.json"


def load_fixture(name: str) -> BaseSurface:
    with resources.as_file(fixture_path(name)) as path:
        return load_surface(path)


# ---------------------------------------------------------------------------
# Analysis report
# ---------------------------------------------------------------------------


def _ints(v):
    return [int(x) for x in v]


class _Stages:
    def __init__(self, timing: bool):
        self.timing = timing
        self.times = {}

    def run(self, stage: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except (SurfaceError, SingularSurfaceError, OutOfRangeError, FieldError) as exc:
            raise StageError(stage, exc) from exc
        finally:
            if self.timing:
                self.times[stage] = round(self.times.get(stage, 0.0) + time.perf_counter() - t0, 4)


def _field_section(S: BaseSurface) -> dict:
    fld = S.field(1)
    return {"p": S.p, "r": S.r, "q": S.q, "gen_poly": list(S.gen_poly) if S.gen_poly else None, "modulus": list(fld.modulus)}


def _point_degree(S: BaseSurface, pt: ProjPoint) -> int:
    m = min_subfield_degree(pt.field, pt.coords)
    return int(np.lcm(m, S.r)) // S.r


def _fiber_level(S: BaseSurface, cap: int) -> int:
    """Largest m with q^(2m) <= 64, at least 1."""
    m = 1
    while S.q ** (2 * (m + 1)) <= 64:
        m += 1
    if S.q ** (2 * m) > cap:
        raise OutOfRangeError(f"F_{S.q ** (2 * m)} exceeds cap {cap}")
    return m


def param_section(S: CubicSurface, cfg, cap: int, fiber_level: int | None = None, geometric: bool = True) -> dict:
    """Third-point map data from the first rational point with an admissible line."""
    pts = surface_points(S, 1, cap).points
    out = {"admissible_line_found": False, "tried_points": 0}
    data = None
    for x in pts:
        out["tried_points"] += 1
        try:
            data = find_kollar_line(S, cfg, x, 2, cap)
            break
        except ParamError:
            continue
    if data is None:
        return out
    ind = data.indeterminacy
    out.update(
        admissible_line_found=True,
        x=_ints(data.x.coords),
        line=[_ints(r) for r in data.line.basis],
        s=_ints(data.s.coords),
        s_conj=_ints(data.s_conj.coords),
        tangent_line=[_ints(r) for r in data.calL.basis],
        indeterminacy={"distinct_points": ind.distinct_roots, "multiplicity_one": ind.simple,
                       "points_over_F_q2": [_ints(v) for v in ind.points]},
    )
    m = fiber_level if fiber_level is not None else _fiber_level(S, cap)
    fa = fiber_analysis(data, m, cap, geometric=geometric)
    fibers = {
        "field_size": S.q ** (2 * m),
        "parameter_pairs": fa.domain_size,
        "determinate": fa.determinate,
        "image_size": fa.image_size,
        "histogram": {str(k): v for k, v in fa.histogram.items()},
        "modal_fiber_size": fa.modal_size,
        "max_fiber_size": fa.max_size,
    }
    if geometric:
        fibers["geometric_histogram"] = {("curve" if k is None else str(k)): v for k, v in fa.geometric_histogram.items()}
        fibers["geometric_modal_fiber_size"] = fa.geometric_modal_size
        fibers["geometric_max_finite_fiber_size"] = fa.geometric_max_finite
        fibers["positive_dimensional_fibers"] = [_ints(z.coords) for z in fa.positive_dimensional]
    out["fibers"] = fibers
    # phi(u) = phi_bar(u, u-bar) should land in S(F_q) whenever it is determinate
    W = data.field
    emb = S.embedding(1, data.level)
    rational = {tuple(int(emb[c]) for c in p.coords) for p in pts}
    values = [phi(data, tuple(int(c) for c in u)) for u in proj_points_array(1, W)]
    values = [v for v in values if v is not INDETERMINATE]
    out["phi_determinate"] = len(values)
    out["phi_values_rational"] = all(v.coords in rational for v in values)
    return out


def analyze_cubic(S: CubicSurface, cap: int, st: _Stages, skip_param=False, param_only=False, fiber_level=None) -> dict:
    rep = {"schema_version": SCHEMA_VERSION, "kind": "cubic", "name": S.name, "field": _field_section(S), "extension_cap": cap}
    scanned = st.run("smoothness", require_smooth, S)
    cfg = st.run("lines", find_lines, S, cap)
    rep["smoothness"] = {"smooth": True, "scanned_degrees": scanned, "lines_over_closure": len(cfg.lines)}
    if not param_only:
        rep["point_counts"] = {str(k): len(st.run("points", surface_points, S, k, cap)) for k in (1, 2, 3) if S.q**k <= cap}
        fld = cfg.field
        rep["lines"] = {
            "splitting_degree": cfg.splitting_degree,
            "splitting_field": {"size": fld.q, "modulus": list(fld.modulus)},
            "table": [{"basis": [_ints(r) for r in lo.line.basis], "min_degree": lo.min_degree} for lo in cfg.lines],
            "min_degree_counts": {str(k): v for k, v in sorted(Counter(cfg.min_degrees).items())},
            "lines_over_F_q^k": {str(k): v for k, v in cfg.searched.items()},
            "incidence_row_sums": _ints(cfg.incidence.sum(axis=1)),
        }
        rep["eckardt"] = {
            "count": len(cfg.eckardt),
            "points": [{"point": _ints(pt.coords), "degree": _point_degree(S, pt), "lines": list(idx)} for pt, idx in cfg.eckardt],
        }
        rep["eckardt"]["rational_count"] = sum(1 for e in rep["eckardt"]["points"] if e["degree"] == 1)
        minimal, witness = is_minimal(cfg)
        lab = st.run("labeling", schlafli_label, cfg)
        cls = frobenius_class(cfg, lab)
        rep["frobenius"] = {
            "cycle_type": list(cycle_type(cfg.frobenius_perm)),
            "trace": trace_frobenius(cfg, lab),
            "weyl_class": {"index": cls.index, "order": cls.order, "trace": cls.trace},
        }
        rep["minimality"] = {"minimal": minimal, "witness": list(witness)}
        rep["rational_line"] = has_rational_line(cfg)
        weil = []
        for k in (1, 2, 3):
            if S.q**k > cap:
                continue
            ok, count, pred = st.run("weil", weil_check, S, cfg, k, lab)
            weil.append({"k": k, "count": count, "predicted": pred, "holds": ok})
        rep["weil"] = weil
        rep["h1"] = {str(m): {"invariant_factors": list(h.invariant_factors), "group": str(h)}
                     for m in (1, 2, 3) for h in [surface_h1(cfg, m, lab)]}
        locus = {}
        for k in (1, 2):
            try:
                on, off = points_on_exceptional_locus(S, cfg, k, cap)
            except OutOfRangeError:
                continue
            locus[str(k)] = {"on_lines": len(on), "off_lines": len(off)}
        rep["exceptional_locus"] = locus
    if not skip_param:
        rep["param"] = st.run("param", param_section, S, cfg, cap, fiber_level)
    return rep


def analyze_dp4(S: DP4Surface, cap: int, st: _Stages) -> dict:
    rep = {"schema_version": SCHEMA_VERSION, "kind": "dp4", "name": S.name, "field": _field_section(S), "extension_cap": cap}
    scanned = st.run("smoothness", require_smooth, S)
    cfg = st.run("lines", dp4_lines, S, cap)
    rep["smoothness"] = {"smooth": True, "scanned_degrees": scanned, "lines_over_closure": len(cfg.lines)}
    rep["point_counts"] = {str(k): len(st.run("points", dp4_points, S, k, cap)) for k in (1, 2, 3) if S.q**k <= cap}
    rep["lines"] = {
        "splitting_degree": cfg.splitting_degree,
        "splitting_field": {"size": cfg.field.q, "modulus": list(cfg.field.modulus)},
        "table": [{"basis": [_ints(r) for r in lo.line.basis], "min_degree": lo.min_degree} for lo in cfg.lines],
        "min_degree_counts": {str(k): v for k, v in sorted(Counter(cfg.min_degrees).items())},
        "incidence_row_sums": _ints(cfg.incidence.sum(axis=1)),
    }
    rep["frobenius"] = {"cycle_type": list(cfg.frobenius_cycle_type)}
    cls = st.run("classification", classify_points, S, cfg, cap)
    rep["rational_points"] = {
        "case": cls.case,
        "lines_through_point_counts": {str(k): v for k, v in sorted(cls.counts.items())},
        "witness": list(cls.witness) if cls.witness else None,
        "bundles": [_dp4_bundle(b) for b in cls.bundles],
    }
    pairs = [(i, j) for i in range(16) for j in range(i + 1, 16) if cfg.incidence[i, j]]
    rep["conic_bundles"] = {
        "meeting_pairs": len(pairs),
        "singular_fiber_counts": dict(Counter(str(conic_bundle_dp4(S, cfg, i, j).singular_count) for i, j in pairs)),
    }
    return rep


def _dp4_bundle(b) -> dict:
    return {
        "lines": list(b.pair),
        "singular_fibers": b.singular_count,
        "defined_over_base": b.defined_over_base,
        "rational_singular_fibers": b.rational_singular,
        "smooth_rational_fiber": b.smooth_rational_fiber,
    }


def analyze_surface(S: BaseSurface, cap: int = DEFAULT_EXTENSION_CAP, skip_param=False, param_only=False,
                    timing=False, fiber_level=None) -> dict:
    st = _Stages(timing)
    if isinstance(S, CubicSurface):
        rep = analyze_cubic(S, cap, st, skip_param, param_only, fiber_level)
    else:
        rep = analyze_dp4(S, cap, st)
    if timing:
        rep["timing"] = st.times
    return rep


def _summary_lines(rep: dict) -> list[str]:
    f = rep["field"]
    out = [f"{rep['kind']} surface {rep.get('name') or ''} over F_{f['q']}".replace("  ", " ")]
    if "point_counts" in rep:
        out.append("points: " + ", ".join(f"k={k}: {v}" for k, v in rep["point_counts"].items()))
    if "lines" in rep:
        ln = rep["lines"]
        out.append(f"lines: {rep['smoothness']['lines_over_closure']} over F_{ln['splitting_field']['size']}"
                   f" (splitting degree {ln['splitting_degree']}), min degrees {ln['min_degree_counts']}")
        out.append(f"Frobenius cycle type: {rep['frobenius']['cycle_type']}")
    if "eckardt" in rep:
        out.append(f"Eckardt points: {rep['eckardt']['count']} ({rep['eckardt']['rational_count']} rational)")
        out.append(f"minimal: {rep['minimality']['minimal']}  rational line: {rep['rational_line']}  Tr F*: {rep['frobenius']['trace']}")
        out.append("Weil: " + ", ".join(f"k={w['k']} {w['count']}/{w['predicted']} {'ok' if w['holds'] else 'FAIL'}" for w in rep["weil"]))
        out.append("H^1: " + ", ".join(f"m={m}: {h['group']}" for m, h in rep["h1"].items()))
    if "rational_points" in rep:
        rp = rep["rational_points"]
        out.append(f"rational points: case ({rp['case']}), lines through point {rp['lines_through_point_counts']}")
        out.append(f"conic bundles: singular fibers {rep['conic_bundles']['singular_fiber_counts']}")
    if "param" in rep:
        pm = rep["param"]
        if not pm["admissible_line_found"]:
            out.append("param: no admissible line through any rational point")
        else:
            fb = pm["fibers"]
            out.append(f"param: x={pm['x']}, indeterminacy {pm['indeterminacy']['distinct_points']} points,"
                       f" rational fiber mode {fb['modal_fiber_size']} (max {fb['max_fiber_size']}) over F_{fb['field_size']}")
            if "geometric_modal_fiber_size" in fb:
                out.append(f"param: geometric fiber mode {fb['geometric_modal_fiber_size']},"
                           f" max finite {fb['geometric_max_finite_fiber_size']},"
                           f" curve fibers {len(fb['positive_dimensional_fibers'])}")
    return out


def _dump(rep, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rep, fh, indent=2, sort_keys=False)
        fh.write("\n")


def cmd_analyze(args, param_only=False) -> int:
    try:
        S = load_surface(args.path)
        rep = analyze_surface(S, args.extension_cap, skip_param=getattr(args, "skip_param", False),
                              param_only=param_only, timing=args.timing, fiber_level=args.fiber_level)
    except MalformedInput as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except StageError as exc:
        return _stage_exit(exc)
    for line in _summary_lines(rep):
        print(line)
    if args.json:
        _dump(rep, args.json)
    return EXIT_OK


def _stage_exit(exc: StageError) -> int:
    inner = exc.exc
    if isinstance(inner, SingularSurfaceError):
        print(f"error: singular surface ({exc})", file=sys.stderr)
        return EXIT_SINGULAR
    if isinstance(inner, (OutOfRangeError, FieldError)):
        print(f"error: out of range ({exc})", file=sys.stderr)
        return EXIT_OUT_OF_RANGE
    print(f"error: malformed input ({exc})", file=sys.stderr)
    return EXIT_MALFORMED


# ---------------------------------------------------------------------------
# Weyl table
# ---------------------------------------------------------------------------


def weyl_table() -> dict:
    rows = [
        {"index": rec.index, "order": rec.order, "trace": rec.trace, "cycle_type": list(rec.cycle_type),
         "size": rec.size, "h1": list(rec.h1.invariant_factors)}
        for rec in conjugacy_classes()
    ]
    summary = weyl_table_summary()
    summary["h1_orders"] = {str(k): v for k, v in summary["h1_orders"].items()}
    summary["nonzero_structures"] = [list(s) for s in summary["nonzero_structures"]]
    return {"schema_version": SCHEMA_VERSION, "rows": rows, "summary": summary}


def cmd_weyl_table(args) -> int:
    tab = weyl_table()
    print(f"{'#':>3} {'ord':>4} {'tr':>4} {'size':>6}  {'H^1':<12} cycle type")
    for row in tab["rows"]:
        ct = " ".join(f"{c}^{n}" if n > 1 else str(c) for c, n in sorted(Counter(row["cycle_type"]).items(), reverse=True))
        h1 = " x ".join(f"Z/{d}" for d in row["h1"]) or "0"
        print(f"{row['index']:>3} {row['order']:>4} {row['trace']:>4} {row['size']:>6}  {h1:<12} {ct}")
    s = tab["summary"]
    structs = ", ".join(" x ".join(f"Z/{d}" for d in st) for st in s["nonzero_structures"])
    print(f"group order {s['group_order']}, {s['num_classes']} classes, H^1 orders {s['h1_orders']}")
    print(f"nonzero H^1: {structs}; all orders square: {s['all_square']}")
    if args.json:
        _dump(tab, args.json)
    ok = (s["num_classes"] == 25 and set(s["h1_orders"]) <= {"1", "4", "9"} and s["all_square"]
          and all(st in ([2, 2], [3, 3]) for st in s["nonzero_structures"]))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# Random scans
# ---------------------------------------------------------------------------


def sample_forms(kind: str, p: int, r: int, count: int, seed: int) -> list[BaseSurface | None]:
    """Draw `count` surfaces with uniform independent coefficients over F_q.

    Entries are None when the draw does not define a surface of the kind
    (a zero form, dependent quadrics).
    """
    cls = KINDS[kind]
    gen = smallest_irreducible(p, r) if r > 1 else None
    rng = np.random.default_rng(seed)
    mons = monomials(cls.NVARS, cls.DEGREE)
    out = []
    for _ in range(count):
        vals = rng.integers(0, p, size=(cls.NFORMS, len(mons), r))
        blocks = tuple(
            tuple(sorted(((e, tuple(int(c) for c in v)) for e, v in zip(mons, vs) if v.any()), reverse=True))
            for vs in vals
        )
        try:
            out.append(cls(p, r, blocks, gen))
        except SurfaceError:
            out.append(None)
    return out


def _cubic_suite(S: CubicSurface, cap: int) -> dict:
    require_smooth(S)
    cfg = find_lines(S, cap)
    lab = schlafli_label(cfg)
    tr = trace_frobenius(cfg, lab)
    minimal, _ = is_minimal(cfg)
    counts = [len(surface_points(S, k, cap)) for k in (1, 2)]
    checks = {
        "chevalley_warning": all(c % S.p == 1 for c in counts),
        "eckardt_count_allowed": eckardt_count_allowed(S.p, len(cfg.eckardt)),
        "eckardt_count_listed": eckardt_count_listed(S.p, len(cfg.eckardt)),
        "weil": all(weil_check(S, cfg, k, lab)[0] for k in (1, 2)),
        "trace_range_minimal": (not minimal) or -2 <= tr <= 2,
    }
    info = {"points": counts, "splitting_degree": cfg.splitting_degree, "eckardt": len(cfg.eckardt),
            "trace": tr, "minimal": minimal}
    if S.q >= 5 and minimal:
        _, off = points_on_exceptional_locus(S, cfg, 1, cap)
        checks["off_line_point"] = len(off) > 0
        info["off_line_points"] = len(off)
    return {"checks": checks, "info": info}


def _dp4_suite(S: DP4Surface, cap: int) -> dict:
    require_smooth(S)
    cfg = dp4_lines(S, cap)
    counts = [len(dp4_points(S, k, cap)) for k in (1, 2)]
    cls = classify_points(S, cfg, cap)
    pairs = [(i, j) for i in range(16) for j in range(i + 1, 16) if cfg.incidence[i, j]]
    checks = {
        "chevalley_warning": all(c % S.p == 1 for c in counts),
        "sixteen_lines": len(cfg.lines) == 16,
        "incidence_5_regular": bool(np.all(cfg.incidence.sum(axis=1) == 5)),
        "at_most_two_lines_per_point": max(cls.counts) <= 2,
        "bundle_singular_fibers": all(conic_bundle_dp4(S, cfg, i, j).singular_count == 4 for i, j in pairs),
        "case_iii_bundles": all(b.singular_count == 4 for b in cls.bundles),
    }
    if S.q == 3:
        checks["not_8_points"] = counts[0] != 8
    info = {"points": counts, "splitting_degree": cfg.splitting_degree, "case": cls.case}
    return {"checks": checks, "info": info}


def _run_sample(args):
    kind, S, cap = args
    if S is None:
        return {"status": "degenerate"}
    try:
        res = (_cubic_suite if kind == "cubic" else _dp4_suite)(S, cap)
    except SingularSurfaceError:
        return {"status": "singular"}
    except (OutOfRangeError, FieldError):
        return {"status": "out_of_range"}
    res["status"] = "ok"
    return res


def worker_count() -> int:
    try:
        n = int(os.environ.get("DELPEZZO_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def run_scan(kind: str, p: int, r: int, count: int, seed: int, cap: int = DEFAULT_EXTENSION_CAP, workers: int | None = None) -> dict:
    """Seeded scan; the result does not depend on the worker count."""
    surfaces = sample_forms(kind, p, r, count, seed)
    jobs = [(kind, S, cap) for S in surfaces]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_sample, jobs))
    else:
        results = [_run_sample(j) for j in jobs]
    status = Counter(res["status"] for res in results)
    violations = []
    passed = Counter()
    for i, res in enumerate(results):
        for name, ok in res.get("checks", {}).items():
            if ok:
                passed[name] += 1
            else:
                violations.append({"sample": i, "check": name, "info": res["info"]})
    analyzed = [res["info"] for res in results if res["status"] == "ok"]
    summary = {
        "schema_version": SCHEMA_VERSION,
        "kind": kind, "p": p, "r": r, "count": count, "seed": seed, "extension_cap": cap,
        "status": {k: status.get(k, 0) for k in ("ok", "singular", "out_of_range", "degenerate")},
        "checks_passed": dict(sorted(passed.items())),
        "violations": violations,
        "point_counts": dict(sorted(Counter(str(a["points"][0]) for a in analyzed).items(), key=lambda kv: int(kv[0]))),
        "splitting_degrees": {str(k): v for k, v in sorted(Counter(a["splitting_degree"] for a in analyzed).items())},
    }
    if kind == "cubic":
        summary["eckardt_counts"] = {str(k): v for k, v in sorted(Counter(a["eckardt"] for a in analyzed).items())}
        summary["minimal"] = sum(a["minimal"] for a in analyzed)
    else:
        summary["cases"] = dict(sorted(Counter(a["case"] for a in analyzed).items()))
    return summary


def minimal_count_profiles(q: int, cap: int) -> set[tuple[int, int]]:
    """Point counts over F_q and F_{q^2} of minimal cubics splitting within cap."""
    out = set()
    for rec in conjugacy_classes():
        if class_is_minimal(rec) and q**rec.order <= cap:
            out.add(tuple(weil_count(q, k, class_power_trace(rec, k)) for k in (1, 2)))
    return out


def run_minimal_search(p: int, r: int, count: int, seed: int, cap: int = DEFAULT_EXTENSION_CAP) -> dict:
    """Seeded search for minimal cubics, run through the full cubic suite.

    Minimal cubics are rare among uniform draws, so samples are first
    filtered by the point counts a minimal Frobenius class allows.
    """
    q = p**r
    profiles = minimal_count_profiles(q, cap)
    hits = []
    for i, S in enumerate(sample_forms("cubic", p, r, count, seed)):
        if S is None or not profiles:
            continue
        counts = (len(surface_points(S, 1, cap)), None)
        if not any(c1 == counts[0] for c1, _ in profiles):
            continue
        counts = (counts[0], len(surface_points(S, 2, cap)))
        if counts not in profiles:
            continue
        res = _run_sample(("cubic", S, cap))
        if res["status"] == "ok" and res["info"]["minimal"]:
            hits.append((i, res))
    passed = Counter(name for _, res in hits for name, ok in res["checks"].items() if ok)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "cubic", "p": p, "r": r, "count": count, "seed": seed, "extension_cap": cap,
        "count_profiles": sorted(list(pr) for pr in profiles),
        "minimal": len(hits),
        "samples": [i for i, _ in hits],
        "checks_passed": dict(sorted(passed.items())),
        "violations": [{"sample": i, "check": name, "info": res["info"]}
                       for i, res in hits for name, ok in res["checks"].items() if not ok],
    }


def _cmd_minimal_search(args, q: int) -> int:
    if args.kind != "cubic":
        print("error: --minimal applies to cubic scans only", file=sys.stderr)
        return EXIT_MALFORMED
    res = run_minimal_search(args.p, args.r, args.count, args.seed, args.extension_cap)
    print(f"minimal cubic search over F_{q}: {args.count} samples, seed {args.seed}")
    print(f"  point count profiles: {res['count_profiles']}")
    print(f"  minimal samples found: {res['minimal']}")
    for name, n in res["checks_passed"].items():
        print(f"  {name}: {n} passed")
    for v in res["violations"]:
        print(f"  VIOLATION sample {v['sample']}: {v['check']} {v['info']}")
    if args.json:
        _dump(res, args.json)
    return EXIT_CHECK_FAILED if res["violations"] else EXIT_OK


def cmd_scan(args) -> int:
    q = args.p**args.r
    if not is_prime(args.p) or args.r < 1:
        print(f"error: p = {args.p}, r = {args.r} is not a valid prime power", file=sys.stderr)
        return EXIT_MALFORMED
    if q > args.extension_cap:
        print(f"error: q = {q} exceeds the extension cap", file=sys.stderr)
        return EXIT_OUT_OF_RANGE
    if args.minimal:
        return _cmd_minimal_search(args, q)
    res = run_scan(args.kind, args.p, args.r, args.count, args.seed, args.extension_cap)
    st = res["status"]
    print(f"scan {args.kind} over F_{q}: {args.count} samples, seed {args.seed}")
    print(f"analyzed {st['ok']}, discarded {st['singular']} singular, {st['out_of_range']} out of range,"
          f" {st['degenerate']} degenerate")
    for name, n in res["checks_passed"].items():
        print(f"  {name}: {n} passed")
    if "eckardt_counts" in res:
        print(f"  Eckardt counts: {res['eckardt_counts']}; minimal samples: {res['minimal']}")
    else:
        print(f"  cases: {res['cases']}")
    print(f"  splitting degrees: {res['splitting_degrees']}")
    for v in res["violations"]:
        print(f"  VIOLATION sample {v['sample']}: {v['check']} {v['info']}")
    if args.json:
        _dump(res, args.json)
    return EXIT_CHECK_FAILED if res["violations"] else EXIT_OK


# ---------------------------------------------------------------------------
# Certification suite
# ---------------------------------------------------------------------------


def _short(v, width: int = 24) -> str:
    text = str(v)
    if len(text) <= width:
        return text
    if isinstance(v, (list, tuple)):
        return f"<{len(v)} items>"
    return text[: width - 3] + "..."


def cmd_paper_check(args) -> int:
    from .checks import run_all

    results = run_all(fixtures_dir=args.fixtures_dir, include_scans=not args.skip_scans)
    w = max(len(c.claim) for c in results)
    print(f"{'#':>3}  {'claim':<{w}}  {'expected':<24} {'computed':<24} result")
    for c in results:
        print(f"{c.criterion:>3}  {c.claim:<{w}}  {_short(c.expected):<24} {_short(c.computed):<24} {'PASS' if c.passed else 'FAIL'}")
    failed = [c for c in results if not c.passed]
    print(f"{len(results) - len(failed)} of {len(results)} checks passed")
    if args.json:
        _dump({"schema_version": SCHEMA_VERSION, "checks": [c.as_dict() for c in results]}, args.json)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delpezzo", description="Cubic and degree-4 del Pezzo surfaces over finite fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--extension-cap", type=int, default=DEFAULT_EXTENSION_CAP, help="largest field size used (default 8192)")
        p.add_argument("--json", metavar="PATH", help="write the machine-readable report here")

    for name in ("analyze", "param"):
        p = sub.add_parser(name, help="full analysis of a surface file" if name == "analyze" else "third-point map section only")
        p.add_argument("path")
        common(p)
        if name == "analyze":
            p.add_argument("--skip-param", action="store_true", help="omit the third-point map section")
            p.add_argument("--param-only", action="store_true", help="same as the param subcommand")
        p.add_argument("--fiber-level", type=int, default=None, help="fiber analysis over F_{(q^2)^m} for this m")
        p.add_argument("--timing", action="store_true", help="include per-stage timings in the report")

    p = sub.add_parser("paper-check", help="run the certification checks on the bundled fixtures")
    p.add_argument("--fixtures-dir", default=None, help="read fixtures from this directory instead")
    p.add_argument("--skip-scans", action="store_true", help="skip the randomized scans")
    p.add_argument("--json", metavar="PATH")

    p = sub.add_parser("weyl-table", help="conjugacy classes of W(E6) with H^1")
    p.add_argument("--json", metavar="PATH")

    p = sub.add_parser("scan", help="invariant checks on random surfaces")
    p.add_argument("--kind", choices=sorted(KINDS), required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--minimal", action="store_true", help="search for minimal cubics, prefiltered by point counts")
    common(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        return cmd_analyze(args, param_only=args.param_only)
    if args.command == "param":
        return cmd_analyze(args, param_only=True)
    if args.command == "paper-check":
        return cmd_paper_check(args)
    if args.command == "weyl-table":
        return cmd_weyl_table(args)
    return cmd_scan(args)


if __name__ == "__main__":
    sys.exit(main())
