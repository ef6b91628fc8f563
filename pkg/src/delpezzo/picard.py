"""Picard lattice Z^{1,6}, the Weyl group W(E6), and H^1 of cyclic actions.

Lattice basis order is (L, E1, ..., E6) with form diag(1, -1, ..., -1).
The 27 line classes are indexed as E1..E6 (0-5), F_ij for i < j in
lexicographic order (6-20), and G1..G6 (21-26).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lines import LineConfiguration, cycle_type, permutation_cycles

RANK = 7
FORM = np.diag([1, -1, -1, -1, -1, -1, -1])
ANTICANONICAL = np.array([3, -1, -1, -1, -1, -1, -1])  # -K = 3L - sum E_i
WEYL_ORDER = 51840


def _class_table():
    names, vecs = [], []
    for i in range(1, 7):
        v = [0] * 7
        v[i] = 1
        names.append(f"E{i}")
        vecs.append(v)
    for i, j in itertools.combinations(range(1, 7), 2):
        v = [1] + [0] * 6
        v[i] = v[j] = -1
        names.append(f"F{i}{j}")
        vecs.append(v)
    for i in range(1, 7):
        v = [2] + [-1] * 6
        v[i] = 0
        names.append(f"G{i}")
        vecs.append(v)
    return tuple(names), np.array(vecs, dtype=np.int64)


CLASS_NAMES, CLASS_VECTORS = _class_table()
_INDEX = {tuple(v): i for i, v in enumerate(CLASS_VECTORS.tolist())}
F12 = CLASS_NAMES.index("F12")


def pairing(u, v) -> int:
    return int(np.asarray(u) @ FORM @ np.asarray(v))


def class_index(vec) -> int:
    return _INDEX[tuple(int(x) for x in vec)]


@lru_cache(maxsize=1)
def class_pairings() -> np.ndarray:
    """27x27 matrix of intersection numbers of the line classes."""
    return CLASS_VECTORS @ FORM @ CLASS_VECTORS.T


# ---------------------------------------------------------------------------
# Weyl group
# ---------------------------------------------------------------------------


def perm_from_linear_map(matrix: np.ndarray) -> tuple[int, ...]:
    return tuple(class_index(matrix @ v) for v in CLASS_VECTORS)


def matrix_from_perm(perm) -> np.ndarray:
    """The 7x7 matrix sending each class c to class perm[c].

    E_i determine the columns 1..6 and L = F12 + E1 + E2 determines column 0.
    """
    m = np.zeros((RANK, RANK), dtype=np.int64)
    for i in range(6):
        m[:, i + 1] = CLASS_VECTORS[perm[i]]
    m[:, 0] = CLASS_VECTORS[perm[F12]] + CLASS_VECTORS[perm[0]] + CLASS_VECTORS[perm[1]]
    return m


def generators() -> list[tuple[int, ...]]:
    gens = []
    for i in range(1, 6):
        m = np.eye(RANK, dtype=np.int64)
        m[[i, i + 1]] = m[[i + 1, i]]
        gens.append(perm_from_linear_map(m))
    root = np.array([1, -1, -1, -1, 0, 0, 0])
    # reflection v -> v + (v.root) root, since root.root = -2
    refl = np.eye(RANK, dtype=np.int64) + np.outer(root, root @ FORM)
    gens.append(perm_from_linear_map(refl))
    return gens


def compose(a, b) -> tuple[int, ...]:
    """(a o b)[i] = a[b[i]]."""
    return tuple(a[x] for x in b)


def inverse(a) -> tuple[int, ...]:
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def perm_order(a) -> int:
    return math.lcm(*(len(c) for c in permutation_cycles(a)))


@dataclass(frozen=True)
class WeylElement:
    perm: tuple[int, ...]

    @property
    def matrix(self) -> np.ndarray:
        return matrix_from_perm(self.perm)

    @property
    def order(self) -> int:
        return perm_order(self.perm)

    @property
    def trace(self) -> int:
        return int(np.trace(self.matrix))

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return WeylElement(compose(self.perm, other.perm))


@lru_cache(maxsize=1)
def weyl_generate() -> tuple[tuple[int, ...], ...]:
    """All 51840 elements of W(E6) as permutations of the 27 classes."""
    gens = generators()
    ident = tuple(range(27))
    seen = {ident}
    order = [ident]
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in gens:
            h = compose(s, g)
            if h not in seen:
                seen.add(h)
                order.append(h)
                queue.append(h)
    return tuple(order)


@dataclass(frozen=True)
class CohomologyResult:
    invariant_factors: tuple[int, ...]

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    def __str__(self):
        if not self.invariant_factors:
            return "0"
        return " x ".join(f"Z/{d}" for d in self.invariant_factors)


@dataclass(frozen=True)
class ConjClassRecord:
    index: int
    order: int
    trace: int
    cycle_type: tuple[int, ...]
    size: int
    representative: tuple[int, ...]
    h1: CohomologyResult

    @property
    def signature(self) -> tuple:
        return (self.order, self.trace, self.cycle_type)


@lru_cache(maxsize=1)
def conjugacy_classes() -> tuple[ConjClassRecord, ...]:
    """The 25 classes sorted by (order, trace, cycle type, size)."""
    group = weyl_generate()
    gens = generators()  # involutions, so s^-1 = s
    assigned = set()
    raw = []
    for g in group:
        if g in assigned:
            continue
        members = {g}
        queue = deque([g])
        while queue:
            h = queue.popleft()
            for s in gens:
                c = compose(compose(s, h), s)
                if c not in members:
                    members.add(c)
                    queue.append(c)
        assigned |= members
        rep = min(members)
        raw.append((perm_order(rep), int(np.trace(matrix_from_perm(rep))), cycle_type(rep), len(members), rep))
    raw.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
    return tuple(
        ConjClassRecord(i + 1, o, tr, ct, size, rep, h1_cyclic(matrix_from_perm(rep)))
        for i, (o, tr, ct, size, rep) in enumerate(raw)
    )


def class_of(perm) -> ConjClassRecord:
    """The conjugacy class containing a permutation of the 27 classes."""
    return conjugacy_classes()[_class_lookup()[tuple(perm)]]


@lru_cache(maxsize=1)
def _class_lookup() -> dict:
    gens = generators()
    out = {}
    for i, rec in enumerate(conjugacy_classes()):
        queue = deque([rec.representative])
        out[rec.representative] = i
        while queue:
            h = queue.popleft()
            for s in gens:
                c = compose(compose(s, h), s)
                if c not in out:
                    out[c] = i
                    queue.append(c)
    return out


# ---------------------------------------------------------------------------
# Integer linear algebra
# ---------------------------------------------------------------------------


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a x + b y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt = a // b
        a, b = b, a - qt * b
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def column_echelon(A):
    """Unimodular U (with inverse) such that A U has its nonzero columns first.

    Returns (H, U, Uinv, rank).  Columns rank.. of U span the integer kernel.
    """
    A = [list(map(int, row)) for row in A]
    m, n = len(A), len(A[0])
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    Uinv = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j, k, a, b, c, d):
        # (col_j, col_k) <- (a col_j + b col_k, c col_j + d col_k), ad - bc = +-1
        for M in (A, U):
            for row in M:
                x, y = row[j], row[k]
                row[j], row[k] = a * x + b * y, c * x + d * y
        det = a * d - b * c
        # inverse acts on rows j, k of Uinv
        ia, ib, ic, id_ = d * det, -c * det, -b * det, a * det
        rj, rk = Uinv[j], Uinv[k]
        Uinv[j] = [ia * x + ib * y for x, y in zip(rj, rk)]
        Uinv[k] = [ic * x + id_ * y for x, y in zip(rj, rk)]

    c = 0
    for i in range(m):
        if c == n:
            break
        for k in range(c + 1, n):
            if A[i][k] == 0:
                continue
            a, b = A[i][c], A[i][k]
            g, x, y = _ext_gcd(a, b)
            # new col_c = x col_c + y col_k (entry g), new col_k = -(b/g) col_c + (a/g) col_k (entry 0)
            col_op(c, k, x, y, -b // g, a // g)
        if A[i][c] != 0:
            c += 1
    return A, U, Uinv, c


def integer_kernel(A) -> list[list[int]]:
    """Basis (as columns) of the saturated lattice {x in Z^n : A x = 0}."""
    _, U, _, r = column_echelon(A)
    n = len(U)
    return [[U[i][j] for i in range(n)] for j in range(r, n)]


def smith_normal_form(A) -> list[int]:
    """Diagonal of the Smith normal form (length min(m, n), nonnegative)."""
    M = [list(map(int, row)) for row in A]
    m = len(M)
    n = len(M[0]) if m else 0
    diag = []
    for t in range(min(m, n)):
        # bring a nonzero entry of minimal absolute value to (t, t)
        while True:
            nz = [(abs(M[i][j]), i, j) for i in range(t, m) for j in range(t, n) if M[i][j]]
            if not nz:
                break
            _, pi, pj = min(nz)
            M[t], M[pi] = M[pi], M[t]
            for row in M:
                row[t], row[pj] = row[pj], row[t]
            piv = M[t][t]
            done = True
            for i in range(t + 1, m):
                qt = M[i][t] // piv
                if qt:
                    M[i] = [x - qt * y for x, y in zip(M[i], M[t])]
                if M[i][t]:
                    done = False
            for j in range(t + 1, n):
                qt = M[t][j] // piv
                if qt:
                    for row in M:
                        row[j] -= qt * row[t]
                if M[t][j]:
                    done = False
            if not done:
                continue
            # divisibility: piv must divide every remaining entry
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if M[i][j] % piv), None)
            if bad is None:
                break
            M[t] = [x + y for x, y in zip(M[t], M[bad[0]])]
        diag.append(abs(M[t][t]) if t < m and t < n else 0)
    return diag


def h1_cyclic(A) -> CohomologyResult:
    """H^1(<A>, Z^7) = ker(Norm) / im(A - I) for A of finite order."""
    A = np.asarray(A, dtype=object)
    n_dim = A.shape[0]
    ident = np.eye(n_dim, dtype=object)
    order, P = 1, A.copy()
    while not np.array_equal(P, ident):
        P = P.dot(A)
        order += 1
        if order > 1000:
            raise ValueError("matrix does not have finite order")
    norm = sum((np.linalg.matrix_power(A, i) for i in range(order)), np.zeros_like(A))
    _, U, Uinv, r = column_echelon(norm.tolist())
    kdim = n_dim - r
    if kdim == 0:
        return CohomologyResult(())
    image = (A - ident).tolist()
    # coordinates of each column of A - I in the kernel basis U[:, r:]
    coords = []
    for j in range(n_dim):
        col = [image[i][j] for i in range(n_dim)]
        w = [sum(Uinv[a][b] * col[b] for b in range(n_dim)) for a in range(n_dim)]
        if any(w[:r]):
            raise AssertionError("image of A - I is not inside ker(Norm)")
        coords.append(w[r:])
    X = [[coords[j][i] for j in range(n_dim)] for i in range(kdim)]
    diag = smith_normal_form(X)
    if len(diag) < kdim or 0 in diag:
        raise AssertionError("H^1 of a finite cyclic group must be finite")
    return CohomologyResult(tuple(d for d in diag if d > 1))


# ---------------------------------------------------------------------------
# Line configurations
# ---------------------------------------------------------------------------


def _skew_sixes(inc: np.ndarray):
    """Six-element sets of pairwise skew lines, in lexicographic order."""
    n = len(inc)

    def extend(chosen, start):
        if len(chosen) == 6:
            yield tuple(chosen)
            return
        for j in range(start, n):
            if all(inc[i, j] == 0 for i in chosen):
                yield from extend(chosen + [j], j + 1)

    yield from extend([], 0)


def labeling_from_six(inc: np.ndarray, six) -> tuple[int, ...] | None:
    """Class index of each line given lines E1..E6, or None if inconsistent."""
    label = [None] * 27
    for i, e in enumerate(six):
        label[e] = i
    for x in range(27):
        if x in six:
            continue
        meets = frozenset(i for i, e in enumerate(six) if inc[x, e])
        if len(meets) == 2:
            a, b = sorted(meets)
            label[x] = CLASS_NAMES.index(f"F{a + 1}{b + 1}")
        elif len(meets) == 5:
            (miss,) = set(range(6)) - meets
            label[x] = CLASS_NAMES.index(f"G{miss + 1}")
        else:
            return None
    if sorted(label) != list(range(27)):
        return None
    pair = class_pairings()
    for x in range(27):
        for y in range(x + 1, 27):
            if inc[x, y] != pair[label[x], label[y]]:
                return None
    return tuple(label)


def schlafli_label(cfg: LineConfiguration) -> tuple[int, ...]:
    """labels[i] = class index (0..26) of line i, consistent with incidence."""
    for six in _skew_sixes(cfg.incidence):
        lab = labeling_from_six(cfg.incidence, six)
        if lab is not None:
            return lab
    raise ValueError("no consistent Schlafli labeling: not a 27-line configuration")


def transported_perm(line_perm, labeling) -> tuple[int, ...]:
    """A permutation of lines written as a permutation of classes."""
    line_of = {c: i for i, c in enumerate(labeling)}
    return tuple(labeling[line_perm[line_of[c]]] for c in range(27))


def frobenius_matrix(cfg: LineConfiguration, labeling=None) -> np.ndarray:
    labeling = labeling if labeling is not None else schlafli_label(cfg)
    perm = transported_perm(cfg.frobenius_perm, labeling)
    m = matrix_from_perm(perm)
    if perm_from_linear_map(m) != perm:
        raise ValueError("Frobenius permutation is not induced by a lattice isometry")
    return m


def trace_frobenius(cfg: LineConfiguration, labeling=None, power: int = 1) -> int:
    m = frobenius_matrix(cfg, labeling)
    return int(np.trace(np.linalg.matrix_power(m, power)))


def weil_count(q: int, k: int, trace_k: int) -> int:
    return q ** (2 * k) + q**k * trace_k + 1


def weil_check(S, cfg: LineConfiguration, k: int, labeling=None) -> tuple[bool, int, int]:
    """(holds, |S(F_{q^k})|, predicted count) for the trace of Frobenius^k."""
    from .cubic import surface_points

    count = len(surface_points(S, k))
    predicted = weil_count(S.q, k, trace_frobenius(cfg, labeling, k))
    return count == predicted, count, predicted


def surface_h1(cfg: LineConfiguration, m: int = 1, labeling=None) -> CohomologyResult:
    """H^1 of the Galois group of F_{q^m}, generated by Frobenius^m."""
    M = frobenius_matrix(cfg, labeling)
    return h1_cyclic(np.linalg.matrix_power(M, m))


def frobenius_class(cfg: LineConfiguration, labeling=None) -> ConjClassRecord:
    labeling = labeling if labeling is not None else schlafli_label(cfg)
    return class_of(transported_perm(cfg.frobenius_perm, labeling))


def class_is_minimal(rec: ConjClassRecord) -> bool:
    """True when no orbit of the class on the 27 lines is pairwise skew."""
    from .lines import permutation_cycles

    P = class_pairings()
    return not any(
        all(P[a, b] == 0 for a in orb for b in orb if a != b) for orb in permutation_cycles(rec.representative)
    )


def class_power_trace(rec: ConjClassRecord, power: int) -> int:
    return int(np.trace(np.linalg.matrix_power(matrix_from_perm(rec.representative), power)))


def is_square(n: int) -> bool:
    return math.isqrt(n) ** 2 == n


def weyl_table_summary() -> dict:
    classes = conjugacy_classes()
    orders = Counter(rec.h1.order for rec in classes)
    structures = {rec.h1.invariant_factors for rec in classes if rec.h1.invariant_factors}
    return {
        "group_order": len(weyl_generate()),
        "num_classes": len(classes),
        "class_size_sum": sum(rec.size for rec in classes),
        "h1_orders": dict(sorted(orders.items())),
        "nonzero_structures": sorted(structures),
        "all_square": all(is_square(rec.h1.order) for rec in classes),
    }
