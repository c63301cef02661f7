"""Exact polyhedral checks on the tournament polytope.

The polytope is the convex hull of all points ``(chi(T), y)`` with
``y >= psi(T)`` componentwise and ``y`` binary. Its affine hull equals that of
the finite candidate set used here: every ``(chi(T), psi(T))`` plus every
single-coordinate augmentation ``(chi(T), psi(T) + e_a)`` with
``psi(T)_a = 0`` (a multi-coordinate augmentation is an affine combination of
single ones).

Dimensions are computed by a modular filter (fast, one-sided: vectors
independent mod p are independent over Q) followed by an exact certificate,
either a proven upper bound or an integer nullspace check of every candidate.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import exact, kernels
from .enumeration import tournament_points
from .model import (
    HOME_FLOW_FAMILIES,
    Constraint,
    Model,
    _row,
    add_flow,
    add_flow_equations,
    add_home_flow,
    add_lifted_away_away,
    add_lifted_away_home,
    add_lifted_home_away,
    pair_plays_rows,
    team_plays_rows,
    travel_away_away_rows,
    travel_first_rows,
    travel_last_rows,
)
from .schedule import check_team_count, layout


class RationalMatrix:
    """Rectangular matrix of exact rationals."""

    def __init__(self, rows: Iterable[Sequence]):
        self.rows: tuple[tuple[Fraction, ...], ...] = tuple(tuple(Fraction(v) for v in r) for r in rows)
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ValueError("rows of a RationalMatrix must have equal length")
        self.ncols = widths.pop() if widths else 0

    @classmethod
    def from_constraints(cls, constraints: Sequence[Constraint], columns: Sequence[int]) -> "RationalMatrix":
        pos = {c: k for k, c in enumerate(columns)}
        out = []
        for con in constraints:
            row = [Fraction(0)] * len(columns)
            for v, a in con.terms.items():
                if v in pos:
                    row[pos[v]] = a
            out.append(row)
        return cls(out)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.ncols

    def columns(self, cols: Sequence[int]) -> "RationalMatrix":
        return RationalMatrix([[r[c] for c in cols] for r in self.rows])

    def stack(self, other: "RationalMatrix") -> "RationalMatrix":
        return RationalMatrix(self.rows + other.rows)

    def integer_array(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, self.ncols), dtype=object)
        return exact.integer_rows(self.rows)

    def rank(self) -> int:
        return rank(self)

    def determinant(self) -> Fraction:
        return exact.determinant(self.rows)


def rank(M) -> int:
    """Exact rank by fraction-free elimination."""
    if isinstance(M, RationalMatrix):
        if not M.rows or not M.ncols:
            return 0
        M = M.integer_array()
    return exact.rank(M)


# --- affine rank --------------------------------------------------------------

class AffineRank:
    """Incremental affine dimension of a stream of integer points.

    ``upper_bound`` must be a proven bound on the answer; reaching it stops the
    scan early. Without reaching it, :meth:`value` certifies the result exactly.
    """

    def __init__(self, dim: int, upper_bound: int | None = None):
        self.dim = dim
        self.limit = dim if upper_bound is None else max(0, min(upper_bound, dim))
        self.bounded = upper_bound is not None
        self._basis = np.zeros((max(self.limit, 1), dim), dtype=np.int64)
        self._pivots = np.zeros(max(self.limit, 1), dtype=np.int64)
        self.rank = 0
        self.origin: np.ndarray | None = None
        self.selected: list[np.ndarray] = []
        self._stored: list[np.ndarray] = []

    @property
    def saturated(self) -> bool:
        return self.rank >= self.limit

    def add(self, points) -> bool:
        pts = np.atleast_2d(np.asarray(points))
        if pts.shape[1] != self.dim:
            raise ValueError(f"expected points of length {self.dim}")
        if not len(pts):
            return self.saturated
        if self.origin is None:
            self.origin = pts[0].astype(np.int64)
            pts = pts[1:]
        if self.saturated or not len(pts):
            return self.saturated
        self._stored.append(pts)
        diffs = pts.astype(np.int64) - self.origin
        self.rank, acc = kernels.modp_insert(self._basis, self._pivots, self.rank, diffs, self.limit)
        self.selected.extend(diffs[acc])
        return self.saturated

    def value(self) -> int:
        if self.origin is None:
            raise ValueError("affine rank of an empty point set")
        S = [list(map(int, v)) for v in self.selected]
        if S and exact.rank(np.array(S, dtype=object)) != len(S):
            raise ArithmeticError("modular filter accepted a dependent vector")
        if self.bounded and self.saturated:
            return len(S)
        while len(S) < self.dim:
            extra = self._outside_span(S)
            if extra is None:
                break
            S.append(extra)
        return len(S)

    def _outside_span(self, S: list[list[int]]) -> list[int] | None:
        """A stored difference not in the row space of ``S``, or None."""
        K = exact.nullspace(np.array(S, dtype=object)) if S else np.eye(self.dim, dtype=np.int64).astype(object)
        if not K.shape[0]:
            return None
        kmax = max(abs(int(v)) for v in K.flat)
        for pts in self._stored:
            diffs = pts.astype(np.int64) - self.origin
            dmax = int(np.abs(diffs).max()) if diffs.size else 0
            if kmax * max(dmax, 1) * self.dim < 2 ** 62:
                prod = diffs @ K.astype(np.int64).T
            else:
                prod = diffs.astype(object) @ K.T
            hit = np.flatnonzero((prod != 0).any(axis=1))
            if hit.size:
                return [int(v) for v in diffs[hit[0]]]
        return None


def affine_rank(points, upper_bound: int | None = None) -> int:
    """Affine dimension of the points (rows of arrays, or an iterable of batches/vectors)."""
    it = iter(points) if not isinstance(points, np.ndarray) else iter([points])
    acc: AffineRank | None = None
    for batch in it:
        batch = np.atleast_2d(np.asarray(batch))
        if acc is None:
            acc = AffineRank(batch.shape[1], upper_bound)
        if acc.add(batch):
            break
    if acc is None:
        raise ValueError("affine rank of an empty point set")
    return acc.value()


# --- equation system ----------------------------------------------------------

def equation_rows(n: int, slot1: bool = False) -> list[Constraint]:
    """Team-plays rows for slots 2.. (plus slot 1 if asked) and pair-plays rows."""
    rows = team_plays_rows(n) + pair_plays_rows(n)
    if slot1:
        rows += team_plays_rows(n, slots=[1])
    return rows


def equation_matrix(n: int, slot1: bool = False) -> RationalMatrix:
    return RationalMatrix.from_constraints(equation_rows(n, slot1), range(layout(n).num_x))


def basis_columns(n: int, k_bar: int) -> list[int]:
    """Play-variable indices (k,i,j) with k = k_bar, or i = 1, or (i,j) = (2,3)."""
    lay = layout(n)
    if not 1 <= k_bar <= lay.num_slots:
        raise ValueError(f"slot {k_bar} out of range")
    return [lay.x(k, i, j) for (k, i, j) in lay.matches if k == k_bar or i == 1 or (i, j) == (2, 3)]


def basis_submatrix_invertible(n: int, k_bar: int, columns: Sequence[int] | None = None) -> bool:
    check_team_count(n)
    cols = basis_columns(n, k_bar) if columns is None else list(columns)
    C = equation_matrix(n)
    if len(cols) != C.shape[0] or C.shape[0] != 3 * n * n - 4 * n:
        return False
    return C.columns(cols).determinant() != 0


def verify_slot1_redundant(n: int, extra: RationalMatrix | None = None) -> bool:
    """True iff appending the slot-1 team rows (or ``extra``) keeps the rank."""
    check_team_count(n)
    C = equation_matrix(n)
    if extra is None:
        extra = RationalMatrix.from_constraints(team_plays_rows(n, slots=[1]), range(layout(n).num_x))
    return rank(C.stack(extra)) == rank(C)


# --- enumerated points --------------------------------------------------------

def _augmented(X: np.ndarray, P: np.ndarray, rows: np.ndarray, coords: np.ndarray) -> np.ndarray:
    out = np.concatenate([X[rows], P[rows]], axis=1)
    out[np.arange(len(rows)), X.shape[1] + coords] = 1
    return out


def candidate_batches(n: int = 4, keep: Callable[[np.ndarray, np.ndarray], tuple] | None = None,
                      batch: int = 4096) -> Iterator[np.ndarray]:
    """Stream base points, then single y-augmentations, in batches.

    ``keep(X, P)`` may return ``(base_mask, aug_mask)`` restricting the points.
    """
    X, P = tournament_points(n)
    if keep is None:
        base_mask, aug_mask = np.ones(len(X), dtype=bool), P == 0
    else:
        base_mask, aug_mask = keep(X, P)
    base = np.flatnonzero(base_mask)
    for s in range(0, len(base), batch):
        rows = base[s:s + batch]
        yield np.concatenate([X[rows], P[rows]], axis=1)
    rows, coords = np.nonzero(aug_mask & (P == 0))
    for s in range(0, len(rows), batch):
        yield _augmented(X, P, rows[s:s + batch], coords[s:s + batch])


def _require_enumerable(n: int) -> None:
    if n != 4:
        raise ValueError("polytope computations enumerate all tournaments and need n = 4")


@lru_cache(maxsize=2)
def equation_bound(n: int = 4) -> int:
    """Ambient dimension minus the equation rank, after checking all points satisfy the equations."""
    _require_enumerable(n)
    lay = layout(n)
    C = equation_matrix(n)
    X, _ = tournament_points(n)
    A = C.integer_array().astype(np.int64)
    if not (X.astype(np.int64) @ A.T == 1).all():
        raise AssertionError("a tournament violates the slot/pair equations")
    return lay.size - rank(C)


@lru_cache(maxsize=2)
def dimension_of_polytope(n: int = 4) -> int:
    _require_enumerable(n)
    return affine_rank(candidate_batches(n), upper_bound=equation_bound(n))


# --- faces --------------------------------------------------------------------

class InvalidInequalityError(AssertionError):
    pass


def _geq_form(con: Constraint, size: int) -> tuple[np.ndarray, int]:
    """Integer (a, g) with the constraint equivalent to a.p >= g."""
    scale = lcm(*(v.denominator for v in list(con.terms.values()) + [con.rhs]))
    a = np.zeros(size, dtype=np.int64)
    for v, c in con.terms.items():
        a[v] = int(c * scale)
    g = int(con.rhs * scale)
    if con.sense == "<=":
        return -a, -g
    return a, g


def face_masks(n: int, con: Constraint) -> tuple[np.ndarray, np.ndarray]:
    """Masks of base points and augmentations lying on the face; raises if the row is invalid."""
    X, P = tournament_points(n)
    lay = layout(n)
    a, g = _geq_form(con, lay.size)
    ax, ay = a[:lay.num_x], a[lay.num_x:]
    base = X.astype(np.int64) @ ax + P.astype(np.int64) @ ay
    aug = base[:, None] + ay[None, :]
    free = P == 0
    if (base < g).any() or (aug[free] < g).any():
        raise InvalidInequalityError(f"{con.tag} is violated by an enumerated point")
    if con.sense == "=" and ((base > g).any() or (aug[free] > g).any()):
        raise InvalidInequalityError(f"{con.tag} is violated by an enumerated point")
    if (ay < 0).any():
        # a tight point with two augmentations could then avoid the candidate set
        raise ValueError(f"{con.tag}: negative travel coefficient in >= form is not supported")
    return base == g, free & (aug == g)


def face_dimension(n: int, con: Constraint) -> int:
    """Affine dimension of the face the (valid) row induces on the polytope."""
    _require_enumerable(n)
    base_on, aug_on = face_masks(n, con)
    X, P = tournament_points(n)
    proper = not (base_on.all() and aug_on[P == 0].all())
    bound = dimension_of_polytope(n) - 1 if proper else None
    return affine_rank(candidate_batches(n, keep=lambda X, P: (base_on, aug_on)), upper_bound=bound)


def common_face_dimension(n: int, cons: Sequence[Constraint]) -> int:
    """Affine dimension of the intersection of the faces of several valid rows."""
    _require_enumerable(n)
    if not cons:
        return dimension_of_polytope(n)
    masks = [face_masks(n, c) for c in cons]
    base_on = np.logical_and.reduce([b for b, _ in masks])
    aug_on = np.logical_and.reduce([a for _, a in masks])
    return affine_rank(candidate_batches(n, keep=lambda X, P: (base_on, aug_on)))


def flow_equation_face_count(n: int = 4) -> tuple[bool, int]:
    """Check that the flow-equation face contains exactly the unaugmented points.

    Returns (holds, number of candidate points on the face).
    """
    _require_enumerable(n)
    rows = _family_rows(n, add_flow_equations)
    X, P = tournament_points(n)
    lay = layout(n)
    E = np.zeros((len(rows), lay.num_y), dtype=np.int64)
    rhs = np.array([int(c.rhs) for c in rows])
    for r, c in enumerate(rows):
        for v, coef in c.terms.items():
            E[r, v - lay.num_x] = int(coef)
    val = P.astype(np.int64) @ E.T  # tournaments x rows
    base_ok = (val == rhs).all(axis=1)
    # augmenting coordinate e adds column E[:, e] to every row value
    aug_ok = np.zeros(P.shape, dtype=bool)
    for e in range(lay.num_y):
        aug_ok[:, e] = (P[:, e] == 0) & ((val + E[:, e]) == rhs).all(axis=1)
    on_face = int(base_ok.sum() + aug_ok.sum())
    return bool(base_ok.all() and not aug_ok.any()), on_face


def verify_flow_equation_face(n: int = 4) -> bool:
    return flow_equation_face_count(n)[0]


# --- named inequality classes -------------------------------------------------

def _family_rows(n: int, adder: Callable[[Model], Model], **kw) -> list[Constraint]:
    empty = Model(n, "rows", {}, ())
    return list(adder(empty, **kw).constraints)


def nonnegativity_rows(n: int) -> list[Constraint]:
    lay = layout(n)
    return [_row([(lay.x(k, i, j), 1)], ">=", 0, f"nonneg[{k},{i},{j}]") for (k, i, j) in lay.matches]


def inequality_classes(n: int) -> dict[str, tuple[list[Constraint], int]]:
    """Row classes with their claimed codimension in the polytope (1 = facet)."""
    lifted_aa = _family_rows(n, add_lifted_away_away)
    flows = _family_rows(n, add_flow)
    home = _family_rows(n, add_home_flow)
    classes = {
        "nonnegativity": (nonnegativity_rows(n), 1),
        "lifted_away_away_a": ([c for c in lifted_aa if c.family == "lifted_away_away_a"], 1),
        "lifted_away_away_b": ([c for c in lifted_aa if c.family == "lifted_away_away_b"], 1),
        "lifted_home_away": (_family_rows(n, add_lifted_home_away), 1),
        "lifted_away_home": (_family_rows(n, add_lifted_away_home), 1),
        "travel_first": (travel_first_rows(n), 1),
        "travel_last": (travel_last_rows(n), 1),
        "flow_out": ([c for c in flows if c.family == "flow_out"], 1),
        "flow_in": ([c for c in flows if c.family == "flow_in"], 1),
    }
    for fam in HOME_FLOW_FAMILIES:
        classes[fam] = ([c for c in home if c.family == fam], 1)
    classes["travel_away_away"] = (travel_away_away_rows(n), 2)
    return classes


def sample(rows: Sequence[Constraint], per_class: int | None) -> list[Constraint]:
    """Evenly spaced deterministic sample (all rows when ``per_class`` is None)."""
    if per_class is None or per_class >= len(rows):
        return list(rows)
    idx = np.linspace(0, len(rows) - 1, per_class).round().astype(int)
    return [rows[i] for i in sorted(set(idx.tolist()))]


# --- reports ------------------------------------------------------------------

@dataclass
class ClaimRecord:
    claim: str
    expected: object
    computed: object
    status: str

    @classmethod
    def check(cls, claim: str, expected, computed) -> "ClaimRecord":
        return cls(claim, expected, computed, "PASS" if expected == computed else "FAIL")


def report_text(records: Sequence[ClaimRecord]) -> str:
    width = max((len(r.claim) for r in records), default=0)
    lines = [f"{r.status:4}  {r.claim:<{width}}  expected={r.expected}  computed={r.computed}" for r in records]
    passed = sum(r.status == "PASS" for r in records)
    lines.append(f"{passed}/{len(records)} claims pass")
    return "\n".join(lines)


def report_json(records: Sequence[ClaimRecord]) -> str:
    return json.dumps({"records": [asdict(r) for r in records],
                       "all_pass": all(r.status == "PASS" for r in records)}, indent=2, default=str)


SUITES = ("dimension", "basis", "redundancy", "facets", "flow-face")


def suite_dimension(n: int = 4) -> list[ClaimRecord]:
    lay = layout(n)
    eq_rank = rank(equation_matrix(n))
    dim = dimension_of_polytope(n)
    return [
        ClaimRecord.check(f"equation rank n={n}", 3 * n * n - 4 * n, eq_rank),
        ClaimRecord.check(f"polytope dimension n={n}", 3 * n ** 3 - 8 * n * n + 6 * n, dim),
        ClaimRecord.check(f"dimension = ambient - equation rank n={n}", lay.size - eq_rank, dim),
    ]


def suite_basis(ns: Sequence[int] = (4, 6)) -> list[ClaimRecord]:
    out = []
    for n in ns:
        out.append(ClaimRecord.check(f"equation rank n={n}", 3 * n * n - 4 * n, rank(equation_matrix(n))))
        for k in range(1, 2 * n - 1):
            out.append(ClaimRecord.check(f"column basis size n={n} k={k}", 3 * n * n - 4 * n,
                                         len(basis_columns(n, k))))
            out.append(ClaimRecord.check(f"column basis nonsingular n={n} k={k}", True,
                                         basis_submatrix_invertible(n, k)))
    return out


def suite_redundancy(ns: Sequence[int] = (4, 6)) -> list[ClaimRecord]:
    return [ClaimRecord.check(f"slot-1 team rows redundant n={n}", True, verify_slot1_redundant(n)) for n in ns]


def suite_facets(n: int = 4, per_class: int | None = 3,
                 extra: Sequence[tuple[Constraint, int]] = ()) -> list[ClaimRecord]:
    dim = dimension_of_polytope(n)
    out = []
    cases = [(c, codim) for rows, codim in inequality_classes(n).values() for c in sample(rows, per_class)]
    for con, codim in list(cases) + list(extra):
        try:
            computed: object = face_dimension(n, con)
        except InvalidInequalityError as exc:
            computed = f"invalid: {exc}"
        out.append(ClaimRecord.check(f"face dimension {con.tag}", dim - codim, computed))
    # the two lifted rows sharing an index with a sampled away-away travel row
    lifted = {c.tag: c for c in _family_rows(n, add_lifted_away_away)}
    for con in sample(travel_away_away_rows(n), per_class):
        idx = con.tag[con.tag.index("["):]
        pair = [lifted[f"lifted_away_away_a{idx}"], lifted[f"lifted_away_away_b{idx}"]]
        out.append(ClaimRecord.check(f"common face dimension lifted_away_away_a/b{idx}", dim - 2,
                                     common_face_dimension(n, pair)))
    return out


def suite_flow_face(n: int = 4) -> list[ClaimRecord]:
    ok, count = flow_equation_face_count(n)
    X, _ = tournament_points(n)
    return [
        ClaimRecord.check("flow-equation face holds exactly the tournament points", True, ok),
        ClaimRecord.check("points on the flow-equation face", len(X), count),
    ]


def run_suites(names: Iterable[str], per_class: int | None = 3,
               extra_faces: Sequence[tuple[Constraint, int]] = ()) -> list[ClaimRecord]:
    out: list[ClaimRecord] = []
    for name in names:
        if name == "dimension":
            out += suite_dimension()
        elif name == "basis":
            out += suite_basis()
        elif name == "redundancy":
            out += suite_redundancy()
        elif name == "facets":
            out += suite_facets(per_class=per_class, extra=extra_faces)
        elif name == "flow-face":
            out += suite_flow_face()
        else:
            raise ValueError(f"unknown suite {name!r}")
    return out
