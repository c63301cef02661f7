import json
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from ttpoly import polyhedra
from ttpoly.enumeration import tournament_points
from ttpoly.model import Constraint, team_plays_rows, travel_away_away_rows
from ttpoly.polyhedra import (InvalidInequalityError, RationalMatrix, affine_rank, basis_columns,
                              basis_submatrix_invertible, dimension_of_polytope, equation_matrix, face_dimension,
                              inequality_classes, verify_slot1_redundant)
from ttpoly.schedule import layout


def svd_affine_rank(points: np.ndarray) -> int:
    diffs = (points[1:] - points[0]).astype(float)
    # Gram matrix keeps the SVD small; entries are exact small integers
    return int(np.linalg.matrix_rank(diffs.T @ diffs)) if len(diffs) else 0


def all_points() -> np.ndarray:
    """Every tournament point, and each one with a single unused travel coordinate raised to 1."""
    X, P = tournament_points(4)
    base = np.concatenate([X, P], axis=1).astype(np.int64)
    pts = [base]
    for e in range(48):
        free = base[P[:, e] == 0].copy()
        free[:, 72 + e] = 1
        pts.append(free)
    return np.concatenate(pts)


def face_points(con: Constraint) -> np.ndarray:
    pts = all_points()
    a = np.zeros(120, dtype=np.int64)
    for v, c in con.terms.items():
        a[v] = int(c)
    return pts[pts @ a == int(con.rhs)]


@given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 10_000))
def test_affine_rank_matches_sympy(npts, dim, seed):
    rng = np.random.default_rng(seed)
    pts = rng.integers(-2, 3, size=(npts, dim))
    expected = sympy.Matrix((pts[1:] - pts[0]).tolist()).rank() if npts > 1 else 0
    assert affine_rank(pts) == expected
    assert affine_rank([pts[: npts // 2 + 1], pts[npts // 2 + 1:]]) == expected


def test_affine_rank_trivial_cases():
    assert affine_rank(np.ones((5, 3), dtype=np.int64)) == 0
    assert affine_rank(np.vstack([np.zeros(4, dtype=np.int64), np.eye(4, dtype=np.int64)])) == 4
    with pytest.raises(ValueError):
        affine_rank([])


@pytest.mark.parametrize("n", [4, 6])
def test_equation_rank_against_sympy(n):
    C = equation_matrix(n)
    assert polyhedra.rank(C) == sympy.Matrix([[int(v) for v in r] for r in C.rows]).rank() == 3 * n * n - 4 * n


@pytest.mark.parametrize("n", [4, 6])
def test_column_basis_invertible(n):
    for k in range(1, 2 * n - 1):
        assert len(basis_columns(n, k)) == 3 * n * n - 4 * n
        assert basis_submatrix_invertible(n, k)


def test_altered_column_basis_is_singular():
    cols = basis_columns(4, 1)
    lay = layout(4)
    swapped = cols[:-1] + [next(c for c in range(lay.num_x) if c not in cols)]
    assert not basis_submatrix_invertible(4, 1, swapped)
    assert not basis_submatrix_invertible(4, 1, cols[:-1])
    with pytest.raises(ValueError):
        basis_columns(4, 7)


def test_slot1_rows_redundant_and_negative_control():
    assert verify_slot1_redundant(4) and verify_slot1_redundant(6)
    lay = layout(4)
    bogus = [0] * lay.num_x
    bogus[lay.x(1, 1, 2)] = 1
    assert not verify_slot1_redundant(4, RationalMatrix([bogus]))


def test_rational_matrix_shape_checks():
    with pytest.raises(ValueError):
        RationalMatrix([[1, 2], [3]])
    M = RationalMatrix([[Fraction(1, 2), 1], [1, 2]])
    assert M.shape == (2, 2) and M.determinant() == 0 and M.rank() == 1


def test_dimension_equals_oracle():
    dim = dimension_of_polytope(4)
    assert dim == 88 == 120 - 32
    assert svd_affine_rank(all_points()) == dim


def test_polytope_computations_need_n4():
    with pytest.raises(ValueError):
        dimension_of_polytope(6)


@pytest.mark.parametrize("cls", ["nonnegativity", "lifted_home_away", "flow_out", "home_flow_out_home",
                                 "travel_first", "travel_away_away"])
def test_face_dimension_matches_svd_oracle(cls):
    rows, _ = inequality_classes(4)[cls]
    con = rows[len(rows) // 2]
    if con.sense == "<=":
        assert all(c > 0 for c in con.terms.values()) or cls != "nonnegativity"
    assert face_dimension(4, con) == svd_affine_rank(face_points(con))


def test_invalid_inequality_raises():
    lay = layout(4)
    bad = Constraint({lay.x(1, 1, 2): Fraction(1)}, "<=", Fraction(0), "bad[1,1,2]")
    with pytest.raises(InvalidInequalityError):
        face_dimension(4, bad)


def test_slot_row_face_is_whole_polytope():
    row = team_plays_rows(4, [2])[0]
    assert face_dimension(4, row) == 88


def test_flow_equation_face_holds():
    ok, count = polyhedra.flow_equation_face_count(4)
    assert ok and count == 5760


def test_lifted_pair_intersection():
    lifted = {c.tag: c for c in polyhedra._family_rows(4, polyhedra.add_lifted_away_away)}
    con = travel_away_away_rows(4)[0]
    idx = con.tag[con.tag.index("["):]
    pair = [lifted[f"lifted_away_away_a{idx}"], lifted[f"lifted_away_away_b{idx}"]]
    assert polyhedra.common_face_dimension(4, pair) == 86


def test_report_formats():
    recs = polyhedra.run_suites(["dimension", "redundancy"])
    assert all(r.status == "PASS" for r in recs)
    data = json.loads(polyhedra.report_json(recs))
    assert data["all_pass"] and len(data["records"]) == len(recs)
    assert polyhedra.report_text(recs).endswith(f"{len(recs)}/{len(recs)} claims pass")
    with pytest.raises(ValueError):
        polyhedra.run_suites(["nope"])
