"""Exact linear algebra over the rationals.

Dense routines work on numpy object arrays of Python ints (fraction-free
Bareiss elimination). :class:`SparseLU` factors a sparse square matrix of
Fractions for repeated exact solves.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

import numpy as np


class SingularMatrixError(ArithmeticError):
    pass


class ExactGrowthError(ArithmeticError):
    """Raised when rational entries exceed the configured bit-length guard."""


def integer_rows(rows: Iterable[Sequence]) -> np.ndarray:
    """Scale each row of rationals by its denominators' lcm; returns an object array of ints."""
    out = []
    for row in rows:
        fr = [Fraction(v) for v in row]
        scale = lcm(*(v.denominator for v in fr)) if fr else 1
        out.append([int(v * scale) for v in fr])
    arr = np.empty((len(out), len(out[0]) if out else 0), dtype=object)
    for i, row in enumerate(out):
        arr[i, :] = row
    return arr


def _as_object(M) -> np.ndarray:
    if isinstance(M, np.ndarray) and M.dtype != object and M.dtype.kind in "iub":
        return M.astype(object)
    if isinstance(M, np.ndarray) and M.dtype == object and all(isinstance(v, int) for v in M.flat):
        return M.copy()
    return integer_rows(M)


def bareiss_echelon(M) -> tuple[np.ndarray, list[int]]:
    """Fraction-free row echelon form; returns (matrix, pivot columns)."""
    A = _as_object(M)
    m, n = A.shape
    prev = 1
    r = 0
    pivots: list[int] = []
    for c in range(n):
        if r == m:
            break
        nz = [i for i in range(r, m) if A[i, c] != 0]
        if not nz:
            continue
        i0 = nz[0]
        if i0 != r:
            A[[r, i0]] = A[[i0, r]]
        p = A[r, c]
        if r + 1 < m:
            below = A[r + 1:, c].copy()
            A[r + 1:, c:] = (p * A[r + 1:, c:] - np.outer(below, A[r, c:])) // prev
        prev = p
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M) -> int:
    """Exact rank of an integer or rational matrix."""
    A = _as_object(M)
    if A.size == 0:
        return 0
    return len(bareiss_echelon(A)[1])


def determinant(M) -> Fraction:
    rows = [[Fraction(v) for v in row] for row in (M.tolist() if isinstance(M, np.ndarray) else M)]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return Fraction(1)
    scales = [lcm(*(v.denominator for v in r)) for r in rows]
    A = integer_rows(rows)
    sign = 1
    prev = 1
    for c in range(n):
        nz = [i for i in range(c, n) if A[i, c] != 0]
        if not nz:
            return Fraction(0)
        if nz[0] != c:
            A[[c, nz[0]]] = A[[nz[0], c]]
            sign = -sign
        p = A[c, c]
        if c + 1 < n:
            below = A[c + 1:, c].copy()
            A[c + 1:, c:] = (p * A[c + 1:, c:] - np.outer(below, A[c, c:])) // prev
        prev = p
    total = 1
    for s in scales:
        total *= s
    return Fraction(sign * int(A[n - 1, n - 1]), total)


def nullspace(M) -> np.ndarray:
    """Integer basis of ``{v : M v = 0}`` as rows of an object array (primitive vectors)."""
    A = _as_object(M)
    m, n = A.shape
    R = [[Fraction(int(v)) for v in row] for row in A]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        i0 = next((i for i in range(r, m) if R[i][c] != 0), None)
        if i0 is None:
            continue
        R[r], R[i0] = R[i0], R[r]
        inv = 1 / R[r][c]
        R[r] = [v * inv for v in R[r]]
        for i in range(m):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in set(pivots)]
    out = np.zeros((len(free), n), dtype=object)
    for k, f in enumerate(free):
        vec = [Fraction(0)] * n
        vec[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            vec[pc] = -R[row][f]
        scale = lcm(*(v.denominator for v in vec))
        ints = [int(v * scale) for v in vec]
        g = 0
        for v in ints:
            g = gcd(g, v)
        out[k, :] = [v // g for v in ints]
    return out


def _check_size(values: Iterable[Fraction], max_bits: int | None) -> None:
    if max_bits is None:
        return
    for v in values:
        if v.numerator.bit_length() > max_bits or v.denominator.bit_length() > max_bits:
            raise ExactGrowthError(f"rational entry exceeds {max_bits} bits")


class SparseLU:
    """Exact LU factorisation of a sparse square matrix given column by column.

    Pivots follow a Markowitz-style rule: the column with fewest remaining
    nonzeros, then the shortest row in it. Row operations are recorded so that
    both ``B z = b`` and ``B^T w = c`` can be solved.
    """

    def __init__(self, columns: Sequence[Mapping[int, Fraction]], m: int, max_bits: int | None = None):
        if len(columns) != m:
            raise ValueError("SparseLU needs a square matrix")
        self.m = m
        self.max_bits = max_bits
        rows: list[dict[int, Fraction]] = [{} for _ in range(m)]
        col_rows: list[set[int]] = [set() for _ in range(m)]
        for p, col in enumerate(columns):
            for r, v in col.items():
                if v:
                    rows[r][p] = Fraction(v)
                    col_rows[p].add(r)
        remaining = set(range(m))
        # steps: (pivot row, pivot col, pivot value, U row, [(row, factor)])
        self.steps: list[tuple[int, int, Fraction, dict[int, Fraction], list[tuple[int, Fraction]]]] = []
        for _ in range(m):
            c = min(remaining, key=lambda p: len(col_rows[p]))
            if not col_rows[c]:
                raise SingularMatrixError("basis matrix is singular")
            r = min(col_rows[c], key=lambda i: len(rows[i]))
            prow = rows[r]
            pv = prow[c]
            ops = []
            for i in list(col_rows[c]):
                if i == r:
                    continue
                f = rows[i][c] / pv
                ops.append((i, f))
                ri = rows[i]
                for p, v in prow.items():
                    new = ri.get(p, 0) - f * v
                    if new:
                        ri[p] = new
                        col_rows[p].add(i)
                    else:
                        ri.pop(p, None)
                        col_rows[p].discard(i)
            for p in prow:
                col_rows[p].discard(r)
            remaining.discard(c)
            self.steps.append((r, c, pv, prow, ops))
            _check_size(prow.values(), max_bits)
        # column view of U without the diagonal, for the transposed solve
        self._ucol: dict[int, list[tuple[int, Fraction]]] = {}
        for r, c, _, prow, _ in self.steps:
            for p, v in prow.items():
                if p != c:
                    self._ucol.setdefault(p, []).append((r, v))

    def solve(self, b: Mapping[int, Fraction] | Sequence[Fraction]) -> list[Fraction]:
        """Solve ``B z = b``; ``z`` is indexed by column position of B."""
        w = [Fraction(0)] * self.m
        items = b.items() if isinstance(b, Mapping) else enumerate(b)
        for i, v in items:
            w[i] = Fraction(v)
        for r, _, _, _, ops in self.steps:
            wr = w[r]
            if wr:
                for i, f in ops:
                    w[i] -= f * wr
        z = [Fraction(0)] * self.m
        for r, c, pv, prow, _ in reversed(self.steps):
            s = w[r]
            for p, v in prow.items():
                if p != c and z[p]:
                    s -= v * z[p]
            z[c] = s / pv
        _check_size(z, self.max_bits)
        return z

    def solve_transpose(self, c_vec: Sequence[Fraction]) -> list[Fraction]:
        """Solve ``B^T w = c``; ``c`` is indexed by column position, ``w`` by row."""
        z = [Fraction(0)] * self.m
        for r, c, pv, _, _ in self.steps:
            s = Fraction(c_vec[c])
            for rr, v in self._ucol.get(c, ()):
                if z[rr]:
                    s -= v * z[rr]
            z[r] = s / pv
        for r, _, _, _, ops in reversed(self.steps):
            s = z[r]
            for i, f in ops:
                if z[i]:
                    s -= f * z[i]
            z[r] = s
        _check_size(z, self.max_bits)
        return z
