"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is picked once at import time. Set ``TTPOLY_BACKEND=numpy`` to
force the numpy path (also used automatically when numba is missing).
"""

from __future__ import annotations

import os

import numpy as np

# largest prime below 2**31: products of two residues fit in int64
PRIME = 2_147_483_647

_requested = os.environ.get("TTPOLY_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"TTPOLY_BACKEND must be 'numba' or 'numpy', not {_requested!r}")

try:
    if _requested != "numba":
        raise ImportError
    import numba
except ImportError:
    numba = None

BACKEND = "numba" if numba is not None else "numpy"


# --- modular rank filter ------------------------------------------------------
#
# ``basis`` rows are kept in insertion order, each normalised to a leading 1 at
# ``pivots[r]`` and reduced against all earlier rows, so a new vector is reduced
# by one sweep over the rows in order.

def _modp_insert_numpy(basis, pivots, rank, cands, p, limit):
    B = np.mod(cands.astype(np.int64), p)
    for r in range(rank):
        f = B[:, pivots[r]]
        rows = np.flatnonzero(f)
        if rows.size:
            B[rows] = np.mod(B[rows] - f[rows, None] * basis[r], p)
    accepted = []
    live = np.flatnonzero(B.any(axis=1))
    while rank < limit and live.size:
        i = live[0]
        row = B[i]
        c = int(np.flatnonzero(row)[0])
        row = np.mod(row * pow(int(row[c]), p - 2, p), p)
        basis[rank] = row
        pivots[rank] = c
        rank += 1
        accepted.append(i)
        rest = live[1:]
        f = B[rest, c]
        hit = rest[f != 0]
        if hit.size:
            B[hit] = np.mod(B[hit] - B[hit, c][:, None] * row, p)
        live = rest[B[rest].any(axis=1)] if rest.size else rest
    return rank, np.asarray(accepted, dtype=np.int64)


def _modp_insert_loops(basis, pivots, rank, cands, p, limit, accepted):
    d = cands.shape[1]
    v = np.empty(d, dtype=np.int64)
    count = 0
    for idx in range(cands.shape[0]):
        if rank >= limit:
            break
        for c in range(d):
            v[c] = cands[idx, c] % p
        for r in range(rank):
            pc = pivots[r]
            f = v[pc]
            if f != 0:
                for c in range(pc, d):
                    v[c] = (v[c] - f * basis[r, c]) % p
        lead = -1
        for c in range(d):
            if v[c] != 0:
                lead = c
                break
        if lead < 0:
            continue
        # modular inverse by square-and-multiply
        inv = 1
        base = v[lead]
        e = p - 2
        while e > 0:
            if e & 1:
                inv = inv * base % p
            base = base * base % p
            e >>= 1
        for c in range(d):
            basis[rank, c] = v[c] * inv % p
        pivots[rank] = lead
        rank += 1
        accepted[count] = idx
        count += 1
    return rank, count


if numba is not None:
    _modp_insert_jit = numba.njit(cache=True, nogil=True)(_modp_insert_loops)


def modp_insert(basis: np.ndarray, pivots: np.ndarray, rank: int, cands: np.ndarray,
                limit: int, p: int = PRIME) -> tuple[int, np.ndarray]:
    """Extend a mod-p echelon basis by the rows of ``cands`` independent of it.

    Mutates ``basis``/``pivots`` in place and returns the new rank and the
    indices of accepted candidate rows. Stops once ``limit`` rows are held.
    """
    if not len(cands) or rank >= limit:
        return rank, np.zeros(0, dtype=np.int64)
    if numba is None:
        return _modp_insert_numpy(basis, pivots, rank, cands, p, limit)
    accepted = np.empty(min(len(cands), limit - rank), dtype=np.int64)
    rank, count = _modp_insert_jit(basis, pivots, rank, np.ascontiguousarray(cands, dtype=np.int64), p, limit,
                                   accepted)
    return rank, accepted[:count]


# --- simplex tableau pivot ----------------------------------------------------

def _pivot_numpy(T, d, r, q, drop):
    prow = T[r] / T[r, q]
    prow[np.abs(prow) < drop] = 0.0
    prow[q] = 1.0
    T[r] = prow
    col = T[:, q].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        block = T[rows] - col[rows, None] * prow
        block[np.abs(block) < drop] = 0.0
        block[:, q] = 0.0
        T[rows] = block
    if d[q] != 0.0:
        d -= d[q] * prow
        d[q] = 0.0


def _pivot_loops(T, d, r, q, drop):
    m, N = T.shape
    piv = T[r, q]
    for c in range(N):
        v = T[r, c] / piv
        T[r, c] = v if abs(v) >= drop else 0.0
    T[r, q] = 1.0
    for i in range(m):
        if i == r:
            continue
        f = T[i, q]
        if f != 0.0:
            for c in range(N):
                rc = T[r, c]
                if rc != 0.0:
                    v = T[i, c] - f * rc
                    T[i, c] = v if abs(v) >= drop else 0.0
            T[i, q] = 0.0
    f = d[q]
    if f != 0.0:
        for c in range(N):
            d[c] -= f * T[r, c]
        d[q] = 0.0


if numba is not None:
    _pivot_jit = numba.njit(cache=True, nogil=True)(_pivot_loops)


def pivot(T: np.ndarray, d: np.ndarray, r: int, q: int, drop: float = 1e-12) -> None:
    """Gauss-Jordan pivot of tableau ``T`` and reduced-cost row ``d`` on (r, q), in place."""
    if numba is None:
        _pivot_numpy(T, d, r, q, drop)
    else:
        _pivot_jit(T, d, r, q, drop)
