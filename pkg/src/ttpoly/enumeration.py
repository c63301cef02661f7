"""Cached enumeration of all n = 4 tournaments and exact optima over them."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import lcm

import numpy as np

from .construct import iter_tournaments
from .model import Model
from .schedule import Tournament, as_point


@lru_cache(maxsize=2)
def tournaments(n: int = 4) -> tuple[Tournament, ...]:
    return tuple(iter_tournaments(n))


@lru_cache(maxsize=2)
def tournament_points(n: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """(chi, psi) of every tournament as read-only int8 arrays, one row per tournament."""
    pts = [as_point(T) for T in tournaments(n)]
    X = np.array([p.x for p in pts], dtype=np.int8)
    P = np.array([p.y for p in pts], dtype=np.int8)
    X.flags.writeable = False
    P.flags.writeable = False
    return X, P


def feasible_mask(model: Model) -> np.ndarray:
    """Which tournaments, with travel set to their actual travel, satisfy every row of ``model``."""
    X, P = tournament_points(model.n)
    pts = np.concatenate([X, P], axis=1).astype(np.int64)
    m = len(model.constraints)
    A = np.zeros((m, pts.shape[1]), dtype=np.int64)
    rhs = np.zeros(m, dtype=np.int64)
    sense = np.zeros(m, dtype=np.int64)  # -1: <=, 0: =, 1: >=
    for r, con in enumerate(model.constraints):
        scale = lcm(*(c.denominator for c in con.terms.values()), con.rhs.denominator)
        for v, c in con.terms.items():
            A[r, v] = int(c * scale)
        rhs[r] = int(con.rhs * scale)
        sense[r] = {"<=": -1, "=": 0, ">=": 1}[con.sense]
    ok = np.ones(len(pts), dtype=bool)
    for s in range(0, len(pts), 1024):
        diff = pts[s:s + 1024] @ A.T - rhs
        good = np.where(sense < 0, diff <= 0, np.where(sense > 0, diff >= 0, diff == 0))
        ok[s:s + 1024] = good.all(axis=1)
    return ok


def optimum(model: Model) -> tuple[Fraction, Tournament] | None:
    """Exact integer optimum of ``model`` by enumeration (None if infeasible).

    Travel variables are set to the actual travel vector, which is optimal for
    non-negative distances.
    """
    X, P = tournament_points(model.n)
    ok = feasible_mask(model)
    if not ok.any():
        return None
    lay = model.layout
    cost = [Fraction(0)] * lay.num_y
    for v, c in model.objective.items():
        if v < lay.num_x:
            raise ValueError("enumeration optimum assumes costs on travel variables only")
        cost[v - lay.num_x] = c
    scale = lcm(*(c.denominator for c in cost))
    icost = np.array([int(c * scale) for c in cost], dtype=np.int64)
    values = P.astype(np.int64) @ icost
    values = np.where(ok, values, np.iinfo(np.int64).max)
    best = int(np.argmin(values))
    return Fraction(int(values[best]), scale), tournaments(model.n)[best]
