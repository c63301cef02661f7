"""Tournament data model: matches, validity, itineraries, play/travel vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

Match = tuple[int, int, int]  # (slot, home, away), 1-based
Arc = tuple[int, int]


class TournamentError(ValueError):
    """Raised when a match set violates the double round-robin conditions."""


def check_team_count(n: int) -> None:
    if n < 4 or n % 2:
        raise ValueError(f"team count must be even and at least 4, got {n}")


class Layout:
    """Global index layout of play and travel variables for ``n`` teams.

    Play variables come first, ordered lexicographically by (slot, home, away);
    travel variables follow, ordered by (team, from, to).
    """

    def __init__(self, n: int):
        check_team_count(n)
        self.n = n
        self.num_slots = 2 * n - 2
        self.num_arcs = n * (n - 1)
        self.num_x = self.num_slots * self.num_arcs
        self.num_y = n * self.num_arcs
        self.size = self.num_x + self.num_y
        self.arcs: list[Arc] = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
        self.matches: list[Match] = [(k, i, j) for k in range(1, self.num_slots + 1) for (i, j) in self.arcs]
        self.travels: list[tuple[int, int, int]] = [(t, i, j) for t in range(1, n + 1) for (i, j) in self.arcs]

    def arc_index(self, i: int, j: int) -> int:
        return (i - 1) * (self.n - 1) + (j - 1 if j < i else j - 2)

    def x(self, k: int, i: int, j: int) -> int:
        return (k - 1) * self.num_arcs + self.arc_index(i, j)

    def y(self, t: int, i: int, j: int) -> int:
        return self.num_x + (t - 1) * self.num_arcs + self.arc_index(i, j)

    def name(self, index: int) -> str:
        if index < self.num_x:
            k, i, j = self.matches[index]
            return f"x_{k}_{i}_{j}"
        t, i, j = self.travels[index - self.num_x]
        return f"y_{t}_{i}_{j}"


@lru_cache(maxsize=None)
def layout(n: int) -> Layout:
    return Layout(n)


@dataclass(frozen=True)
class Tournament:
    n: int
    matches: frozenset[Match]

    def by_slot(self) -> dict[int, list[Match]]:
        out: dict[int, list[Match]] = {k: [] for k in range(1, 2 * self.n - 1)}
        for m in sorted(self.matches):
            out[m[0]].append(m)
        return out

    def opponent(self, k: int, t: int) -> tuple[int, bool]:
        """Return (opponent, plays_home) of team ``t`` in slot ``k``."""
        for (kk, i, j) in self.matches:
            if kk == k and i == t:
                return j, True
            if kk == k and j == t:
                return i, False
        raise KeyError((k, t))


@dataclass(frozen=True)
class Instance:
    n: int
    name: str
    d: Mapping[Arc, Fraction] = field(repr=False)

    def __post_init__(self):
        check_team_count(self.n)
        for (i, j) in layout(self.n).arcs:
            if (i, j) not in self.d:
                raise ValueError(f"missing distance for arc ({i},{j})")
            if self.d[(i, j)] < 0:
                raise ValueError(f"negative distance for arc ({i},{j})")

    def dist(self, i: int, j: int) -> Fraction:
        return Fraction(self.d[(i, j)])

    def matrix(self) -> list[list[Fraction]]:
        n = self.n
        return [[Fraction(0) if i == j else self.dist(i, j) for j in range(1, n + 1)] for i in range(1, n + 1)]

    def relabel(self, perm: Mapping[int, int], name: str | None = None) -> "Instance":
        """Instance in which team ``t`` is renamed ``perm[t]``."""
        d = {(perm[i], perm[j]): v for (i, j), v in self.d.items()}
        return Instance(self.n, name or self.name, d)


def validate_tournament(matches: Iterable[Match], n: int) -> Tournament:
    """Check both round-robin conditions (slot 1 included) and build a Tournament."""
    check_team_count(n)
    ms = frozenset((int(k), int(i), int(j)) for (k, i, j) in matches)
    num_slots = 2 * n - 2
    plays = np.zeros((num_slots + 1, n + 1), dtype=np.int64)
    pairs: dict[Arc, int] = {}
    for (k, i, j) in ms:
        if not (1 <= k <= num_slots and 1 <= i <= n and 1 <= j <= n) or i == j:
            raise TournamentError(f"malformed match ({k},{i},{j})")
        plays[k, i] += 1
        plays[k, j] += 1
        pairs[(i, j)] = pairs.get((i, j), 0) + 1
    for k in range(1, num_slots + 1):
        for t in range(1, n + 1):
            if plays[k, t] != 1:
                raise TournamentError(f"team {t} plays {plays[k, t]} matches in slot {k}")
    for (i, j) in layout(n).arcs:
        c = pairs.get((i, j), 0)
        if c != 1:
            raise TournamentError(f"pair ({i},{j}) occurs {c} times")
    return Tournament(n, ms)


def venue_table(T: Tournament) -> np.ndarray:
    """Array ``v[t, k]`` = venue of team t in slot k (1-based; column 0 and 2n-1 are home)."""
    n = T.n
    v = np.zeros((n + 1, 2 * n), dtype=np.int64)
    v[:, 0] = np.arange(n + 1)
    v[:, -1] = np.arange(n + 1)
    for (k, i, j) in T.matches:
        v[i, k] = i
        v[j, k] = i
    return v


def itinerary(t: int, T: Tournament) -> list[int]:
    return [int(x) for x in venue_table(T)[t]]


def travel_vector(T: Tournament) -> np.ndarray:
    lay = layout(T.n)
    psi = np.zeros(lay.num_y, dtype=np.int8)
    v = venue_table(T)
    for t in range(1, T.n + 1):
        for a, b in zip(v[t, :-1], v[t, 1:]):
            if a != b:
                idx = lay.y(t, int(a), int(b)) - lay.num_x
                assert psi[idx] == 0, f"team {t} travels arc ({a},{b}) twice"
                psi[idx] = 1
    return psi


def play_vector(T: Tournament) -> np.ndarray:
    lay = layout(T.n)
    chi = np.zeros(lay.num_x, dtype=np.int8)
    for m in T.matches:
        chi[lay.x(*m)] = 1
    return chi


def total_distance(T: Tournament, inst: Instance) -> Fraction:
    if inst.n != T.n:
        raise ValueError("instance and tournament disagree on team count")
    v = venue_table(T)
    total = Fraction(0)
    for t in range(1, T.n + 1):
        for a, b in zip(v[t, :-1], v[t, 1:]):
            if a != b:
                total += inst.dist(int(a), int(b))
    return total


@dataclass(frozen=True)
class SolutionPoint:
    x: np.ndarray
    y: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


def as_point(T: Tournament) -> SolutionPoint:
    return SolutionPoint(play_vector(T), travel_vector(T))
