"""Building and transforming tournaments.

Tournaments are assembled from a sequence of perfect matchings (one per slot)
whose edges are oriented complementarily: every edge occurs in exactly two
slots, with home and away exchanged between the two occurrences.
"""

from __future__ import annotations

from typing import Callable, Iterator, Mapping, Sequence

import numpy as np

from .schedule import Match, Tournament, check_team_count, validate_tournament

Edge = tuple[int, int]
PerfectMatching = tuple[Edge, ...]
Factorization = tuple[PerfectMatching, ...]


def _matching(edges) -> PerfectMatching:
    return tuple(sorted((min(a, b), max(a, b)) for a, b in edges))


def canonical_factorization(n: int) -> Factorization:
    check_team_count(n)

    def wrap(v: int) -> int:
        return (v - 1) % (n - 1) + 1

    first = []
    for k in range(1, n):
        edges = [(k, n)] + [(wrap(k + i), wrap(k - i)) for i in range(1, n // 2)]
        first.append(_matching(edges))
    return tuple(first + first)


def is_perfect_matching(m: PerfectMatching, n: int) -> bool:
    covered = [t for e in m for t in e]
    return len(m) == n // 2 and sorted(covered) == list(range(1, n + 1))


def edge_slots(f: Factorization) -> dict[Edge, list[int]]:
    occ: dict[Edge, list[int]] = {}
    for k, m in enumerate(f, start=1):
        for e in m:
            occ.setdefault(e, []).append(k)
    return occ


def orient_complementary(f: Factorization, choices: Mapping[Edge, int] | Sequence[int] | None = None) -> Tournament:
    """Orient each edge oppositely in its two slots.

    ``choices[e] == 0`` makes the lower-indexed endpoint of ``e`` play at home in
    the earlier of its two slots; ``1`` makes it play at home in the later one.
    A sequence is interpreted in lexicographic edge order.
    """
    n = 2 * len(f[0])
    occ = edge_slots(f)
    edges = sorted(occ)
    if len(edges) != n * (n - 1) // 2:
        raise ValueError("factorization does not cover every edge")
    if choices is None:
        choice = {e: 0 for e in edges}
    elif isinstance(choices, Mapping):
        choice = {e: int(choices.get(e, 0)) for e in edges}
    else:
        choice = dict(zip(edges, (int(c) for c in choices)))
    matches: list[Match] = []
    for e in edges:
        slots = occ[e]
        if len(slots) != 2:
            raise ValueError(f"edge {e} occurs {len(slots)} times, expected 2")
        a, b = e
        k1, k2 = sorted(slots)
        if choice[e]:
            k1, k2 = k2, k1
        matches += [(k1, a, b), (k2, b, a)]
    return validate_tournament(matches, n)


def cyclic_shift(T: Tournament, s: int) -> Tournament:
    S = 2 * T.n - 2
    return Tournament(T.n, frozenset(((k - 1 + s) % S + 1, i, j) for (k, i, j) in T.matches))


def mirror_slots(T: Tournament) -> Tournament:
    """Reverse the slot order (slot k becomes slot 2n-1-k)."""
    return Tournament(T.n, frozenset((2 * T.n - 1 - k, i, j) for (k, i, j) in T.matches))


def permute_teams(T: Tournament, perm: Mapping[int, int]) -> Tournament:
    return Tournament(T.n, frozenset((k, perm[i], perm[j]) for (k, i, j) in T.matches))


def _replace(T: Tournament, remove: list[Match], add: list[Match]) -> Tournament:
    missing = [m for m in remove if m not in T.matches]
    if missing:
        raise ValueError(f"matches {missing} are not in the tournament")
    return Tournament(T.n, (T.matches - frozenset(remove)) | frozenset(add))


def home_away_swap(T: Tournament, k1: int, k2: int, i: int, j: int) -> Tournament:
    """Exchange home and away of the pair {i, j}: (k1,i,j),(k2,j,i) -> (k1,j,i),(k2,i,j)."""
    return _replace(T, [(k1, i, j), (k2, j, i)], [(k1, j, i), (k2, i, j)])


def partial_slot_swap(T: Tournament, k1: int, k2: int, i: int, j: int, i2: int, j2: int) -> Tournament:
    """Swap the opponents of home teams i, i2 between slots k1 and k2."""
    if len({i, j, i2, j2}) != 4:
        raise ValueError("partial slot swap needs four distinct teams")
    return _replace(
        T,
        [(k1, i, j), (k1, i2, j2), (k2, i, j2), (k2, i2, j)],
        [(k1, i, j2), (k1, i2, j), (k2, i, j), (k2, i2, j2)],
    )


def random_tournament(n: int, rng: np.random.Generator | int) -> Tournament:
    """Canonical factorization with random team labels, rotation and orientation."""
    rng = np.random.default_rng(rng)
    f = canonical_factorization(n)
    perm = dict(zip(range(1, n + 1), (int(p) + 1 for p in rng.permutation(n))))
    f = tuple(_matching((perm[a], perm[b]) for a, b in m) for m in f)
    choices = rng.integers(0, 2, size=n * (n - 1) // 2)
    return cyclic_shift(orient_complementary(f, choices), int(rng.integers(0, 2 * n - 2)))


def _perfect_matchings(teams: tuple[int, ...], allowed: Callable[[Edge], bool]) -> Iterator[list[Edge]]:
    if not teams:
        yield []
        return
    a = teams[0]
    for idx in range(1, len(teams)):
        b = teams[idx]
        if allowed((a, b)):
            rest = teams[1:idx] + teams[idx + 1:]
            for tail in _perfect_matchings(rest, allowed):
                yield [(a, b)] + tail


def iter_tournaments(n: int) -> Iterator[Tournament]:
    """Yield every tournament on ``n`` teams (only n = 4 is supported).

    Slots are filled in order with perfect matchings in lexicographic order; an
    edge's orientation is branched on when its second occurrence is placed.
    """
    if n != 4:
        raise ValueError("exhaustive enumeration is only supported for n = 4")
    S = 2 * n - 2
    teams = tuple(range(1, n + 1))
    first_slot: dict[Edge, int] = {}
    used: dict[Edge, int] = {}
    matches: list[Match] = []

    def place(k: int, pending: list[Edge]) -> Iterator[None]:
        if not pending:
            yield from fill(k + 1)
            return
        e, rest = pending[0], pending[1:]
        a, b = e
        if used.get(e, 0) == 0:
            used[e] = 1
            first_slot[e] = k
            yield from place(k, rest)
            used[e] = 0
            del first_slot[e]
            return
        used[e] = 2
        k0 = first_slot[e]
        for orient in ((k0, a, b, k, b, a), (k0, b, a, k, a, b)):
            matches.append(orient[:3])
            matches.append(orient[3:])
            yield from place(k, rest)
            del matches[-2:]
        used[e] = 1

    def fill(k: int) -> Iterator[None]:
        if k > S:
            yield None
            return
        for pm in _perfect_matchings(teams, lambda e: used.get(e, 0) < 2):
            yield from place(k, pm)

    for _ in fill(1):
        yield Tournament(n, frozenset(matches))


def enumerate_tournaments(n: int, visitor: Callable[[Tournament], object] | None = None) -> int:
    count = 0
    for T in iter_tournaments(n):
        if visitor is not None:
            visitor(T)
        count += 1
    return count
