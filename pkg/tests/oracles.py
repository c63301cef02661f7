"""Independent oracles shared by the unit and acceptance tests."""

import itertools

import numpy as np

from ttpoly.construct import home_away_swap, partial_slot_swap
from ttpoly.schedule import play_vector, validate_tournament


def brute_force_count(n: int = 4) -> int:
    """Count double round robins slot by slot, independently of the library's enumerator."""
    teams = list(range(1, n + 1))
    slot_options = []
    for perm in itertools.permutations(teams):
        pairs = [(perm[2 * a], perm[2 * a + 1]) for a in range(n // 2)]
        slot_options.append(tuple(sorted(pairs)))
    slot_options = sorted(set(slot_options))  # ordered (home, away) pairs per slot
    count = 0

    def rec(k: int, used: set) -> None:
        nonlocal count
        if k == 2 * n - 2:
            count += 1
            return
        for opt in slot_options:
            if not any(p in used for p in opt):
                rec(k + 1, used | set(opt))

    rec(0, frozenset())
    return count


def swap_candidates(T):
    for (k1, i, j) in sorted(T.matches):
        for (k2, a, b) in sorted(T.matches):
            if (a, b) == (j, i):
                yield k1, k2, i, j


def partial_candidates(T):
    by_slot = T.by_slot()
    for k1, k2 in itertools.permutations(by_slot, 2):
        for (_, i, j), (_, i2, j2) in itertools.permutations(by_slot[k1], 2):
            if (k2, i, j2) in T.matches and (k2, i2, j) in T.matches:
                yield k1, k2, i, j, i2, j2


def check_transformations(T, rng):
    n = T.n
    swaps = list(swap_candidates(T))
    k1, k2, i, j = swaps[rng.integers(len(swaps))]
    U = home_away_swap(T, k1, k2, i, j)
    validate_tournament(U.matches, n)
    assert np.abs(play_vector(U).astype(int) - play_vector(T)).sum() == 4
    assert home_away_swap(U, k1, k2, j, i) == T
    untouched = {k for k in range(1, 2 * n - 1)} - {k1, k2}
    assert all(sorted(map(sorted, [m[1:] for m in U.by_slot()[k]])) ==
               sorted(map(sorted, [m[1:] for m in T.by_slot()[k]])) for k in untouched)
    for cand in itertools.islice(partial_candidates(T), 3):
        V = partial_slot_swap(T, *cand)
        validate_tournament(V.matches, n)
        assert np.abs(play_vector(V).astype(int) - play_vector(T)).sum() == 8
        k1, k2, i, j, i2, j2 = cand
        assert partial_slot_swap(V, k1, k2, i, j2, i2, j) == T
