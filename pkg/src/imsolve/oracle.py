"""Ground-truth evaluation: expected spread and exhaustive seed search.

These are the independent references the solver is checked against, so they
stay deliberately simple: forward BFS per scenario, full enumeration of seed
sets, correctly-rounded sums.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable

from .errors import CapExceeded
from .sampling import LiveArcGraph, ScenarioSet


def reachable_count(live: LiveArcGraph, seeds: Iterable[int]) -> int:
    """Number of nodes with a directed path from the seed set (seeds included)."""
    succ = live.succ
    seen = set(seeds)
    frontier = list(seen)
    while frontier:
        nxt = []
        for v in frontier:
            for w in succ[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return len(seen)


def spread(seeds: Iterable[int], scenarios: ScenarioSet) -> float:
    """Probability-weighted expected number of influenced nodes."""
    seed_list = list(seeds)
    return math.fsum(
        live.probability * reachable_count(live, seed_list)
        for live in scenarios.scenarios
    )


def brute_force_opt(
    scenarios: ScenarioSet, budget: int, cap: int = 10**6
) -> tuple[tuple[int, ...], float]:
    """Exact argmax of spread over seed sets of size at most ``budget``.

    Ties go to the lexicographically smallest seed tuple. Refuses when the
    number of candidate sets exceeds ``cap``.
    """
    n = scenarios.node_count
    k = min(budget, n)
    total = sum(math.comb(n, size) for size in range(k + 1))
    if total > cap:
        raise CapExceeded(f"{total} seed sets exceed cap {cap}", total)
    best_val = -math.inf
    best: tuple[int, ...] = ()
    for size in range(k + 1):
        for combo in itertools.combinations(range(n), size):
            val = spread(combo, scenarios)
            if val > best_val or (val == best_val and combo < best):
                best_val, best = val, combo
    return best, best_val
