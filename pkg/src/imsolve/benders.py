"""Benders decomposition with closed-form subproblem duals.

Per scenario, the activation subproblem at a fixed seed vector has the closed
form Phi(y) = sum_u f_u * min(1, sum of y over u's expanded support), with the
dual of each variable being (0, f_u) when the support is covered and (f_u, 0)
otherwise. Cuts therefore need no LP solve: separation walks the condensed
scenario DAG (Algorithm-style forward pass from the covered components, then
on-demand reverse BFS against a bounded reachability cache).

All per-scenario accumulation happens in mass space (weights divided by the
scenario probability) with a single multiplication at the end, so coefficient
vectors produced from per-node data and from condensed data are bitwise equal.
The iterative loop separates at integer master optima and terminates when no
scenario yields a violated cut; the bundled master enumerates seed sets
exactly, so the loop is an exact solver at enumerable scale.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from .errors import CapExceeded
from .presolve import ReducedModel, ScenarioModel, expand_support, reach_sets

VIOLATION_TOL = 1e-9


@dataclass
class BendersCut:
    """One scenario's optimality cut  phi <= sum_j c_j y_j + C.

    Stored in mass units (weights divided by the scenario probability) with a
    single final multiplication, so evaluation agrees bit-for-bit with the
    closed-form subproblem value whenever masses are integral.
    """

    scenario: int
    probability: float
    coeff_mass: dict[int, float]  # node -> c_j / probability, all >= 0
    const_mass: float             # C / probability, >= 0

    @property
    def coefficients(self) -> dict[int, float]:
        return {j: self.probability * m for j, m in self.coeff_mass.items()}

    @property
    def constant(self) -> float:
        return self.probability * self.const_mass

    def value_at(self, y: Sequence[float]) -> float:
        terms = [m * y[j] for j, m in self.coeff_mass.items()]
        terms.append(self.const_mass)
        return self.probability * math.fsum(terms)


@dataclass
class PhiResult:
    value: float
    entry_duals: list[tuple[float, float]]  # (alpha, beta) per surviving entry
    link_duals: list[tuple[float, float]]   # (alpha, beta) per seed link


@dataclass
class ReachCache:
    """Expanded supports stored in topological order within an id budget."""

    budget_ids: int
    supports: dict[int, tuple[int, ...]] = field(default_factory=dict)
    used_ids: int = 0


def mem_limit_ids_from_gb(gigabytes: float) -> int:
    """Convert a byte budget to stored-id units (8 bytes per id)."""
    return int(gigabytes * 2**30 // 8)


def default_mem_limit_ids(scenario_count: int) -> int:
    """Default per-scenario budget: an 8 GB pool split evenly across scenarios."""
    return mem_limit_ids_from_gb(8.0 / max(scenario_count, 1))


def build_cache(sm: ScenarioModel, budget_ids: int) -> ReachCache:
    """Store surviving entries' expanded supports in topo order until the budget."""
    cache = ReachCache(budget_ids=budget_ids)
    reach = reach_sets(sm.cond)
    topo_pos = {c: i for i, c in enumerate(sm.cond.topo_order)}
    for e in sorted(sm.entries, key=lambda e: topo_pos[e.comp]):
        if e.comp in cache.supports:  # per-node entries can share a component
            continue
        size = reach[e.comp].expanded_size
        if cache.used_ids + size > budget_ids:
            break
        cache.supports[e.comp] = expand_support(sm.cond, reach[e.comp].comp_ids)
        cache.used_ids += size
    return cache


def _support_sum(y: Sequence[float], support: tuple[int, ...]) -> float:
    s = 0.0
    for j in support:
        s += y[j]
    return s


def phi(y: Sequence[float], sm: ScenarioModel) -> PhiResult:
    """Closed-form subproblem value and duals at a (possibly fractional) y."""
    supports = sm.supports()
    p = sm.probability
    terms: list[float] = []
    entry_duals: list[tuple[float, float]] = []
    for e in sm.entries:
        s = _support_sum(y, supports[e.uid])
        f = p * e.mass
        if s >= 1.0:
            terms.append(e.mass)
            entry_duals.append((0.0, f))
        else:
            terms.append(e.mass * s)
            entry_duals.append((f, 0.0))
    link_duals: list[tuple[float, float]] = []
    for node, mass in sm.links:
        f = p * mass
        if y[node] >= 1.0:
            terms.append(mass)
            link_duals.append((0.0, f))
        else:
            terms.append(mass * y[node])
            link_duals.append((f, 0.0))
    return PhiResult(p * math.fsum(terms), entry_duals, link_duals)


def submodular_rows(reduced: ReducedModel) -> list[dict[int, float]]:
    """Per scenario, the unit-seed values Phi(e_j) as a sparse coefficient row.

    One transpose pass: every entry adds its weight to each node of its
    expanded support; links add theirs to their seed node.
    """
    rows: list[dict[int, float]] = []
    for sm in reduced.scenarios:
        supports = sm.supports()
        acc: dict[int, float] = {}
        for e in sm.entries:
            for j in supports[e.uid]:
                acc[j] = acc.get(j, 0.0) + e.mass
        for node, mass in sm.links:
            acc[node] = acc.get(node, 0.0) + mass
        rows.append({j: sm.probability * acc[j] for j in sorted(acc)})
    return rows


def closed_form_cut(sm: ScenarioModel, y: Sequence[float]) -> BendersCut:
    """Optimality cut at y from the closed-form duals, by direct entry scan.

    Independent of the DAG-walking separation path; used to cross-check it and
    to derive cuts from per-node (unreduced) scenario data.
    """
    supports = sm.supports()
    c_mass: dict[int, float] = {}
    const_terms: list[float] = []
    for e in sm.entries:
        supp = supports[e.uid]
        if _support_sum(y, supp) >= 1.0:
            const_terms.append(e.mass)
        else:
            for j in supp:
                c_mass[j] = c_mass.get(j, 0.0) + e.mass
    for node, mass in sm.links:
        if y[node] >= 1.0:
            const_terms.append(mass)
        else:
            c_mass[node] = c_mass.get(node, 0.0) + mass
    ordered = {j: c_mass[j] for j in sorted(c_mass)}
    return BendersCut(
        sm.scenario_id, sm.probability, ordered, math.fsum(const_terms)
    )


def _separation_cut(
    sm: ScenarioModel, y: Sequence[float], cache: ReachCache | None
) -> BendersCut:
    """Cut at y via the condensed-DAG separation pass.

    Components whose members already sum to a covered seed mass seed a forward
    BFS; every surviving entry downstream is covered without touching its
    reachability set. Remaining entries fetch their support from the cache or
    reverse-BFS on demand.
    """
    cond = sm.cond
    covered_comps = [
        u
        for u in range(cond.comp_count)
        if _support_sum(y, cond.components[u]) >= 1.0
    ]
    reached = set(covered_comps)
    frontier = covered_comps
    while frontier:
        nxt = []
        for u in frontier:
            for v in cond.succ[u]:
                if v not in reached:
                    reached.add(v)
                    nxt.append(v)
        frontier = nxt

    c_mass: dict[int, float] = {}
    const_terms: list[float] = []
    preds: list[list[int]] | None = None
    for e in sm.entries:
        if e.comp in reached:
            const_terms.append(e.mass)
            continue
        supp = cache.supports.get(e.comp) if cache is not None else None
        if supp is None:
            if preds is None:
                preds = cond.preds()
            supp = _expand_reverse_bfs(cond, preds, e.comp)
        if _support_sum(y, supp) >= 1.0:
            const_terms.append(e.mass)
        else:
            for j in supp:
                c_mass[j] = c_mass.get(j, 0.0) + e.mass
    for node, mass in sm.links:
        if y[node] >= 1.0:
            const_terms.append(mass)
        else:
            c_mass[node] = c_mass.get(node, 0.0) + mass
    ordered = {j: c_mass[j] for j in sorted(c_mass)}
    return BendersCut(
        sm.scenario_id, sm.probability, ordered, math.fsum(const_terms)
    )


def _expand_reverse_bfs(cond, preds: list[list[int]], comp: int) -> tuple[int, ...]:
    seen = {comp}
    frontier = [comp]
    while frontier:
        nxt = []
        for u in frontier:
            for q in preds[u]:
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return expand_support(cond, tuple(sorted(seen)))


def separate(
    y: Sequence[float],
    phi_bar: Sequence[float],
    reduced: ReducedModel,
    caches: list[ReachCache] | None = None,
    tol: float = VIOLATION_TOL,
) -> list[BendersCut]:
    """Violated optimality cuts at (y, phi_bar), one per offending scenario."""
    cuts = []
    for idx, sm in enumerate(reduced.scenarios):
        cut = _separation_cut(sm, y, caches[idx] if caches else None)
        if phi_bar[idx] > cut.value_at(y) + tol:
            cuts.append(cut)
    return cuts


# ---------------------------------------------------------------------------
# Master problem and solve loop
# ---------------------------------------------------------------------------


@dataclass
class MasterState:
    """Rows of the relaxed master: per scenario, (coefficients, constant) pairs.

    Starts with the unit-seed row and the trivial total-weight cap; separated
    cuts are appended. ``incumbent <= bound`` holds throughout the loop.
    """

    node_count: int
    budget: int
    rows: list[list[tuple[dict[int, float], float]]]
    incumbent_value: float = -math.inf
    incumbent_seeds: tuple[int, ...] = ()
    bound: float = math.inf

    def scenario_value(self, idx: int, seeds: tuple[int, ...]) -> float:
        best = math.inf
        for coeffs, constant in self.rows[idx]:
            v = sum(coeffs.get(j, 0.0) for j in seeds) + constant
            if v < best:
                best = v
        return best


MasterSolver = Callable[[MasterState], tuple[tuple[int, ...], list[float], float]]


def master_enumerate(
    state: MasterState, cap: int = 10**6
) -> tuple[tuple[int, ...], list[float], float]:
    """Exact master: evaluate every seed set of size <= budget against the rows.

    Returns the lexicographically smallest maximizer, its per-scenario row
    minima, and the master value. Refuses when the candidate count exceeds cap.
    """
    n, k = state.node_count, min(state.budget, state.node_count)
    total = sum(math.comb(n, size) for size in range(k + 1))
    if total > cap:
        raise CapExceeded(
            f"{total} master candidates exceed cap {cap}; "
            "export the instance to LP/MPS for an external solver",
            total,
        )
    n_scen = len(state.rows)
    best_val = -math.inf
    best: tuple[int, ...] = ()
    best_phis: list[float] = [0.0] * n_scen
    for size in range(k + 1):
        for combo in itertools.combinations(range(n), size):
            phis = [state.scenario_value(i, combo) for i in range(n_scen)]
            val = math.fsum(phis)
            if val > best_val or (val == best_val and combo < best):
                best_val, best, best_phis = val, combo, phis
    return best, best_phis, best_val


@dataclass
class SolveResult:
    seed_set: tuple[int, ...]
    objective: float
    bound: float
    iterations: int
    cut_count: int
    cuts_per_scenario: list[int]

    def to_dict(self, original_ids: Sequence[int] | None = None) -> dict:
        seeds = (
            [original_ids[j] for j in self.seed_set]
            if original_ids is not None
            else list(self.seed_set)
        )
        return {
            "seed_set": seeds,
            "objective": self.objective,
            "bound": self.bound,
            "iterations": self.iterations,
            "cut_count": self.cut_count,
            "cuts_per_scenario": self.cuts_per_scenario,
        }


def initial_master_state(reduced: ReducedModel) -> MasterState:
    rows: list[list[tuple[dict[int, float], float]]] = []
    for sm, sub_row in zip(reduced.scenarios, submodular_rows(reduced)):
        cap_row = ({}, sm.weight_total())  # Phi never exceeds the scenario weight
        rows.append([(sub_row, 0.0), cap_row])
    return MasterState(
        node_count=reduced.node_count, budget=reduced.budget, rows=rows
    )


def solve(
    reduced: ReducedModel,
    master: MasterSolver | None = None,
    mem_limit_ids: int | None = None,
    tol: float = VIOLATION_TOL,
    max_rounds: int = 10_000,
) -> SolveResult:
    """Iterate master optimum -> separation -> cuts until no cut is violated.

    With the exact enumeration master the returned objective is the exact
    optimum: at termination every scenario's master value is capped by a cut
    that is tight at the incumbent seed set.
    """
    if master is None:
        master = master_enumerate
    caches = [
        build_cache(
            sm,
            mem_limit_ids
            if mem_limit_ids is not None
            else default_mem_limit_ids(len(reduced.scenarios)),
        )
        for sm in reduced.scenarios
    ]
    state = initial_master_state(reduced)
    cuts_per_scenario = [0] * len(reduced.scenarios)
    iterations = 0
    y = [0.0] * reduced.node_count
    while iterations < max_rounds:
        iterations += 1
        seeds, phi_bar, master_value = master(state)
        state.bound = master_value
        for j in range(reduced.node_count):
            y[j] = 0.0
        for j in seeds:
            y[j] = 1.0
        scenario_cuts = [
            _separation_cut(sm, y, caches[idx])
            for idx, sm in enumerate(reduced.scenarios)
        ]
        true_value = math.fsum(cut.value_at(y) for cut in scenario_cuts)
        if true_value > state.incumbent_value:
            state.incumbent_value = true_value
            state.incumbent_seeds = seeds
        violated = [
            (idx, cut)
            for idx, cut in enumerate(scenario_cuts)
            if phi_bar[idx] > cut.value_at(y) + tol
        ]
        if not violated:
            return SolveResult(
                seed_set=state.incumbent_seeds,
                objective=state.incumbent_value,
                bound=state.bound,
                iterations=iterations,
                cut_count=sum(cuts_per_scenario),
                cuts_per_scenario=cuts_per_scenario,
            )
        for idx, cut in violated:
            state.rows[idx].append((cut.coefficients, cut.constant))
            cuts_per_scenario[idx] += 1
    raise RuntimeError(f"no convergence within {max_rounds} rounds")
