"""Presolve reductions for the sampled influence maximization model.

Three reductions shrink the covering formulation before any solve:

* singleton aggregation (SNA): an activation variable whose reachability set
  is a single node collapses onto that node's seed variable;
* strongly-connected aggregation (SCNA): nodes of one SCC in a scenario share
  a reachability set, so they share one activation variable weighted by the
  component size, and the scenario graph condenses to a DAG;
* isomorphic aggregation (INA): activation variables whose expanded
  reachability sets coincide -- across scenarios -- are merged by probing a
  hash table keyed by the exact support set, smallest-support-first economics
  enforced by a size cap (``max_reac_size``).

Weights are tracked as integer-valued "masses" per scenario (weight =
scenario probability x mass) so that coefficient sums stay exact wherever
scenario probabilities are equal.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from .network import Model
from .sampling import LiveArcGraph, ScenarioSet


class PresolveLevel(str, Enum):
    DEFAULT = "default"  # singleton aggregation only, per-node variables
    SCNA = "scna"        # + strongly-connected aggregation
    INA = "ina"          # + isomorphic aggregation across scenarios


def default_max_reac_size(model: Model) -> int:
    return 8 if model is Model.ICM else 4


@dataclass(frozen=True)
class CondensedGraph:
    """SCC condensation of one live-arc graph: an acyclic component DAG."""

    scenario_id: int
    scc_of: tuple[int, ...]                 # node -> component id
    components: tuple[tuple[int, ...], ...]  # component id -> sorted member nodes
    succ: tuple[tuple[int, ...], ...]        # deduplicated DAG arcs, sorted
    topo_order: tuple[int, ...]              # predecessors before successors

    @property
    def comp_count(self) -> int:
        return len(self.components)

    @property
    def dag_arc_count(self) -> int:
        return sum(len(s) for s in self.succ)

    def preds(self) -> list[list[int]]:
        p: list[list[int]] = [[] for _ in range(self.comp_count)]
        for u in range(self.comp_count):
            for v in self.succ[u]:
                p[v].append(u)
        return p


@dataclass(frozen=True)
class ReachSet:
    """Components with a directed path into a given component, itself included."""

    comp_ids: tuple[int, ...]  # sorted
    expanded_size: int         # total member-node count over comp_ids


def scc_decompose(live: LiveArcGraph) -> CondensedGraph:
    """Condense a live-arc graph into its component DAG in linear time.

    Iterative Tarjan; components are emitted in reverse topological order, so
    the reversed emission order is a valid topological order of the DAG.
    """
    n = live.node_count
    succ = live.succ
    index = [-1] * n
    low = [0] * n
    on_stack = bytearray(n)
    stack: list[int] = []
    comp_of = [-1] * n
    components: list[tuple[int, ...]] = []
    next_index = 0

    for root in range(n):
        if index[root] != -1:
            continue
        index[root] = low[root] = next_index
        next_index += 1
        stack.append(root)
        on_stack[root] = 1
        frames: list[list[int]] = [[root, 0]]  # [vertex, next child slot]
        while frames:
            frame = frames[-1]
            v = frame[0]
            children = succ[v]
            descended = False
            while frame[1] < len(children):
                w = children[frame[1]]
                frame[1] += 1
                if index[w] == -1:
                    index[w] = low[w] = next_index
                    next_index += 1
                    stack.append(w)
                    on_stack[w] = 1
                    frames.append([w, 0])
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            frames.pop()
            if frames:
                parent = frames[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                members = []
                while True:
                    w = stack.pop()
                    on_stack[w] = 0
                    comp_of[w] = len(components)
                    members.append(w)
                    if w == v:
                        break
                components.append(tuple(sorted(members)))

    comp_count = len(components)
    succ_sets: list[set[int]] = [set() for _ in range(comp_count)]
    for src, dst in live.arcs:
        u, v = comp_of[src], comp_of[dst]
        if u != v:
            succ_sets[u].add(v)
    return CondensedGraph(
        scenario_id=live.scenario_id,
        scc_of=tuple(comp_of),
        components=tuple(components),
        succ=tuple(tuple(sorted(s)) for s in succ_sets),
        topo_order=tuple(range(comp_count - 1, -1, -1)),
    )


def reach_sets(cond: CondensedGraph) -> list[ReachSet]:
    """Reachability sets of all components via the topological-order recurrence.

    Walking ``topo_order``, a component's set is the union of its predecessors'
    already-computed sets plus itself; equals a reverse BFS from each component.
    """
    comp_count = cond.comp_count
    preds = cond.preds()
    sizes = [len(m) for m in cond.components]
    raw: list[set[int] | None] = [None] * comp_count
    out: list[ReachSet | None] = [None] * comp_count
    for u in cond.topo_order:
        r: set[int] = {u}
        for q in preds[u]:
            r |= raw[q]  # type: ignore[arg-type]
        raw[u] = r
        out[u] = ReachSet(tuple(sorted(r)), sum(sizes[v] for v in r))
    return out  # type: ignore[return-value]


def reverse_bfs_reach(cond: CondensedGraph, comp: int) -> ReachSet:
    """Independent reverse-BFS computation of one component's reachability set."""
    preds = cond.preds()
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
    sizes = [len(m) for m in cond.components]
    return ReachSet(tuple(sorted(seen)), sum(sizes[v] for v in seen))


def expand_support(cond: CondensedGraph, comp_ids: tuple[int, ...]) -> tuple[int, ...]:
    """Flatten component ids into the sorted node ids they contain."""
    nodes: list[int] = []
    for v in comp_ids:
        nodes.extend(cond.components[v])
    nodes.sort()
    return tuple(nodes)


# ---------------------------------------------------------------------------
# Model slices
# ---------------------------------------------------------------------------


@dataclass
class ZEntry:
    """One surviving activation variable.

    ``uid`` identifies the variable inside its scenario: the node id at
    per-node granularity, the component id after SCNA. ``mass`` times the
    scenario probability is the objective weight.
    """

    uid: int
    comp: int
    mass: float


@dataclass
class ScenarioModel:
    """Post-presolve data of one scenario."""

    scenario_id: int
    probability: float
    cond: CondensedGraph
    entries: list[ZEntry]
    links: list[tuple[int, float]]  # (node id, mass): variable collapsed onto that seed
    per_node: bool

    def weight_total(self) -> float:
        mass = sum(e.mass for e in self.entries) + sum(m for _, m in self.links)
        return self.probability * mass

    def supports(self) -> dict[int, tuple[int, ...]]:
        """Expanded support per entry uid, recomputed from the condensation."""
        reach = reach_sets(self.cond)
        return {
            e.uid: expand_support(self.cond, reach[e.comp].comp_ids)
            for e in self.entries
        }


@dataclass(frozen=True)
class MergeRecord:
    scenario: int
    uid: int
    into_scenario: int
    into_uid: int


@dataclass
class ReducedModel:
    """The full post-presolve model over all scenarios."""

    node_count: int
    budget: int
    level: PresolveLevel
    scenarios: list[ScenarioModel]
    merges: list[MergeRecord] = field(default_factory=list)

    @property
    def total_probability(self) -> float:
        return float(sum(sm.probability for sm in self.scenarios))

    def weight_total(self) -> float:
        """Mass-conservation quantity: must equal node_count * total_probability."""
        return float(sum(sm.weight_total() for sm in self.scenarios))


def apply_scna(cond: CondensedGraph, probability: float) -> ScenarioModel:
    """One variable per component, weighted by probability x component size."""
    entries = [
        ZEntry(uid=u, comp=u, mass=float(len(cond.components[u])))
        for u in cond.topo_order
    ]
    return ScenarioModel(
        scenario_id=cond.scenario_id,
        probability=probability,
        cond=cond,
        entries=entries,
        links=[],
        per_node=False,
    )


def per_node_slice(cond: CondensedGraph, probability: float) -> ScenarioModel:
    """One variable per original node (the unreduced covering granularity)."""
    entries = [
        ZEntry(uid=node, comp=cond.scc_of[node], mass=1.0)
        for node in range(len(cond.scc_of))
    ]
    return ScenarioModel(
        scenario_id=cond.scenario_id,
        probability=probability,
        cond=cond,
        entries=entries,
        links=[],
        per_node=True,
    )


def apply_sna(model: ScenarioModel) -> ScenarioModel:
    """Convert entries with a singleton reachability set into seed links.

    A variable has singleton support exactly when its component is a single
    node with no DAG predecessor; the constraint reduces to y >= z, so the
    variable collapses onto that node's seed variable.
    """
    cond = model.cond
    has_pred = bytearray(cond.comp_count)
    for u in range(cond.comp_count):
        for v in cond.succ[u]:
            has_pred[v] = 1
    kept: list[ZEntry] = []
    links = list(model.links)
    for e in model.entries:
        comp_members = cond.components[e.comp]
        if len(comp_members) == 1 and not has_pred[e.comp]:
            links.append((comp_members[0], e.mass))
        else:
            kept.append(e)
    model.entries = kept
    model.links = links
    return model


def apply_ina(models: list[ScenarioModel], max_reac_size: int) -> list[MergeRecord]:
    """Merge variables with identical expanded supports across all scenarios.

    Scenarios are processed in ascending id, entries in their stored
    (topological) order, so a merged variable's representative lives in the
    earliest scenario. Only supports of at most ``max_reac_size`` nodes are
    probed or stored; the table key is the exact sorted node tuple, so hash
    collisions are resolved by full comparison.
    """
    table: dict[tuple[int, ...], tuple[ZEntry, float, int]] = {}
    merges: list[MergeRecord] = []
    for sm in sorted(models, key=lambda m: m.scenario_id):
        reach = reach_sets(sm.cond)
        kept: list[ZEntry] = []
        for entry in sm.entries:
            r = reach[entry.comp]
            # expanded_size >= 1 always, so a cap of 0 disables the stage
            if r.expanded_size <= max_reac_size:
                key = expand_support(sm.cond, r.comp_ids)
                hit = table.get(key)
                if hit is not None:
                    target, target_p, target_sid = hit
                    target.mass += entry.mass * (sm.probability / target_p)
                    merges.append(
                        MergeRecord(sm.scenario_id, entry.uid, target_sid, target.uid)
                    )
                    continue
                table[key] = (entry, sm.probability, sm.scenario_id)
            kept.append(entry)
        sm.entries = kept
    return merges


# ---------------------------------------------------------------------------
# Reduction statistics
# ---------------------------------------------------------------------------


@dataclass
class StageSizes:
    """Raw elimination counters behind the percentage table.

    Nonzeros count reachability-row support entries plus one coefficient per
    activation variable; the cardinality row is not counted.
    """

    node_count: int = 0
    scenario_count: int = 0
    z_baseline: int = 0
    nnz_baseline: int = 0
    sna_removed_z: int = 0
    sna_removed_nnz: int = 0
    scna_removed_z: int = 0
    scna_removed_nnz: int = 0
    ina_removed_z: int = 0
    ina_removed_nnz: int = 0
    node_reduction_sum: int = 0   # sum over scenarios of (|V| - #components)
    arc_ratio_sum: float = 0.0    # sum over scenarios of removed-arc fraction


@dataclass
class PresolveStats:
    """Percentage reductions in the style of the experiment tables.

    ``scna_*`` and ``ina_*`` report reductions beyond the singleton stage;
    ``ina_*`` is cumulative over SCNA and INA. Timings are segregated from
    the structural fields so deterministic output can exclude them.
    """

    level: PresolveLevel
    sna_dz: float
    sna_dnnz: float
    scna_dv: float
    scna_dnnz: float
    scna_da: float
    ina_dz: float
    ina_dnnz: float
    sizes: StageSizes
    t_ina_seconds: float = 0.0
    t_total_seconds: float = 0.0

    CSV_HEADER = (
        "level,dZ,dNNZ,+dZ/dV,+dNNZ,dA,+dZ_INA,+dNNZ_INA,T_INA"
    )

    def csv_row(self, include_timing: bool = True) -> str:
        cells = [
            self.level.value,
            f"{self.sna_dz:.4f}",
            f"{self.sna_dnnz:.4f}",
            f"{self.scna_dv:.4f}",
            f"{self.scna_dnnz:.4f}",
            f"{self.scna_da:.4f}",
            f"{self.ina_dz:.4f}",
            f"{self.ina_dnnz:.4f}",
        ]
        cells.append(f"{self.t_ina_seconds:.3f}" if include_timing else "")
        return ",".join(cells)

    def structural_dict(self) -> dict:
        return {
            "level": self.level.value,
            "dZ": self.sna_dz,
            "dNNZ": self.sna_dnnz,
            "dZ_dV_scna": self.scna_dv,
            "dNNZ_scna": self.scna_dnnz,
            "dA_scna": self.scna_da,
            "dZ_ina": self.ina_dz,
            "dNNZ_ina": self.ina_dnnz,
        }


def reduction_stats(
    sizes: StageSizes,
    level: PresolveLevel = PresolveLevel.INA,
    t_ina: float = 0.0,
    t_total: float = 0.0,
) -> PresolveStats:
    """Turn stage counters into the percentage columns."""
    zb = max(sizes.z_baseline, 1)
    nb = max(sizes.nnz_baseline, 1)
    sc = max(sizes.scenario_count, 1)
    return PresolveStats(
        level=level,
        sna_dz=100.0 * sizes.sna_removed_z / zb,
        sna_dnnz=100.0 * sizes.sna_removed_nnz / nb,
        scna_dv=100.0 * sizes.scna_removed_z / zb,
        scna_dnnz=100.0 * sizes.scna_removed_nnz / nb,
        scna_da=100.0 * sizes.arc_ratio_sum / sc,
        ina_dz=100.0 * (sizes.scna_removed_z + sizes.ina_removed_z) / zb,
        ina_dnnz=100.0 * (sizes.scna_removed_nnz + sizes.ina_removed_nnz) / nb,
        sizes=sizes,
        t_ina_seconds=t_ina,
        t_total_seconds=t_total,
    )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def presolve_pipeline(
    scenario_set: ScenarioSet,
    level: PresolveLevel = PresolveLevel.INA,
    budget: int = 1,
    max_reac_size: int | None = None,
) -> tuple[ReducedModel, PresolveStats]:
    """Run condensation plus the reductions selected by ``level``.

    Levels nest: ``ina`` implies ``scna`` implies the singleton stage, which
    is always applied. Returns the reduced model and its reduction table.
    """
    t_start = time.perf_counter()
    if max_reac_size is None:
        max_reac_size = default_max_reac_size(scenario_set.model)

    sizes = StageSizes(
        node_count=scenario_set.node_count,
        scenario_count=len(scenario_set),
        z_baseline=scenario_set.node_count * len(scenario_set),
    )
    models: list[ScenarioModel] = []
    esize_by_scenario: list[dict[int, int]] = []
    for live in scenario_set.scenarios:
        cond = scc_decompose(live)
        reach = reach_sets(cond)
        esize = {u: reach[u].expanded_size for u in range(cond.comp_count)}
        esize_by_scenario.append(esize)

        for u, members in enumerate(cond.components):
            sizes.nnz_baseline += len(members) * (esize[u] + 1)
        sizes.node_reduction_sum += live.node_count - cond.comp_count
        if live.arc_count:
            sizes.arc_ratio_sum += (
                live.arc_count - cond.dag_arc_count
            ) / live.arc_count

        if level is PresolveLevel.DEFAULT:
            sm = per_node_slice(cond, live.probability)
        else:
            sm = apply_scna(cond, live.probability)
            sizes.scna_removed_z += live.node_count - cond.comp_count
            for u, members in enumerate(cond.components):
                sizes.scna_removed_nnz += (len(members) - 1) * (esize[u] + 1)
        before = len(sm.entries)
        apply_sna(sm)
        removed = before - len(sm.entries)
        sizes.sna_removed_z += removed
        sizes.sna_removed_nnz += 2 * removed  # each singleton row held 2 nonzeros
        models.append(sm)

    t_ina = 0.0
    merges: list[MergeRecord] = []
    if level is PresolveLevel.INA:
        t0 = time.perf_counter()
        merges = apply_ina(models, max_reac_size)
        t_ina = time.perf_counter() - t0
        for rec in merges:
            sizes.ina_removed_z += 1
            sizes.ina_removed_nnz += esize_by_scenario[rec.scenario][rec.uid] + 1

    stats = reduction_stats(
        sizes, level, t_ina=t_ina, t_total=time.perf_counter() - t_start
    )
    reduced = ReducedModel(
        node_count=scenario_set.node_count,
        budget=budget,
        level=level,
        scenarios=models,
        merges=merges,
    )
    return reduced, stats


def sizes_from_model(reduced: ReducedModel, scenario_set: ScenarioSet) -> StageSizes:
    """Recompute the stage counters from a reduced model (self-consistency check)."""
    sizes = StageSizes(
        node_count=reduced.node_count,
        scenario_count=len(reduced.scenarios),
        z_baseline=reduced.node_count * len(reduced.scenarios),
    )
    live_by_id = {s.scenario_id: s for s in scenario_set.scenarios}
    merged_by_scenario: dict[int, set[int]] = {}
    for rec in reduced.merges:
        merged_by_scenario.setdefault(rec.scenario, set()).add(rec.uid)
    for sm in reduced.scenarios:
        cond = sm.cond
        reach = reach_sets(cond)
        esize = {u: reach[u].expanded_size for u in range(cond.comp_count)}
        for u, members in enumerate(cond.components):
            sizes.nnz_baseline += len(members) * (esize[u] + 1)
        live = live_by_id[sm.scenario_id]
        sizes.node_reduction_sum += live.node_count - cond.comp_count
        if live.arc_count:
            sizes.arc_ratio_sum += (
                live.arc_count - cond.dag_arc_count
            ) / live.arc_count
        if not sm.per_node:
            sizes.scna_removed_z += live.node_count - cond.comp_count
            for u, members in enumerate(cond.components):
                sizes.scna_removed_nnz += (len(members) - 1) * (esize[u] + 1)
        sizes.sna_removed_z += len(sm.links)
        sizes.sna_removed_nnz += 2 * len(sm.links)
        for uid in merged_by_scenario.get(sm.scenario_id, ()):
            sizes.ina_removed_z += 1
            sizes.ina_removed_nnz += esize[uid] + 1
    return sizes
