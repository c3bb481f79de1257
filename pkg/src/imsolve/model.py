"""Explicit covering-model data and LP/MPS text export.

A ``MipInstance`` is the materialized 0/1 program: seed variables ``y_<id>``
(original node ids), activation variables ``z_<scenario>_<rep>``, one
reachability row per activation variable, and a single cardinality row.
Exports are plain text with 12 significant digits and can be parsed back by
this module for round-trip checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .errors import CapExceeded, ParameterError
from .presolve import ReducedModel, expand_support, reach_sets
from .sampling import LiveArcGraph, ScenarioSet

_FMT = "%.12g"


@dataclass
class MipInstance:
    name: str
    budget: int
    node_count: int
    original_ids: tuple[int, ...]          # dense node -> reported id
    y_objective: list[float]               # per dense node, folded link weights
    z_names: list[str]
    z_objective: list[float]
    rows: list[tuple[str, tuple[int, ...], int]]  # (row name, y support, z index)

    @property
    def variable_count(self) -> int:
        return self.node_count + len(self.z_names)

    @property
    def row_count(self) -> int:
        """Reachability rows plus the cardinality row."""
        return len(self.rows) + 1

    def y_name(self, node: int) -> str:
        return f"y_{self.original_ids[node]}"

    def objective_value(self, chosen: frozenset[int] | set[int]) -> float:
        """Objective of the best completion of a seed choice.

        With nonnegative weights it is optimal to raise every activation
        variable whose row support intersects the chosen seeds.
        """
        terms = [self.y_objective[j] for j in chosen if self.y_objective[j]]
        for (_, support, zi) in self.rows:
            if any(j in chosen for j in support):
                terms.append(self.z_objective[zi])
        return math.fsum(terms)

    def enumerate_optimum(self, cap: int = 10**6) -> tuple[tuple[int, ...], float]:
        """Exact optimum by enumerating seed sets of size at most the budget.

        Returns the lexicographically smallest maximizer (dense node ids).
        """
        n, k = self.node_count, min(self.budget, self.node_count)
        total = sum(math.comb(n, size) for size in range(k + 1))
        if total > cap:
            raise CapExceeded(f"{total} seed sets exceed cap {cap}", total)
        best_val = -math.inf
        best: tuple[int, ...] = ()
        for size in range(k + 1):
            for combo in itertools.combinations(range(n), size):
                val = self.objective_value(set(combo))
                if val > best_val or (val == best_val and combo < best):
                    best_val, best = val, combo
        return best, best_val


def build_full(scenarios: ScenarioSet, budget: int, name: str = "imp") -> MipInstance:
    """Materialize the unreduced covering model, one activation variable per
    node per scenario, supports computed by per-node reverse BFS on the live
    graph (independent of the condensation machinery)."""
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    n = scenarios.node_count
    original_ids = tuple(range(n))
    y_obj = [0.0] * n
    z_names: list[str] = []
    z_obj: list[float] = []
    rows: list[tuple[str, tuple[int, ...], int]] = []
    for live in scenarios.scenarios:
        for node in range(n):
            support = _reverse_bfs_nodes(live, node)
            zi = len(z_names)
            zname = f"z_{live.scenario_id}_{node}"
            z_names.append(zname)
            z_obj.append(live.probability)
            rows.append((f"r_{live.scenario_id}_{node}", support, zi))
    return MipInstance(name, budget, n, original_ids, y_obj, z_names, z_obj, rows)


def _reverse_bfs_nodes(live: LiveArcGraph, node: int) -> tuple[int, ...]:
    pred = live.pred
    seen = {node}
    frontier = [node]
    while frontier:
        nxt = []
        for v in frontier:
            for q in pred[v]:
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
        frontier = nxt
    return tuple(sorted(seen))


def build_reduced(reduced: ReducedModel, name: str = "imp_reduced") -> MipInstance:
    """Materialize the post-presolve model.

    Seed-link weights fold into the seed variables' objective coefficients;
    each surviving activation variable keeps one reachability row over its
    expanded support. Activation variables are named after the smallest
    original node in their representative component so diffs stay stable.
    """
    n = reduced.node_count
    original_ids = tuple(range(n))
    y_obj = [0.0] * n
    z_names: list[str] = []
    z_obj: list[float] = []
    rows: list[tuple[str, tuple[int, ...], int]] = []
    for sm in reduced.scenarios:
        for node, mass in sm.links:
            y_obj[node] += sm.probability * mass
        reach = reach_sets(sm.cond)
        for e in sm.entries:
            support = expand_support(sm.cond, reach[e.comp].comp_ids)
            rep = e.uid if sm.per_node else min(sm.cond.components[e.comp])
            zi = len(z_names)
            z_names.append(f"z_{sm.scenario_id}_{rep}")
            z_obj.append(sm.probability * e.mass)
            rows.append((f"r_{sm.scenario_id}_{rep}", support, zi))
    return MipInstance(
        name, reduced.budget, n, original_ids, y_obj, z_names, z_obj, rows
    )


def relabel(instance: MipInstance, original_ids: tuple[int, ...]) -> MipInstance:
    """Attach the network's original node ids for export naming."""
    instance.original_ids = original_ids
    return instance


# ---------------------------------------------------------------------------
# LP format
# ---------------------------------------------------------------------------


def export_lp(instance: MipInstance) -> str:
    out = [f"\\ {instance.name}", "Maximize", " obj:"]
    terms = []
    for j in range(instance.node_count):
        if instance.y_objective[j] != 0.0:
            terms.append((instance.y_objective[j], instance.y_name(j)))
    for zname, w in zip(instance.z_names, instance.z_objective):
        if w != 0.0:
            terms.append((w, zname))
    if not terms:
        terms.append((0.0, instance.y_name(0)))
    body = " ".join(
        f"{'+' if c >= 0 else '-'} {_FMT % abs(c)} {v}" for c, v in terms
    )
    out[-1] = f" obj: {body}"
    out.append("Subject To")
    for rname, support, zi in instance.rows:
        lhs = " + ".join(instance.y_name(j) for j in support)
        out.append(f" {rname}: {lhs} - {instance.z_names[zi]} >= 0")
    card = " + ".join(instance.y_name(j) for j in range(instance.node_count))
    out.append(f" card: {card} <= {instance.budget}")
    out.append("Binaries")
    names = [instance.y_name(j) for j in range(instance.node_count)]
    names.extend(instance.z_names)
    for i in range(0, len(names), 8):
        out.append(" " + " ".join(names[i : i + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


def parse_lp(text: str) -> MipInstance:
    """Parse LP text produced by export_lp back into a MipInstance."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("\\")]
    section = None
    name = "parsed"
    obj_terms: dict[str, float] = {}
    raw_rows: list[tuple[str, list[str], str]] = []
    y_seen: set[str] = set()
    budget = None
    for ln in lines:
        low = ln.lower()
        if low == "maximize":
            section = "obj"
            continue
        if low == "subject to":
            section = "rows"
            continue
        if low == "binaries":
            section = "bin"
            continue
        if low == "end":
            break
        if section == "obj":
            body = ln.split(":", 1)[1] if ":" in ln else ln
            toks = body.split()
            i = 0
            while i < len(toks):
                sign = 1.0
                if toks[i] in "+-":
                    sign = -1.0 if toks[i] == "-" else 1.0
                    i += 1
                coef = float(toks[i])
                var = toks[i + 1]
                obj_terms[var] = obj_terms.get(var, 0.0) + sign * coef
                i += 2
        elif section == "rows":
            rname, body = ln.split(":", 1)
            rname = rname.strip()
            if "<=" in body:
                lhs, rhs = body.split("<=")
                if rname == "card":
                    budget = int(float(rhs))
                    y_seen.update(t for t in lhs.split() if t not in "+-")
                continue
            lhs, _ = body.split(">=")
            toks = lhs.split()
            plus: list[str] = []
            minus: list[str] = []
            sign = 1.0
            for tok in toks:
                if tok == "+":
                    sign = 1.0
                elif tok == "-":
                    sign = -1.0
                else:
                    (plus if sign > 0 else minus).append(tok)
                    sign = 1.0
            raw_rows.append((rname, plus, minus[0]))
    if budget is None:
        raise ParameterError("LP text lacks a cardinality row named 'card'")
    return _assemble(name, budget, obj_terms, raw_rows, y_seen)


# ---------------------------------------------------------------------------
# MPS format
# ---------------------------------------------------------------------------


def export_mps(instance: MipInstance) -> str:
    out = [f"NAME {instance.name}", "ROWS", " N obj"]
    for rname, _, _ in instance.rows:
        out.append(f" G {rname}")
    out.append(" L card")
    out.append("COLUMNS")
    out.append(" MARKER 'MARKER' 'INTORG'")
    # y columns: objective, membership rows, cardinality row
    row_of_y: dict[int, list[str]] = {j: [] for j in range(instance.node_count)}
    for rname, support, _ in instance.rows:
        for j in support:
            row_of_y[j].append(rname)
    for j in range(instance.node_count):
        yname = instance.y_name(j)
        if instance.y_objective[j] != 0.0:
            out.append(f" {yname} obj {_FMT % instance.y_objective[j]}")
        for rname in row_of_y[j]:
            out.append(f" {yname} {rname} 1")
        out.append(f" {yname} card 1")
    for (rname, _, zi) in instance.rows:
        zname = instance.z_names[zi]
        if instance.z_objective[zi] != 0.0:
            out.append(f" {zname} obj {_FMT % instance.z_objective[zi]}")
        out.append(f" {zname} {rname} -1")
    out.append(" MARKER 'MARKER' 'INTEND'")
    out.append("RHS")
    out.append(f" rhs card {instance.budget}")
    out.append("BOUNDS")
    for j in range(instance.node_count):
        out.append(f" BV bnd {instance.y_name(j)}")
    for zname in instance.z_names:
        out.append(f" BV bnd {zname}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def parse_mps(text: str) -> MipInstance:
    """Parse MPS text produced by export_mps back into a MipInstance."""
    section = None
    name = "parsed"
    obj_terms: dict[str, float] = {}
    row_support: dict[str, list[str]] = {}
    row_z: dict[str, str] = {}
    row_order: list[str] = []
    y_seen: set[str] = set()
    budget = None
    for raw in text.splitlines():
        ln = raw.strip()
        if not ln or ln.startswith("*"):
            continue
        head = ln.split()
        if head[0] == "NAME":
            name = head[1] if len(head) > 1 else name
            continue
        if head[0] in {"ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES"}:
            section = head[0]
            continue
        if head[0] == "ENDATA":
            break
        if section == "ROWS":
            sense, rname = head[0], head[1]
            if sense == "G":
                row_order.append(rname)
                row_support[rname] = []
            continue
        if section == "COLUMNS":
            if "'MARKER'" in ln:
                continue
            col = head[0]
            for rname, value in zip(head[1::2], head[2::2]):
                v = float(value)
                if rname == "obj":
                    obj_terms[col] = obj_terms.get(col, 0.0) + v
                elif rname == "card":
                    y_seen.add(col)  # every seed variable sits in the cardinality row
                elif v < 0:
                    row_z[rname] = col
                else:
                    row_support[rname].append(col)
            continue
        if section == "RHS":
            for rname, value in zip(head[1::2], head[2::2]):
                if rname == "card":
                    budget = int(float(value))
    if budget is None:
        raise ParameterError("MPS text lacks a cardinality RHS")
    raw_rows = [(r, row_support[r], row_z[r]) for r in row_order]
    return _assemble(name, budget, obj_terms, raw_rows, y_seen)


def _assemble(
    name: str,
    budget: int,
    obj_terms: dict[str, float],
    raw_rows: list[tuple[str, list[str], str]],
    y_seen: set[str] = frozenset(),  # type: ignore[assignment]
) -> MipInstance:
    y_ids = {int(v.split("_", 1)[1]) for v in y_seen}
    for _, support, _ in raw_rows:
        for v in support:
            y_ids.add(int(v.split("_", 1)[1]))
    for v in obj_terms:
        if v.startswith("y_"):
            y_ids.add(int(v.split("_", 1)[1]))
    original_ids = tuple(sorted(y_ids))
    dense = {orig: i for i, orig in enumerate(original_ids)}
    n = len(original_ids)
    y_obj = [obj_terms.get(f"y_{orig}", 0.0) for orig in original_ids]
    z_names: list[str] = []
    z_obj: list[float] = []
    rows: list[tuple[str, tuple[int, ...], int]] = []
    for rname, support, zname in raw_rows:
        zi = len(z_names)
        z_names.append(zname)
        z_obj.append(obj_terms.get(zname, 0.0))
        rows.append(
            (rname, tuple(sorted(dense[int(v.split("_", 1)[1])] for v in support)), zi)
        )
    return MipInstance(name, budget, n, original_ids, y_obj, z_names, z_obj, rows)


def export(instance: MipInstance, fmt: str) -> str:
    """Dispatch on the format tag ('lp' or 'mps')."""
    tag = fmt.lower()
    if tag == "lp":
        return export_lp(instance)
    if tag == "mps":
        return export_mps(instance)
    raise ParameterError(f"unsupported export format {fmt!r}")
