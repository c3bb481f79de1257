"""Live-arc scenario generation for ICM and LTM diffusion.

Sampling uses a counter-based RNG (Philox) keyed by (seed, scenario id), so
scenario ``k`` of a set is bit-identical no matter how many scenarios are drawn,
in what order, or across how many workers.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import CapExceeded, ParameterError
from .network import DiffusionParams, Model, SocialNetwork

EXHAUSTIVE_CAP_DEFAULT = 2**20
_U64 = 0xFFFFFFFFFFFFFFFF


class ScenarioMode(str, Enum):
    SAMPLED = "sampled"
    EXHAUSTIVE = "exhaustive"


@dataclass
class LiveArcGraph:
    """One scenario: the subset of arcs that are live, with its probability."""

    scenario_id: int
    node_count: int
    arcs: tuple[tuple[int, int], ...]  # live (src, dst) pairs, sorted
    probability: float

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for src, dst in self.arcs:
            adj[src].append(dst)
        return tuple(tuple(a) for a in adj)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for src, dst in self.arcs:
            adj[dst].append(src)
        return tuple(tuple(a) for a in adj)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)


@dataclass
class ScenarioSet:
    scenarios: list[LiveArcGraph]
    mode: ScenarioMode
    node_count: int
    model: Model
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def total_probability(self) -> float:
        return float(sum(s.probability for s in self.scenarios))


def _scenario_rng(seed: int, scenario_id: int) -> np.random.Generator:
    key = np.array([seed & _U64, scenario_id & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_icm(
    network: SocialNetwork, params: DiffusionParams, count: int, seed: int
) -> ScenarioSet:
    """Draw ``count`` equiprobable live-arc graphs, each arc an independent Bernoulli."""
    if params.model is not Model.ICM:
        raise ParameterError("sample_icm requires ICM parameters")
    if count < 1:
        raise ParameterError("scenario count must be >= 1")
    pi = np.asarray(params.values)
    pairs = [(src, dst) for src, dst, _ in network.arcs]
    prob = 1.0 / count
    scenarios = []
    for omega in range(count):
        u = _scenario_rng(seed, omega).random(len(pairs))
        live = tuple(pairs[i] for i in np.flatnonzero(u < pi))
        scenarios.append(
            LiveArcGraph(omega, network.node_count, live, prob)
        )
    return ScenarioSet(scenarios, ScenarioMode.SAMPLED, network.node_count, Model.ICM, seed)


def sample_ltm(
    network: SocialNetwork, params: DiffusionParams, count: int, seed: int
) -> ScenarioSet:
    """Draw ``count`` equiprobable live-arc graphs with at most one live incoming
    arc per node, chosen categorically by the node's incoming weights."""
    if params.model is not Model.LTM:
        raise ParameterError("sample_ltm requires LTM parameters")
    if count < 1:
        raise ParameterError("scenario count must be >= 1")
    # Per node: incoming (src, weight) in ascending src order, then cumulative
    # thresholds; one uniform per node selects an arc or none.
    incoming: list[list[tuple[int, float]]] = [[] for _ in range(network.node_count)]
    for (src, dst, _), w in zip(network.arcs, params.values):
        incoming[dst].append((src, w))
    cumulative: list[tuple[tuple[int, ...], np.ndarray]] = []
    for lst in incoming:
        lst.sort()
        srcs = tuple(s for s, _ in lst)
        cum = np.cumsum([w for _, w in lst]) if lst else np.empty(0)
        cumulative.append((srcs, cum))

    prob = 1.0 / count
    scenarios = []
    for omega in range(count):
        u = _scenario_rng(seed, omega).random(network.node_count)
        live: list[tuple[int, int]] = []
        for node in range(network.node_count):
            srcs, cum = cumulative[node]
            if not srcs:
                continue
            k = int(np.searchsorted(cum, u[node], side="right"))
            if k < len(srcs):
                live.append((srcs[k], node))
        live.sort()
        scenarios.append(
            LiveArcGraph(omega, network.node_count, tuple(live), prob)
        )
    return ScenarioSet(scenarios, ScenarioMode.SAMPLED, network.node_count, Model.LTM, seed)


def enumerate_scenarios(
    network: SocialNetwork, params: DiffusionParams, cap: int = EXHAUSTIVE_CAP_DEFAULT
) -> ScenarioSet:
    """Enumerate every possible live-arc graph with its exact product probability.

    Outcomes of probability exactly 0 (a sure arc missing, or the no-arc
    choice of a node whose incoming weights sum to 1) are dropped; when all
    choice probabilities are interior the count is exactly 2^arcs for ICM and
    prod(in-neighbors+1) for LTM. Refuses when that space exceeds ``cap``.
    """
    if params.model is Model.ICM:
        size = 2.0 ** network.arc_count
        if size > cap:
            raise CapExceeded(
                f"exhaustive ICM needs {size:.3g} scenarios (cap {cap})", size
            )
        return _enumerate_icm(network, params)
    size = 1.0
    in_neighbors: list[set[int]] = [set() for _ in range(network.node_count)]
    for src, dst, _ in network.arcs:
        in_neighbors[dst].add(src)
    for nbrs in in_neighbors:
        size *= len(nbrs) + 1
    if size > cap:
        raise CapExceeded(
            f"exhaustive LTM needs {size:.3g} scenarios (cap {cap})", size
        )
    return _enumerate_ltm(network, params)


def _enumerate_icm(network: SocialNetwork, params: DiffusionParams) -> ScenarioSet:
    pairs = [(src, dst) for src, dst, _ in network.arcs]
    pi = params.values
    n_arcs = len(pairs)
    scenarios = []
    for mask in range(2**n_arcs):
        p = 1.0
        live = []
        for i in range(n_arcs):
            if mask >> i & 1:
                p *= pi[i]
                live.append(pairs[i])
            else:
                p *= 1.0 - pi[i]
        if p > 0.0:
            scenarios.append(
                LiveArcGraph(len(scenarios), network.node_count, tuple(sorted(live)), p)
            )
    return ScenarioSet(scenarios, ScenarioMode.EXHAUSTIVE, network.node_count, Model.ICM)


def _enumerate_ltm(network: SocialNetwork, params: DiffusionParams) -> ScenarioSet:
    incoming: list[list[tuple[int, float]]] = [[] for _ in range(network.node_count)]
    for (src, dst, _), w in zip(network.arcs, params.values):
        incoming[dst].append((src, w))
    # Per node: the choice list is each incoming arc, then "none" with the
    # leftover probability.
    choices: list[list[tuple[int | None, float]]] = []
    for node, lst in enumerate(incoming):
        lst.sort()
        opts: list[tuple[int | None, float]] = [(src, w) for src, w in lst]
        opts.append((None, 1.0 - sum(w for _, w in lst)))
        choices.append(opts)

    scenarios = []
    for combo in itertools.product(*choices):
        p = 1.0
        live = []
        for node, (src, w) in enumerate(combo):
            p *= w
            if src is not None:
                live.append((src, node))
        if p > 0.0:
            scenarios.append(
                LiveArcGraph(len(scenarios), network.node_count, tuple(sorted(live)), p)
            )
    return ScenarioSet(scenarios, ScenarioMode.EXHAUSTIVE, network.node_count, Model.LTM)


def to_container(
    scenario_set: ScenarioSet,
    network: SocialNetwork,
    params: DiffusionParams | None = None,
) -> dict:
    """JSON-serializable container: seed, model, parameters, per-scenario subsets."""
    arc_index = {(src, dst): i for i, (src, dst, _) in enumerate(network.arcs)}
    body = {
        "format": "imsolve-scenarios-v1",
        "model": scenario_set.model.value,
        "mode": scenario_set.mode.value,
        "seed": scenario_set.seed,
        "node_count": scenario_set.node_count,
        "original_ids": list(network.original_ids),
        "arcs": [[src, dst] for src, dst, _ in network.arcs],
        "arc_values": list(params.values) if params is not None else None,
        "probabilities": [s.probability for s in scenario_set.scenarios],
        "scenarios": [
            [arc_index[a] for a in s.arcs] for s in scenario_set.scenarios
        ],
    }
    digest = hashlib.sha256(
        json.dumps(body, sort_keys=True).encode()
    ).hexdigest()
    body["checksum"] = digest
    return body


def from_container(container: dict) -> ScenarioSet:
    if container.get("format") != "imsolve-scenarios-v1":
        raise ParameterError("unrecognized scenario container format")
    pairs = [tuple(a) for a in container["arcs"]]
    node_count = container["node_count"]
    scenarios = []
    for sid, (ids, p) in enumerate(
        zip(container["scenarios"], container["probabilities"])
    ):
        live = tuple(sorted(pairs[i] for i in ids))
        scenarios.append(LiveArcGraph(sid, node_count, live, p))
    return ScenarioSet(
        scenarios,
        ScenarioMode(container["mode"]),
        node_count,
        Model(container["model"]),
        container.get("seed"),
    )
