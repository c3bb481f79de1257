"""Directed-multigraph representation of a social network.

Node ids in input files may be arbitrary non-negative integers; internally
nodes are re-indexed to dense ids ``0..n-1`` (ascending original id) and the
remap is kept on the network so results can be reported in original ids.
Parallel arcs are aggregated into a single arc with a multiplicity count.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, TextIO

from .errors import EdgeListError, ParameterError


class Model(str, Enum):
    ICM = "icm"
    LTM = "ltm"


@dataclass(frozen=True)
class SocialNetwork:
    """A directed multigraph with per-arc multiplicities.

    ``arcs`` holds one entry per distinct ordered pair, sorted by (src, dst),
    with ``multiplicity >= 1``. ``original_ids[i]`` is the id node ``i`` had in
    the source file. Instances are immutable and safe to share across workers.
    """

    node_count: int
    arcs: tuple[tuple[int, int, int], ...]  # (src, dst, multiplicity)
    directed: bool
    original_ids: tuple[int, ...]

    @property
    def arc_count(self) -> int:
        """Number of distinct arcs (parallel arcs count once)."""
        return len(self.arcs)

    def dense_id(self, original: int) -> int:
        return self._to_dense[original]

    @property
    def _to_dense(self) -> dict[int, int]:
        cached = self.__dict__.get("_to_dense_cache")
        if cached is None:
            cached = {orig: i for i, orig in enumerate(self.original_ids)}
            object.__setattr__(self, "_to_dense_cache", cached)
        return cached

    def out_adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for src, dst, _ in self.arcs:
            adj[src].append(dst)
        return adj

    def in_adjacency(self) -> list[list[tuple[int, int]]]:
        """Per node, incoming (src, multiplicity) pairs sorted by src."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.node_count)]
        for src, dst, mult in self.arcs:
            adj[dst].append((src, mult))
        return adj

    def to_edge_list_text(self) -> str:
        """Serialize back to the edge-list format accepted by load_edge_list.

        Directed networks emit one line per parallel arc. Undirected networks
        emit each unordered pair once (the reciprocal arc is implied on load).
        """
        lines: list[str] = []
        for src, dst, mult in self.arcs:
            if not self.directed and src > dst:
                continue  # reciprocal of an already-emitted pair
            o_src, o_dst = self.original_ids[src], self.original_ids[dst]
            lines.extend(f"{o_src} {o_dst}" for _ in range(mult))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DiffusionParams:
    """Per-arc diffusion values aligned with ``SocialNetwork.arcs``."""

    model: Model
    values: tuple[float, ...]


def load_edge_list(stream: TextIO | Iterable[str], undirected: bool = False) -> SocialNetwork:
    """Parse a whitespace-separated "src dst" edge list into a SocialNetwork.

    Lines starting with '#' are skipped. Duplicate lines increase the arc's
    multiplicity. With ``undirected=True`` each input edge contributes both
    (i, j) and (j, i) with the same multiplicity; a self-loop contributes a
    single arc (i, i) once per input line.
    """
    counts: dict[tuple[int, int], int] = {}
    seen: set[int] = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected 'src dst', got {line!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer node id in {line!r}") from None
        if src < 0 or dst < 0:
            raise EdgeListError(f"line {lineno}: negative node id in {line!r}")
        seen.add(src)
        seen.add(dst)
        counts[(src, dst)] = counts.get((src, dst), 0) + 1
        if undirected and src != dst:
            counts[(dst, src)] = counts.get((dst, src), 0) + 1
    if not seen:
        raise EdgeListError("empty graph: no edges found")

    original_ids = tuple(sorted(seen))
    to_dense = {orig: i for i, orig in enumerate(original_ids)}
    arcs = tuple(
        sorted((to_dense[s], to_dense[d], m) for (s, d), m in counts.items())
    )
    return SocialNetwork(
        node_count=len(original_ids),
        arcs=arcs,
        directed=not undirected,
        original_ids=original_ids,
    )


def icm_params(network: SocialNetwork, p: float) -> DiffusionParams:
    """Arc activation probabilities 1 - (1-p)^multiplicity for a base p."""
    if not 0.0 < p <= 1.0:
        raise ParameterError(f"activation probability must be in (0, 1], got {p}")
    # multiplicity 1 reduces to p exactly; the pow form would lose an ulp
    values = tuple(
        p if mult == 1 else 1.0 - (1.0 - p) ** mult for _, _, mult in network.arcs
    )
    return DiffusionParams(model=Model.ICM, values=values)


def ltm_params(network: SocialNetwork) -> DiffusionParams:
    """Arc weights multiplicity / (total incoming multiplicity of the head node).

    Weights into each node with at least one incoming arc sum to 1 exactly.
    """
    in_total = [0] * network.node_count
    for _, dst, mult in network.arcs:
        in_total[dst] += mult
    values = tuple(mult / in_total[dst] for _, dst, mult in network.arcs)
    return DiffusionParams(model=Model.LTM, values=values)


def density(network: SocialNetwork) -> float:
    """Distinct-arc count divided by node count."""
    if network.node_count == 0:
        return 0.0
    return network.arc_count / network.node_count


def validate_params(network: SocialNetwork, params: DiffusionParams) -> None:
    """Check the per-model admissibility invariants; raise ParameterError if violated."""
    if len(params.values) != network.arc_count:
        raise ParameterError("parameter vector length does not match arc count")
    if params.model is Model.ICM:
        if any(not 0.0 < v <= 1.0 for v in params.values):
            raise ParameterError("ICM probabilities must lie in (0, 1]")
    else:
        if any(v < 0.0 for v in params.values):
            raise ParameterError("LTM weights must be nonnegative")
        in_sum = [0.0] * network.node_count
        for (_, dst, _), v in zip(network.arcs, params.values):
            in_sum[dst] += v
        # equality is common (normalized instances); only a true excess is an error
        if any(s > 1.0 + 1e-12 for s in in_sum):
            raise ParameterError("LTM weights into a node exceed 1")
