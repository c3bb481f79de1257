"""Shared instance generators for the test suite."""

from __future__ import annotations

import io

import numpy as np
import pytest

from imsolve.network import SocialNetwork, icm_params, load_edge_list, ltm_params
from imsolve.sampling import ScenarioSet, enumerate_scenarios, sample_icm, sample_ltm


def random_network(
    rng: np.random.Generator, max_nodes: int = 10, max_arcs: int = 30
) -> SocialNetwork:
    n = int(rng.integers(2, max_nodes + 1))
    n_arcs = int(rng.integers(1, max_arcs + 1))
    seen: dict[tuple[int, int], int] = {}
    for _ in range(n_arcs):
        i, j = int(rng.integers(n)), int(rng.integers(n))
        seen[(i, j)] = seen.get((i, j), 0) + 1
    arcs = tuple(sorted((i, j, m) for (i, j), m in seen.items()))
    return SocialNetwork(n, arcs, True, tuple(range(n)))


def ltm_choice_space(network: SocialNetwork) -> int:
    """Number of positive-probability scenario combinations under LTM weights."""
    in_deg = [0] * network.node_count
    for _, dst, _ in network.arcs:
        in_deg[dst] += 1
    space = 1
    for d in in_deg:
        space *= max(d, 1)  # normalized weights leave no positive no-arc branch
    return space


def random_scenarios(
    rng: np.random.Generator, network: SocialNetwork
) -> ScenarioSet:
    """Random scenario set: ICM or LTM, sampled or (when tiny) exhaustive.

    Exhaustive sets stay within 8 scenarios so the whole suite matches the
    acceptance ensemble.
    """
    use_icm = rng.random() < 0.5
    exhaustive = rng.random() < 0.3
    count = int(rng.integers(1, 9))
    seed = int(rng.integers(10**6))
    if use_icm:
        params = icm_params(network, float(rng.uniform(0.2, 0.95)))
        if exhaustive and network.arc_count <= 3:
            return enumerate_scenarios(network, params)
        return sample_icm(network, params, count, seed)
    params = ltm_params(network)
    if exhaustive and ltm_choice_space(network) <= 8:
        return enumerate_scenarios(network, params)
    return sample_ltm(network, params, count, seed)


def oracle_suite(seed: int = 20240517, count: int = 32):
    """The shared tiny-instance suite: (network, scenario set, budget) triples.

    The first four instances pin down every model/mode combination (ICM and
    LTM, sampled and exhaustive); the rest are random.
    """
    rng = np.random.default_rng(seed)
    out = []

    small = random_network(rng, max_nodes=5, max_arcs=3)
    out.append((small, enumerate_scenarios(small, icm_params(small, 0.55)), 2))
    ltm_net = random_network(rng, max_nodes=6, max_arcs=6)
    while ltm_choice_space(ltm_net) > 8:
        ltm_net = random_network(rng, max_nodes=6, max_arcs=6)
    out.append((ltm_net, enumerate_scenarios(ltm_net, ltm_params(ltm_net)), 2))
    icm_net = random_network(rng)
    out.append((icm_net, sample_icm(icm_net, icm_params(icm_net, 0.5), 8, 77), 3))
    ltm_net2 = random_network(rng)
    out.append((ltm_net2, sample_ltm(ltm_net2, ltm_params(ltm_net2), 8, 78), 3))

    while len(out) < count:
        network = random_network(rng)
        scen = random_scenarios(rng, network)
        budget = int(rng.integers(1, 4))
        out.append((network, scen, budget))
    return out


def figure_network() -> SocialNetwork:
    """Five nodes: a 2-cycle {1,2} feeding a 3-cycle {3,4,5} through arc 2->3."""
    text = "1 2\n2 1\n3 4\n4 5\n5 3\n2 3\n"
    return load_edge_list(io.StringIO(text))


def star_network(leaves: int) -> SocialNetwork:
    arcs = tuple((0, j, 1) for j in range(1, leaves + 1))
    return SocialNetwork(leaves + 1, arcs, True, tuple(range(leaves + 1)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(987654321)
