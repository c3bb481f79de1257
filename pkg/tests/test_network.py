import io
import math

import pytest
from hypothesis import given, strategies as st

from imsolve.errors import EdgeListError, ParameterError
from imsolve.network import (
    SocialNetwork,
    density,
    icm_params,
    load_edge_list,
    ltm_params,
    validate_params,
)


def load(text: str, undirected: bool = False) -> SocialNetwork:
    return load_edge_list(io.StringIO(text), undirected=undirected)


class TestLoadEdgeList:
    def test_directed_pair(self):
        net = load("0 1\n1 0\n")
        assert net.node_count == 2
        assert net.arcs == ((0, 1, 1), (1, 0, 1))

    def test_duplicate_lines_aggregate(self):
        net = load("0 1\n0 1\n")
        assert net.arcs == ((0, 1, 2),)

    def test_undirected_adds_reciprocal(self):
        net = load("0 1\n", undirected=True)
        assert net.arcs == ((0, 1, 1), (1, 0, 1))
        assert net.directed is False

    def test_comments_and_blanks_skipped(self):
        net = load("# header\n\n0 1\n")
        assert net.arc_count == 1

    def test_sparse_ids_densified(self):
        net = load("10 500\n500 99\n")
        assert net.original_ids == (10, 99, 500)
        assert net.dense_id(500) == 2
        assert net.arcs == ((0, 2, 1), (2, 1, 1))

    def test_self_loop_kept_once_even_undirected(self):
        net = load("3 3\n", undirected=True)
        assert net.arcs == ((0, 0, 1),)

    def test_malformed_line_reports_number(self):
        with pytest.raises(EdgeListError, match="line 2"):
            load("0 1\n0 one\n")

    def test_empty_graph_rejected(self):
        with pytest.raises(EdgeListError):
            load("# nothing\n")

    def test_round_trip(self):
        net = load("4 7\n7 4\n4 7\n9 9\n")
        again = load(net.to_edge_list_text())
        assert again == net

    def test_round_trip_undirected(self):
        net = load("1 2\n2 3\n1 2\n", undirected=True)
        again = load(net.to_edge_list_text(), undirected=True)
        assert again == net


class TestDiffusionParams:
    def test_icm_single_arc(self):
        net = load("0 1\n")
        assert icm_params(net, 0.1).values == (0.1,)

    def test_icm_multiplicity_two(self):
        net = load("0 1\n0 1\n")
        assert icm_params(net, 0.1).values[0] == pytest.approx(0.19, abs=1e-15)

    def test_icm_certain(self):
        net = load("0 1\n0 1\n0 2\n")
        assert all(v == 1.0 for v in icm_params(net, 1.0).values)

    def test_icm_rejects_out_of_range(self):
        net = load("0 1\n")
        for bad in (0.0, -0.2, 1.5):
            with pytest.raises(ParameterError):
                icm_params(net, bad)

    def test_ltm_normalizes_incoming(self):
        net = load("0 2\n0 2\n1 2\n")  # multiplicities 2 and 1 into node 2
        params = ltm_params(net)
        by_arc = dict(zip(net.arcs, params.values))
        assert by_arc[(0, 2, 2)] == pytest.approx(2 / 3)
        assert by_arc[(1, 2, 1)] == pytest.approx(1 / 3)

    def test_ltm_single_incoming_is_one(self):
        net = load("0 1\n")
        assert ltm_params(net).values == (1.0,)

    def test_ltm_sums_to_one_exactly(self):
        net = load("0 3\n1 3\n2 3\n1 4\n2 4\n")
        params = ltm_params(net)
        incoming: dict[int, list[float]] = {}
        for (src, dst, _), v in zip(net.arcs, params.values):
            incoming.setdefault(dst, []).append(v)
        for vals in incoming.values():
            assert abs(math.fsum(vals) - 1.0) <= 1e-12

    def test_validate_params_catches_overweight(self):
        net = load("0 1\n")
        from imsolve.network import DiffusionParams, Model

        with pytest.raises(ParameterError):
            validate_params(net, DiffusionParams(Model.LTM, (1.5,)))

    @given(
        p_lo=st.floats(0.01, 0.99),
        bump=st.floats(0.001, 0.5),
        mult=st.integers(1, 6),
    )
    def test_icm_monotone_in_p_and_multiplicity(self, p_lo, bump, mult):
        p_hi = min(1.0, p_lo + bump)
        lo = 1.0 - (1.0 - p_lo) ** mult
        hi = 1.0 - (1.0 - p_hi) ** mult
        more = 1.0 - (1.0 - p_lo) ** (mult + 1)
        assert hi >= lo
        assert more >= lo


class TestDensity:
    def test_msg_like_counts(self):
        # 1899 nodes, 59835 distinct arcs, density rounds to 31.5
        n, total = 1899, 59835
        arcs = [
            (src, (src + k + 1) % n, 1) for src in range(n) for k in range(32)
        ]
        arcs = sorted(arcs)[:total]
        net = SocialNetwork(n, tuple(arcs), True, tuple(range(n)))
        assert net.arc_count == total
        assert round(density(net), 1) == 31.5

    def test_two_nodes_two_arcs(self):
        net = load("0 1\n1 0\n")
        assert density(net) == 1.0

    def test_arcless_is_zero(self):
        net = SocialNetwork(5, (), True, tuple(range(5)))
        assert density(net) == 0.0
