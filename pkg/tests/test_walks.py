"""Random-walk kernel and start-policy tests."""

import numpy as np
import pytest

from netconformal.graphs import Graph, NodeDataset
from netconformal.rng import substream
from netconformal.walks import StartPolicy, choose_walk_start, random_walk

CHI2_1DF_99 = 6.634896601021213  # 1% critical value, 1 degree of freedom


def test_forced_alternation_on_single_edge():
    g = Graph.path(2)
    trace = random_walk(g, 0, 7, substream(12, 0))
    assert trace.nodes == (0, 1, 0, 1, 0, 1, 0, 1)


def test_walk_stays_in_component():
    g = Graph.from_edges(5, [(0, 1), (2, 3), (3, 4)])
    trace = random_walk(g, 2, 200, substream(12, 1))
    assert set(trace.nodes) <= {2, 3, 4}


def test_degree_zero_node_is_an_error():
    g = Graph.from_edges(3, [(1, 2)])
    with pytest.raises(RuntimeError, match="degree-0"):
        random_walk(g, 0, 1, substream(12, 2))


def test_uniform_next_step_chi_square():
    # From the triangle's node 0 the next state is uniform on {1, 2}; the
    # frequency test over 10^4 single steps passes at the 1% level.
    g = Graph.complete(3)
    rng = substream(12, 3)
    count1 = sum(random_walk(g, 0, 1, rng).nodes[1] == 1 for _ in range(10_000))
    expected = 5000.0
    chi2 = (count1 - expected) ** 2 / expected + ((10_000 - count1) - expected) ** 2 / expected
    assert chi2 < CHI2_1DF_99


def test_trace_length_and_adjacency():
    rng = substream(12, 4)
    adj = (rng.uniform(size=(10, 10)) < 0.5).astype(np.uint8)
    adj = np.triu(adj, 1)
    adj = adj + adj.T
    adj[0, 1] = adj[1, 0] = 1  # keep the start connected
    g = Graph(adj)
    trace = random_walk(g, 0, 50, rng)
    assert len(trace) == 51
    for a, b in zip(trace.nodes, trace.nodes[1:]):
        assert g.adj[a, b] == 1


class TestStartPolicies:
    def _dataset(self):
        g = Graph.star(3)
        return NodeDataset(y=np.zeros(4), x=np.zeros((4, 1)), graph=g)

    def test_fixed(self):
        assert choose_walk_start(self._dataset(), StartPolicy("fixed", node=3), substream(13, 0)) == 3

    def test_max_degree_on_star_is_center(self):
        assert choose_walk_start(self._dataset(), StartPolicy("max_degree"), substream(13, 1)) == 0

    def test_degree_threshold_enumerates_qualifying_set(self):
        # star center has degree 3; leaves degree 1: threshold 2 selects the center
        ds = self._dataset()
        rng = substream(13, 2)
        qualifying = {
            choose_walk_start(ds, StartPolicy("degree_threshold", threshold=2), rng)
            for _ in range(20)
        }
        assert qualifying == {0}

    def test_degree_threshold_no_qualifying_node(self):
        with pytest.raises(ValueError, match="no node"):
            choose_walk_start(
                self._dataset(), StartPolicy("degree_threshold", threshold=10), substream(13, 3)
            )

    def test_uniform_hits_all_nodes(self):
        ds = self._dataset()
        rng = substream(13, 4)
        seen = {choose_walk_start(ds, StartPolicy("uniform"), rng) for _ in range(200)}
        assert seen == {0, 1, 2, 3}

    def test_parse_round_trip(self):
        for text in ("uniform", "fixed:3", "max_degree", "degree_threshold:4.5"):
            assert StartPolicy.parse(text).describe() == text
        with pytest.raises(ValueError):
            StartPolicy.parse("nonsense")


def test_trace_json_shape():
    g = Graph.path(3)
    trace = random_walk(g, 1, 2, substream(13, 5), start_rule="fixed:1")
    payload = trace.to_json_dict()
    assert payload["start"] == 1
    assert len(payload["nodes"]) == 3
    assert payload["start_rule"] == "fixed:1"
