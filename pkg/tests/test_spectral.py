"""Spectral diagnostics: closed forms, exact hand values, and bound checks."""

import numpy as np
import pytest

from netconformal.generators import (
    GraphonSpec,
    kernel_by_name,
    min_graphon_eigenvalue,
    sample_graphon_graph,
)
from netconformal.graphs import Graph
from netconformal.rng import substream
from netconformal.spectral import (
    connected_components,
    eigengap,
    fit_geometric_envelope,
    is_bipartite,
    kernel_operator_eig_check,
    lovasz_bound,
    normalized_adjacency_eigs,
    spectral_report,
    stationary_distribution,
    transition_matrix,
    tv_mixing_curve,
)

# Floating-point floor for exact-propagation TV values; see the bound checks.
TV_NUMERICAL_SLACK = 1e-10


def _er_graph(seed, n, p):
    rng = substream(50, seed)
    adj = (rng.uniform(size=(n, n)) < p).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    adj = np.triu(adj, 1)
    adj = adj + adj.T
    return Graph(adj)


class TestSpectrum:
    def test_complete_graph_closed_form(self):
        # K_n normalized adjacency: eigenvalue 1 once, -1/(n-1) with
        # multiplicity n-1.
        n = 7
        eigs = normalized_adjacency_eigs(Graph.complete(n))
        assert eigs[0] == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(eigs[1:], -1.0 / (n - 1), atol=1e-10)

    def test_single_edge_spectrum(self):
        eigs = normalized_adjacency_eigs(Graph.path(2))
        assert np.allclose(eigs, [1.0, -1.0], atol=1e-12)

    def test_spectrum_lies_in_unit_interval(self):
        for seed in range(10):
            g = _er_graph(seed, 40, 0.3)
            if g.degrees().min() == 0:
                continue
            eigs = normalized_adjacency_eigs(g)
            assert eigs.max() <= 1.0 + 1e-10
            assert eigs.min() >= -1.0 - 1e-10

    def test_leading_eigenpair_is_sqrt_degree(self):
        g = _er_graph(11, 30, 0.4)
        deg = g.degrees().astype(float)
        inv = 1.0 / np.sqrt(deg)
        na = g.adj.astype(float) * inv[:, None] * inv[None, :]
        vals, vecs = np.linalg.eigh(na)
        assert vals[-1] == pytest.approx(1.0, abs=1e-10)
        lead = vecs[:, -1]
        ref = np.sqrt(deg) / np.linalg.norm(np.sqrt(deg))
        assert min(np.abs(lead - ref).max(), np.abs(lead + ref).max()) < 1e-8

    def test_isolated_node_is_an_error(self):
        g = Graph.from_edges(3, [(0, 1)])
        with pytest.raises(ValueError, match="isolated"):
            normalized_adjacency_eigs(g)


class TestEigengap:
    def test_complete_graph(self):
        assert eigengap(normalized_adjacency_eigs(Graph.complete(9))) == pytest.approx(1 / 8)

    def test_single_edge_no_mixing(self):
        assert eigengap(normalized_adjacency_eigs(Graph.path(2))) == pytest.approx(1.0)

    def test_er_2000_empirical_value(self):
        # ER(2000, 0.05): the bulk edge of the normalized adjacency sits near
        # 2 / sqrt(n p) = 0.2; record the empirical range rather than a bound.
        g = _er_graph(12, 2000, 0.05)
        gamma = eigengap(normalized_adjacency_eigs(g))
        assert 0.15 < gamma < 0.25


class TestStationary:
    def test_regular_graph_uniform(self):
        pi = stationary_distribution(Graph.complete(6))
        assert np.allclose(pi, 1 / 6)

    def test_path_degree_arithmetic(self):
        assert stationary_distribution(Graph.path(3)).tolist() == [0.25, 0.5, 0.25]

    def test_sums_to_one_exactly_in_rationals(self):
        from fractions import Fraction

        g = _er_graph(13, 25, 0.3)
        deg = g.degrees()
        total = int(deg.sum())
        assert sum(Fraction(int(d), total) for d in deg) == 1

    def test_float_sum_within_1e12(self):
        for seed in range(5):
            g = _er_graph(20 + seed, 50, 0.2)
            if g.degrees().min() == 0:
                continue
            assert abs(stationary_distribution(g).sum() - 1.0) < 1e-12


class TestTvCurve:
    def test_t0_is_one_minus_pi(self):
        g = Graph.complete(4)
        tv = tv_mixing_curve(g, 0, x0=2)
        assert tv[0] == pytest.approx(1.0 - 0.25, abs=1e-12)

    def test_triangle_hand_value(self):
        # K_3 from node 0: P^1 = (0, 1/2, 1/2), pi = (1/3, 1/3, 1/3): TV = 1/3.
        tv = tv_mixing_curve(Graph.complete(3), 1, x0=0)
        assert tv[1] == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_bipartite_path_does_not_converge(self):
        g = Graph.path(2)
        tv = tv_mixing_curve(g, 10, x0=0)
        assert np.all(tv >= 0.5 - 1e-12)
        assert is_bipartite(g)

    def test_worst_case_curve_non_increasing(self):
        g = _er_graph(14, 30, 0.3)
        tv = tv_mixing_curve(g, 20)
        assert all(a >= b - 1e-12 for a, b in zip(tv, tv[1:]))

    def test_lovasz_bound_pointwise(self):
        # TV(t) <= gamma^t / sqrt(pi(x0)) for every start and every t; the
        # slack absorbs the float noise floor of exact propagation once the
        # true TV decays below machine precision.
        for seed in (15, 16):
            g = _er_graph(seed, 60, 0.25)
            if g.degrees().min() == 0 or is_bipartite(g):
                continue
            eigs = normalized_adjacency_eigs(g)
            gamma = eigengap(eigs)
            pi = stationary_distribution(g)
            for x0 in (0, 7):
                tv = tv_mixing_curve(g, 30, x0=x0)
                bound = lovasz_bound(gamma, pi, 30, x0=x0)
                assert np.all(tv[1:] <= bound[1:] + TV_NUMERICAL_SLACK)

    def test_transition_matrix_rows_stochastic(self):
        g = _er_graph(17, 20, 0.4)
        P = transition_matrix(g)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)


class TestReport:
    def test_disconnected_reports_largest_component(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (3, 4)])
        rep = spectral_report(g, T=5, x0=0)
        assert rep.n_components == 3
        assert rep.component_size == 3
        assert rep.component_nodes.tolist() == [0, 1, 2]

    def test_bipartite_flagged(self):
        rep = spectral_report(Graph.path(4), T=5, x0=0)
        assert rep.bipartite

    def test_start_outside_largest_component_rejected(self):
        g = Graph.from_edges(6, [(0, 1), (1, 2), (3, 4)])
        with pytest.raises(ValueError, match="outside"):
            spectral_report(g, T=5, x0=3)

    def test_envelope_fits_geometric_decay(self):
        ts = np.arange(21)
        tv = 2.0 * 0.5**ts
        k_hat, gamma_hat = fit_geometric_envelope(tv)
        assert k_hat == pytest.approx(2.0, rel=1e-6)
        assert gamma_hat == pytest.approx(0.5, rel=1e-6)

    def test_json_serializable(self):
        import json

        rep = spectral_report(Graph.complete(5), T=5, x0=0)
        payload = json.loads(json.dumps(rep.to_json_dict()))
        assert payload["gamma"] == pytest.approx(0.25)

    def test_components_ordering(self):
        g = Graph.from_edges(7, [(0, 1), (2, 3), (3, 4), (4, 5)])
        comps = connected_components(g)
        assert [len(c) for c in comps] == [4, 2, 1]


class TestKernelOperator:
    def test_constant_kernel_rank_one(self):
        rng = substream(51, 0)
        rows = kernel_operator_eig_check(
            kernel_by_name("constant", value=0.7), rng.uniform(size=400), K=3
        )
        assert rows[0]["empirical"] == pytest.approx(0.7, abs=0.01)
        assert abs(rows[1]["empirical"]) < 0.01
        assert abs(rows[2]["empirical"]) < 0.01

    def test_min_kernel_matches_analytic_eigenvalues(self):
        rng = substream(51, 1)
        analytic = [min_graphon_eigenvalue(k) for k in (1, 2, 3)]
        rows = kernel_operator_eig_check(
            kernel_by_name("min"), rng.uniform(size=1500), K=3, analytic=analytic
        )
        for row in rows:
            assert row["abs_error"] < 0.02

    def test_estimates_stabilize_with_n(self):
        # |est(n=2000) - est(n=4000)| < |est(n=500) - est(n=2000)| on average
        # over seeds: convergence trend of the top eigenvalue.
        kernel = kernel_by_name("min")
        diffs_small, diffs_large = [], []
        for seed in range(3):
            ests = {}
            for n in (500, 2000, 4000):
                xi = substream(51, 2, seed, n).uniform(size=n)
                ests[n] = kernel_operator_eig_check(kernel, xi, K=1)[0]["empirical"]
            diffs_small.append(abs(ests[500] - ests[2000]))
            diffs_large.append(abs(ests[2000] - ests[4000]))
        assert np.mean(diffs_large) < np.mean(diffs_small)


def test_graphon_generated_graph_gamma_reflects_density():
    # Denser constant graphons mix faster: gamma ~ 2 / sqrt(n rho).
    spec = GraphonSpec(w=kernel_by_name("constant"), rho=0.4)
    xi = substream(52, 0).uniform(size=500)
    g = sample_graphon_graph(spec, xi, substream(52, 1))
    gamma = eigengap(normalized_adjacency_eigs(g))
    assert gamma < 0.2
