"""Generator tests: frozen examples, independent oracles, and distributional checks."""

import numpy as np
import pytest

from netconformal.generators import (
    GraphonSpec,
    kernel_by_name,
    min_graphon_eigenvalue,
    min_graphon_rdpg_positions,
    sample_fixed_out_degree_digraph,
    sample_gaussian_latent_space_graph,
    sample_graphon_graph,
)
from netconformal.rng import substream


def test_zero_kernel_gives_empty_graph():
    spec = GraphonSpec(w=kernel_by_name("constant", value=0.0), rho=0.5)
    g = sample_graphon_graph(spec, np.linspace(0, 1, 6), substream(0, 0))
    assert g.adj.sum() == 0


def test_unit_kernel_rho_one_gives_complete_graph():
    spec = GraphonSpec(w=kernel_by_name("constant"), rho=1.0)
    g = sample_graphon_graph(spec, np.linspace(0, 1, 7), substream(0, 1))
    assert g.adj.sum() == 7 * 6  # complete, both directions counted


def test_edge_density_concentrates():
    # Binomial concentration: density over C(5000, 2) dyads has SE ~ 1.3e-4,
    # far inside the 0.01 tolerance.
    n = 5000
    spec = GraphonSpec(w=kernel_by_name("constant"), rho=0.3)
    g = sample_graphon_graph(spec, substream(1, 0).uniform(size=n), substream(1, 1))
    density = g.edge_count() / (n * (n - 1) / 2)
    assert abs(density - 0.3) < 0.01


def test_graphon_output_symmetric_zero_diagonal():
    for seed in range(5):
        spec = GraphonSpec(w=kernel_by_name("min"), rho=0.9)
        g = sample_graphon_graph(spec, substream(seed, 0).uniform(size=30), substream(seed, 1))
        assert np.array_equal(g.adj, g.adj.T)
        assert np.all(np.diag(g.adj) == 0)


def test_shared_eta_couples_graphs_monotonically():
    # The sampler thresholds one uniform per dyad, so reusing the eta array
    # couples draws across sparsity levels: raising rho only adds edges.
    rng = substream(2, 0)
    xi = rng.uniform(size=40)
    eta = rng.uniform(size=(40, 40))
    sparse = sample_graphon_graph(GraphonSpec(w=kernel_by_name("min"), rho=0.3), xi, rng, eta=eta)
    dense = sample_graphon_graph(GraphonSpec(w=kernel_by_name("min"), rho=0.9), xi, rng, eta=eta)
    assert np.all(dense.adj >= sparse.adj)


def test_graphon_determinism_bit_for_bit():
    spec = GraphonSpec(w=kernel_by_name("min"), rho=0.7)
    xi = substream(3, 0).uniform(size=50)
    a = sample_graphon_graph(spec, xi, substream(3, 1))
    b = sample_graphon_graph(spec, xi, substream(3, 1))
    assert np.array_equal(a.adj, b.adj)


def test_graphon_rejects_bad_kernels():
    with pytest.raises(ValueError, match="negative"):
        sample_graphon_graph(
            GraphonSpec(w=lambda x, y: x - y - 2.0, rho=0.5),
            np.array([0.1, 0.2, 0.3]),
            substream(0, 2),
        )
    with pytest.raises(ValueError, match="nonfinite|finite"):
        sample_graphon_graph(
            GraphonSpec(w=lambda x, y: np.full(np.broadcast(x, y).shape, np.nan), rho=0.5),
            np.array([0.1, 0.2]),
            substream(0, 3),
        )


class TestRdpgPositions:
    def test_zero_latent_gives_zero_row(self):
        z = min_graphon_rdpg_positions(np.array([0.0, 0.5]), 3)
        assert np.all(z[0] == 0.0)

    def test_unit_latent_first_column(self):
        # sqrt(lambda_1) * sin(pi/2) = 2/pi
        z = min_graphon_rdpg_positions(np.array([1.0]), 1)
        assert z[0, 0] == pytest.approx(2.0 / np.pi, abs=1e-12)

    def test_inner_products_bounded_by_eigenvalue_sum(self):
        # Cauchy-Schwarz with |phi_k| <= 1: Z_i . Z_j <= sum_k lambda_k.
        bound = sum(min_graphon_eigenvalue(k) for k in (1, 2, 3))
        xi = substream(4, 0).uniform(size=200)
        z = min_graphon_rdpg_positions(xi, 3)
        assert np.max(z @ z.T) <= bound + 1e-12


class TestFixedOutDegree:
    def test_unique_argmax_row(self):
        w = np.array([[0.0, 0.9, 0.2], [0.5, 0.0, 0.1], [0.3, 0.8, 0.0]])
        g = sample_fixed_out_degree_digraph(w, 1)
        assert g.adj[0].tolist() == [0, 1, 0]

    def test_full_referral_is_complete_digraph(self):
        w = substream(5, 0).uniform(size=(6, 6))
        g = sample_fixed_out_degree_digraph(w, 5)
        expected = np.ones((6, 6), dtype=np.uint8)
        np.fill_diagonal(expected, 0)
        assert np.array_equal(g.adj, expected)

    def test_rows_match_full_sort_oracle(self):
        rng = substream(6, 0)
        for _ in range(100):
            n, r = 4, 2
            w = rng.uniform(size=(n, n))
            g = sample_fixed_out_degree_digraph(w, r)
            assert np.all(g.adj.sum(axis=1) == r)
            for i in range(n):
                # oracle: full descending sort of the off-diagonal row
                others = [j for j in range(n) if j != i]
                ranked = sorted(others, key=lambda j: -w[i, j])
                assert sorted(np.flatnonzero(g.adj[i]).tolist()) == sorted(ranked[:r])

    def test_ties_rejected(self):
        w = np.array([[0.0, 0.5, 0.5], [0.1, 0.0, 0.2], [0.3, 0.4, 0.0]])
        with pytest.raises(ValueError, match="tie"):
            sample_fixed_out_degree_digraph(w, 1)

    def test_r_out_of_range(self):
        w = substream(7, 0).uniform(size=(4, 4))
        with pytest.raises(ValueError):
            sample_fixed_out_degree_digraph(w, 4)
        with pytest.raises(ValueError):
            sample_fixed_out_degree_digraph(w, 0)

    def test_joint_exchangeability_monte_carlo(self):
        # For i.i.d. weights the law of any fixed adjacency pattern equals the
        # law of its relabeled version; compare two dyad probabilities over
        # 10^4 replicates within 3 combined standard errors.
        rng = substream(8, 0)
        n, r, reps = 6, 2, 10_000
        w = rng.uniform(size=(reps, n, n))
        # top-r per row, vectorized over replicates
        idx = np.arange(n)
        w[:, idx, idx] = -np.inf
        order = np.argsort(-w, axis=2)
        hits_01 = np.zeros(reps, dtype=bool)
        hits_34 = np.zeros(reps, dtype=bool)
        for rep in range(reps):
            hits_01[rep] = 1 in order[rep, 0, :r]
            hits_34[rep] = 4 in order[rep, 3, :r]
        p1, p2 = hits_01.mean(), hits_34.mean()
        se = np.sqrt(p1 * (1 - p1) / reps + p2 * (1 - p2) / reps)
        assert abs(p1 - p2) <= 3 * se
        # the exact symmetric value is r / (n - 1)
        assert abs(p1 - r / (n - 1)) <= 4 * np.sqrt(p1 * (1 - p1) / reps)


class TestGaussianLatentSpace:
    def test_zero_distance_probability(self):
        # two equal coordinates: edge probability nu * 1.0; check via many draws
        rng = substream(9, 0)
        x3 = np.zeros(2)
        hits = sum(
            int(sample_gaussian_latent_space_graph(x3, 0.5, rng).adj[0, 1]) for _ in range(4000)
        )
        p = hits / 4000
        assert abs(p - 0.5) < 3 * np.sqrt(0.25 / 4000)

    def test_kernel_floor_at_large_distance(self):
        rng = substream(9, 1)
        x3 = np.array([0.0, 1e6])
        hits = sum(
            int(sample_gaussian_latent_space_graph(x3, 0.5, rng).adj[0, 1]) for _ in range(4000)
        )
        p = hits / 4000
        assert abs(p - 0.05) < 3 * np.sqrt(0.05 * 0.95 / 4000)

    def test_mean_degree_matches_quadrature(self):
        # Independent oracle: E[g(x, y)] for x, y iid N(0, 1) by 2-d quadrature.
        grid = np.linspace(-8, 8, 801)
        pdf = np.exp(-0.5 * grid**2) / np.sqrt(2 * np.pi)
        gxy = 0.9 * np.exp(-((grid[:, None] - grid[None, :]) ** 2) / 4.0) + 0.1
        eg = np.trapezoid(np.trapezoid(gxy * pdf[None, :], grid, axis=1) * pdf, grid)
        n, nu = 3000, 0.1
        rng = substream(9, 2)
        x3 = rng.standard_normal(n)
        g = sample_gaussian_latent_space_graph(x3, nu, rng)
        mean_degree = g.degrees().mean()
        expected = (n - 1) * nu * eg
        assert abs(mean_degree - expected) / expected < 0.05
