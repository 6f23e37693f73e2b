"""Random-graph generators: sparse graphon draws, truncated-eigendecomposition
latent positions, fixed-out-degree referral digraphs, and a Gaussian latent
space model.

All samplers draw one uniform per dyad and threshold it against the edge
probability, so a caller can supply the uniforms explicitly to couple graphs
across parameter values.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .graphs import Graph

__all__ = [
    "GraphonSpec",
    "kernel_by_name",
    "min_graphon_eigenvalue",
    "min_graphon_rdpg_positions",
    "sample_bernoulli_graph",
    "sample_fixed_out_degree_digraph",
    "sample_gaussian_latent_space_graph",
    "sample_graphon_graph",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphonSpec:
    """Symmetric nonnegative kernel on [0,1]^2 plus a sparsity factor rho in (0,1]."""

    w: Callable[[np.ndarray, np.ndarray], np.ndarray]
    rho: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must lie in (0, 1], got {self.rho}")


def kernel_by_name(name: str, **params: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Named graphon kernels usable from serialized configs.

    ``constant`` (w = c, default 1) and ``min`` (w(x, y) = min(x, y)) cover
    the generating processes exercised here.
    """
    if name == "constant":
        c = float(params.get("value", 1.0))
        return lambda x, y: np.full(np.broadcast(x, y).shape, c, dtype=np.float64)
    if name == "min":
        return lambda x, y: np.minimum(x, y)
    raise ValueError(f"unknown kernel {name!r}; available: constant, min")


def sample_bernoulli_graph(
    probs: np.ndarray, rng: np.random.Generator, eta: Optional[np.ndarray] = None
) -> Graph:
    """Undirected graph with independent edges: A_ij = 1(eta_ij <= probs_ij).

    ``probs`` must be symmetric with entries in [0, 1]; only the upper
    triangle of ``eta`` is consulted.
    """
    probs = np.asarray(probs, dtype=np.float64)
    n = probs.shape[0]
    if not np.isfinite(probs).all():
        raise ValueError("edge probabilities must be finite")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValueError("edge probabilities must lie in [0, 1]")
    if eta is None:
        eta = rng.uniform(size=(n, n))
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    adj = np.where(upper & (eta <= probs), 1, 0).astype(np.uint8)
    adj = adj + adj.T
    return Graph(adj, directed=False)


def sample_graphon_graph(
    spec: GraphonSpec,
    xi: np.ndarray,
    rng: np.random.Generator,
    eta: Optional[np.ndarray] = None,
) -> Graph:
    """Sparse-graphon draw: A_ij = 1(eta_ij <= min(rho * w(xi_i, xi_j), 1)).

    Kernel evaluations must be finite and nonnegative; ``xi`` entries must lie
    in [0, 1].
    """
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim != 1 or xi.size < 2:
        raise ValueError("xi must be a vector of length >= 2")
    if xi.min() < 0.0 or xi.max() > 1.0:
        raise ValueError("latent positions must lie in [0, 1]")
    wvals = np.asarray(spec.w(xi[:, None], xi[None, :]), dtype=np.float64)
    if not np.isfinite(wvals).all():
        raise ValueError("kernel produced nonfinite values")
    if wvals.min() < 0.0:
        raise ValueError("kernel produced negative values")
    probs = np.minimum(spec.rho * wvals, 1.0)
    np.fill_diagonal(probs, 0.0)
    return sample_bernoulli_graph(probs, rng, eta=eta)


def min_graphon_eigenvalue(k: int) -> float:
    """k-th eigenvalue (2 / ((2k-1) pi))^2 of the min(x, y) kernel operator."""
    return (2.0 / ((2 * k - 1) * np.pi)) ** 2


def min_graphon_rdpg_positions(xi: np.ndarray, K: int) -> np.ndarray:
    """Rank-K latent positions Z[i, k] = sqrt(lambda_k) * phi_k(xi_i) for the
    min(x, y) kernel, with phi_k(x) = sin((2k-1) pi x / 2).

    Inner products Z_i . Z_j approximate the kernel; only phi_1 is nonnegative
    on [0, 1], so products may dip below zero for K > 1 and callers using them
    as probabilities must clamp.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    xi = np.asarray(xi, dtype=np.float64)
    cols = [
        np.sqrt(min_graphon_eigenvalue(k)) * np.sin((2 * k - 1) * np.pi * xi / 2.0)
        for k in range(1, K + 1)
    ]
    return np.stack(cols, axis=1)


def sample_fixed_out_degree_digraph(weights: np.ndarray, r: int) -> Graph:
    """Directed graph where each row keeps its r largest off-diagonal weights.

    Ties within a row are rejected: the construction assumes continuously
    distributed weights, and silent tie-breaking would destroy its
    exchangeability.
    """
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    if weights.ndim != 2 or weights.shape[1] != n:
        raise ValueError("weights must be square")
    if not 1 <= r <= n - 1:
        raise ValueError(f"r must lie in [1, {n - 1}], got {r}")
    adj = np.zeros((n, n), dtype=np.uint8)
    for i in range(n):
        row = weights[i].copy()
        row[i] = -np.inf
        off = np.delete(weights[i], i)
        if np.unique(off).size != off.size:
            raise ValueError(f"tied weights in row {i}; ranks are ill-defined")
        top = np.argpartition(row, -r)[-r:]
        adj[i, top] = 1
    return Graph(adj, directed=True)


def sample_gaussian_latent_space_graph(
    x3: np.ndarray, nu: float, rng: np.random.Generator, eta: Optional[np.ndarray] = None
) -> Graph:
    """Undirected graph with P(A_ij) = nu * (0.9 exp(-(x3_i - x3_j)^2 / 4) + 0.1)."""
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    x3 = np.asarray(x3, dtype=np.float64)
    diff = x3[:, None] - x3[None, :]
    probs = nu * (0.9 * np.exp(-(diff**2) / 4.0) + 0.1)
    np.fill_diagonal(probs, 0.0)
    return sample_bernoulli_graph(probs, rng, eta=eta)
