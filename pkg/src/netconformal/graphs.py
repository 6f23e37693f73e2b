"""Graph and node-level dataset containers.

Graphs are stored as dense 0/1 adjacency matrices (``uint8``); at the scales
this package targets (n up to a few thousand) the dense form keeps
relabeling, induced subgraphs, and permutation checks trivial. Instances are
immutable after construction and safe to share across worker processes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = ["Graph", "NodeDataset", "read_edge_list", "write_edge_list"]


@dataclass(frozen=True)
class Graph:
    """Simple graph with dense adjacency. ``adj[i, j] == 1`` means i -> j.

    Undirected graphs must be symmetric; self-loops are rejected for both
    kinds. The adjacency array is frozen (read-only) on construction.
    """

    adj: np.ndarray
    directed: bool = False

    def __post_init__(self) -> None:
        adj = np.ascontiguousarray(self.adj, dtype=np.uint8)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if np.any(adj > 1):
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diag(adj) != 0):
            raise ValueError("self-loops are not allowed")
        if not self.directed and not np.array_equal(adj, adj.T):
            raise ValueError("undirected graph requires a symmetric adjacency")
        adj.flags.writeable = False
        object.__setattr__(self, "adj", adj)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def degrees(self) -> np.ndarray:
        """Row sums (out-degrees for directed graphs)."""
        return self.adj.sum(axis=1, dtype=np.int64)

    def neighbors(self, i: int) -> np.ndarray:
        """Out-neighbors of node ``i`` in increasing order."""
        return np.flatnonzero(self.adj[i])

    def edge_count(self) -> int:
        """Number of edges (undirected) or arcs (directed)."""
        total = int(self.adj.sum())
        return total // 2 if not self.directed else total

    def edges(self) -> np.ndarray:
        """Edge list as an (m, 2) array; each undirected edge appears once (i < j)."""
        if self.directed:
            src, dst = np.nonzero(self.adj)
        else:
            src, dst = np.nonzero(np.triu(self.adj, 1))
        return np.column_stack([src, dst])

    def relabel(self, sigma: Sequence[int]) -> "Graph":
        """Relabeled graph with adjacency ``A^sigma[i, j] = A[sigma(i), sigma(j)]``."""
        sigma = np.asarray(sigma, dtype=np.intp)
        if sorted(sigma.tolist()) != list(range(self.n)):
            raise ValueError("sigma must be a permutation of 0..n-1")
        return Graph(self.adj[np.ix_(sigma, sigma)], directed=self.directed)

    def induced_subgraph(self, nodes: Sequence[int]) -> "Graph":
        """Subgraph induced by ``nodes``; row k corresponds to ``nodes[k]``."""
        idx = np.asarray(nodes, dtype=np.intp)
        return Graph(self.adj[np.ix_(idx, idx)], directed=self.directed)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], directed: bool = False) -> "Graph":
        adj = np.zeros((n, n), dtype=np.uint8)
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{j}) is not allowed")
            adj[i, j] = 1
            if not directed:
                adj[j, i] = 1
        return cls(adj, directed=directed)

    @classmethod
    def empty(cls, n: int, directed: bool = False) -> "Graph":
        return cls(np.zeros((n, n), dtype=np.uint8), directed=directed)

    @classmethod
    def complete(cls, n: int, directed: bool = False) -> "Graph":
        adj = np.ones((n, n), dtype=np.uint8)
        np.fill_diagonal(adj, 0)
        return cls(adj, directed=directed)

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls.from_edges(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def star(cls, n_leaves: int) -> "Graph":
        """Star with center 0 and leaves 1..n_leaves."""
        return cls.from_edges(n_leaves + 1, [(0, j) for j in range(1, n_leaves + 1)])


@dataclass(frozen=True)
class NodeDataset:
    """Per-node responses and covariates tied to a graph.

    ``referral`` optionally carries a directed nomination graph alongside the
    observed adjacency; ``latent`` carries the generating positions when the
    data are synthetic.
    """

    y: np.ndarray
    x: np.ndarray
    graph: Graph
    referral: Optional[Graph] = None
    latent: Optional[np.ndarray] = field(default=None)

    def __post_init__(self) -> None:
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        n = self.graph.n
        if y.shape != (n,):
            raise ValueError(f"y must have length {n}, got {y.shape}")
        if x.shape[0] != n:
            raise ValueError(f"x must have {n} rows, got {x.shape}")
        if self.referral is not None and self.referral.n != n:
            raise ValueError("referral graph size mismatch")
        latent = self.latent
        if latent is not None:
            latent = np.ascontiguousarray(latent, dtype=np.float64)
            if latent.shape[0] != n:
                raise ValueError("latent length mismatch")
            latent.flags.writeable = False
        y.flags.writeable = False
        x.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "latent", latent)

    @property
    def n(self) -> int:
        return self.graph.n

    def subset(self, nodes: Sequence[int]) -> "NodeDataset":
        """Dataset restricted to ``nodes`` with both graphs induced."""
        idx = np.asarray(nodes, dtype=np.intp)
        return NodeDataset(
            y=self.y[idx],
            x=self.x[idx],
            graph=self.graph.induced_subgraph(idx),
            referral=self.referral.induced_subgraph(idx) if self.referral is not None else None,
            latent=self.latent[idx] if self.latent is not None else None,
        )


def write_edge_list(graph: Graph, path: str | Path, header: bool = True) -> None:
    """Write ``src,dst`` rows (0-based); undirected edges emitted once with src < dst."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(["src", "dst"])
        for i, j in graph.edges():
            writer.writerow([int(i), int(j)])


def read_edge_list(path: str | Path, directed: bool = False, n: Optional[int] = None) -> Graph:
    """Read a ``src,dst`` edge list (header optional).

    ``n`` defaults to ``max index + 1``; pass it explicitly when trailing
    nodes are isolated, otherwise round-trips are exact.
    """
    edges: list[tuple[int, int]] = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if row[0].strip().lower() == "src":
                continue
            edges.append((int(row[0]), int(row[1])))
    if n is None:
        n = 1 + max((max(i, j) for i, j in edges), default=-1)
    return Graph.from_edges(n, edges, directed=directed)
