"""Spectral and mixing diagnostics for simple random walks.

The eigenvalues of the normalized adjacency D^{-1/2} A D^{-1/2} control the
walk's mixing rate: with gamma = max(lambda_2, |lambda_min|), the t-step
distribution from any start i satisfies TV(t) <= gamma^t / sqrt(pi(i)).
Total-variation curves are computed by exact distribution propagation, so
bound checks carry no Monte Carlo noise.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .graphs import Graph

__all__ = [
    "SpectralReport",
    "connected_components",
    "eigengap",
    "fit_geometric_envelope",
    "is_bipartite",
    "kernel_operator_eig_check",
    "lovasz_bound",
    "normalized_adjacency_eigs",
    "spectral_report",
    "stationary_distribution",
    "transition_matrix",
    "tv_mixing_curve",
]


def connected_components(g: Graph) -> list[np.ndarray]:
    """Connected components (undirected sense), largest first."""
    seen = np.zeros(g.n, dtype=bool)
    comps = []
    for start in range(g.n):
        if seen[start]:
            continue
        queue = deque([start])
        seen[start] = True
        comp = [start]
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(g.adj[u] | g.adj[:, u]):
                if not seen[v]:
                    seen[v] = True
                    comp.append(int(v))
                    queue.append(int(v))
        comps.append(np.array(sorted(comp), dtype=np.intp))
    comps.sort(key=len, reverse=True)
    return comps


def is_bipartite(g: Graph) -> bool:
    """Two-colorability check; bipartite graphs have periodic walks."""
    color = np.full(g.n, -1, dtype=np.int8)
    for start in range(g.n):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(int(v))
                elif color[v] == color[u]:
                    return False
    return True


def _require_walkable(g: Graph) -> np.ndarray:
    if g.directed:
        raise ValueError("diagnostics are defined for undirected graphs")
    deg = g.degrees()
    if deg.min() == 0:
        raise ValueError("graph has an isolated node; analyze components separately")
    return deg.astype(np.float64)


def normalized_adjacency_eigs(g: Graph) -> np.ndarray:
    """Full spectrum of D^{-1/2} A D^{-1/2}, sorted descending."""
    deg = _require_walkable(g)
    inv_sqrt = 1.0 / np.sqrt(deg)
    na = g.adj.astype(np.float64) * inv_sqrt[:, None] * inv_sqrt[None, :]
    return np.sort(np.linalg.eigvalsh(na))[::-1]


def eigengap(eigenvalues: np.ndarray) -> float:
    """gamma = max(lambda_2, |lambda_min|); 1 - gamma is the spectral gap."""
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if ev.size < 2:
        raise ValueError("need at least two eigenvalues")
    return float(max(ev[1], abs(ev[-1])))


def stationary_distribution(g: Graph) -> np.ndarray:
    """pi(j) = D_j / (2|E|), the stationary law of the simple random walk."""
    deg = _require_walkable(g)
    return deg / deg.sum()


def transition_matrix(g: Graph) -> np.ndarray:
    """Row-stochastic kernel P[i, j] = A[i, j] / D_i."""
    deg = _require_walkable(g)
    return g.adj.astype(np.float64) / deg[:, None]


def tv_mixing_curve(g: Graph, T: int, x0: Optional[int] = None) -> np.ndarray:
    """Total variation to stationarity of the exact t-step law, t = 0..T.

    With ``x0`` given, propagates a point mass (O(T n^2)); with ``x0 = None``
    the curve is the worst case over all starts (O(T n^3) — exact, intended
    for moderate n). Bipartite graphs simply show non-decaying TV.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    P = transition_matrix(g)
    pi = stationary_distribution(g)
    out = np.empty(T + 1)
    if x0 is not None:
        if not 0 <= x0 < g.n:
            raise ValueError("start node out of range")
        p = np.zeros(g.n)
        p[x0] = 1.0
        out[0] = 0.5 * np.abs(p - pi).sum()
        for t in range(1, T + 1):
            p = p @ P
            out[t] = 0.5 * np.abs(p - pi).sum()
        return out
    M = np.eye(g.n)
    out[0] = 0.5 * np.abs(M - pi[None, :]).sum(axis=1).max()
    for t in range(1, T + 1):
        M = M @ P
        out[t] = 0.5 * np.abs(M - pi[None, :]).sum(axis=1).max()
    return out


def lovasz_bound(gamma: float, pi: np.ndarray, T: int, x0: Optional[int] = None) -> np.ndarray:
    """Spectral mixing bound gamma^t / sqrt(pi(x0)) for t = 0..T (worst start
    when ``x0`` is None)."""
    base = float(pi[x0]) if x0 is not None else float(np.min(pi))
    t = np.arange(T + 1)
    return gamma**t / np.sqrt(base)


def fit_geometric_envelope(tv: np.ndarray, t_min: int = 1) -> tuple[float, float]:
    """Fit TV(t) ~ K * gamma^t by least squares on log TV over t >= t_min.

    Returns (K_hat, gamma_hat). Only strictly positive TV values enter the
    fit; returns (0, 0) if fewer than two such points exist.
    """
    tv = np.asarray(tv, dtype=np.float64)
    ts = np.arange(tv.size)
    keep = (ts >= t_min) & (tv > 0)
    if keep.sum() < 2:
        return 0.0, 0.0
    coeffs = np.polyfit(ts[keep], np.log(tv[keep]), 1)
    return float(np.exp(coeffs[1])), float(np.exp(coeffs[0]))


@dataclass(frozen=True)
class SpectralReport:
    """Spectrum, eigengap, stationary law, and TV mixing curve of one graph.

    Diagnostics refer to the largest connected component when the graph is
    disconnected; ``component_size`` and ``n_components`` record that.
    """

    eigenvalues: np.ndarray
    gamma: float
    pi: np.ndarray
    tv_curve: np.ndarray
    tv_bound: np.ndarray
    start: Optional[int]
    bipartite: bool
    n_components: int
    component_size: int
    component_nodes: np.ndarray
    envelope: tuple[float, float] = (0.0, 0.0)

    def to_json_dict(self) -> dict:
        k_hat, gamma_hat = self.envelope
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "gamma": float(self.gamma),
            "pi": [float(v) for v in self.pi],
            "tv_curve": [float(v) for v in self.tv_curve],
            "tv_bound": [float(v) for v in self.tv_bound],
            "start": self.start,
            "bipartite": self.bipartite,
            "n_components": self.n_components,
            "component_size": self.component_size,
            "envelope": {"k_hat": k_hat, "gamma_hat": gamma_hat},
        }


def spectral_report(g: Graph, T: int = 50, x0: Optional[int] = None) -> SpectralReport:
    """Full diagnostic bundle for ``g``; analyzes the largest component.

    ``x0`` indexes into the original graph and must belong to the largest
    component; ``None`` requests the worst-case TV curve.
    """
    comps = connected_components(g)
    nodes = comps[0]
    sub = g.induced_subgraph(nodes) if len(comps) > 1 else g
    start_local: Optional[int] = None
    if x0 is not None:
        hits = np.flatnonzero(nodes == x0)
        if hits.size == 0:
            raise ValueError(f"start {x0} is outside the largest component")
        start_local = int(hits[0])
    eigs = normalized_adjacency_eigs(sub)
    gamma = eigengap(eigs)
    pi = stationary_distribution(sub)
    tv = tv_mixing_curve(sub, T, x0=start_local)
    bound = lovasz_bound(gamma, pi, T, x0=start_local)
    return SpectralReport(
        eigenvalues=eigs,
        gamma=gamma,
        pi=pi,
        tv_curve=tv,
        tv_bound=bound,
        start=x0,
        bipartite=is_bipartite(sub),
        n_components=len(comps),
        component_size=len(nodes),
        component_nodes=nodes,
        envelope=fit_geometric_envelope(tv),
    )


def kernel_operator_eig_check(
    w: Callable[[np.ndarray, np.ndarray], np.ndarray],
    xi: np.ndarray,
    K: int,
    analytic: Optional[list[float]] = None,
) -> list[dict]:
    """Top-K eigenvalues of the matrix [w(xi_i, xi_j)] / n (zero diagonal),
    compared against analytic operator eigenvalues when supplied.

    These matrix eigenvalues converge to the kernel operator's spectrum, which
    is what pins down the walk's limiting eigengap.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    xi = np.asarray(xi, dtype=np.float64)
    n = xi.size
    mat = np.asarray(w(xi[:, None], xi[None, :]), dtype=np.float64) / n
    np.fill_diagonal(mat, 0.0)
    eigs = np.sort(np.linalg.eigvalsh(mat))[::-1][:K]
    rows = []
    for k in range(K):
        ref = None if analytic is None or k >= len(analytic) else float(analytic[k])
        rows.append(
            {
                "k": k + 1,
                "empirical": float(eigs[k]),
                "analytic": ref,
                "abs_error": None if ref is None else abs(float(eigs[k]) - ref),
            }
        )
    return rows
