"""Permutation-invariant network summary statistics.

Statistics fed to the conformal layer must commute with node relabeling:
computing on a relabeled subarray must equal relabeling the computed rows.
Integer-valued statistics (degrees, shell counts) satisfy this exactly;
spectral embeddings satisfy it up to floating-point reordering noise, so the
checker takes a tolerance.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .graphs import Graph

__all__ = [
    "CovariateBundle",
    "ase_embedding",
    "bfs_distances",
    "check_permutation_invariance",
    "degrees",
    "neighbor_weighted_mean",
    "network_covariates",
    "shortest_path_stats",
    "write_covariates_csv",
]


@dataclass(frozen=True)
class CovariateBundle:
    """Matrix of per-node network summaries with per-column provenance labels."""

    zhat: np.ndarray
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.zhat.shape[1] != len(self.provenance):
            raise ValueError("provenance must name every column")


def degrees(g: Graph) -> np.ndarray:
    """Row sums of the adjacency (out-degrees when directed)."""
    return g.degrees()


def ase_embedding(g: Graph, d: int) -> np.ndarray:
    """Adjacency spectral embedding: U |Lambda|^{1/2} from the top-d
    eigenpairs by magnitude.

    Sign convention: each eigenvector is flipped so its entry of largest
    absolute value is positive (ties broken by lowest index), making the
    embedding deterministic up to relabeling. Well-defined when the top-d
    eigenvalue magnitudes are distinct and no used eigenvector attains its
    maximal magnitude with both signs (almost sure under the continuous
    generating models here); graphs violating either condition, e.g. through
    automorphisms, admit no relabeling-equivariant convention at all.
    """
    if g.directed:
        raise ValueError("spectral embedding requires an undirected graph")
    if not 1 <= d <= g.n:
        raise ValueError(f"dimension must lie in [1, {g.n}]")
    vals, vecs = np.linalg.eigh(g.adj.astype(np.float64))
    order = np.argsort(-np.abs(vals), kind="stable")[:d]
    emb = np.empty((g.n, d))
    for col, k in enumerate(order):
        v = vecs[:, k]
        anchor = np.argmax(np.abs(v))
        if v[anchor] < 0:
            v = -v
        emb[:, col] = np.sqrt(abs(vals[k])) * v
    return emb


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Shortest-path (quasi-)distances from ``source``; unreachable nodes get -1."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


@dataclass(frozen=True)
class ShellStats:
    """Per-node shell counts and shell covariate means up to ``kmax``.

    ``counts[i, k-1]`` is the number of nodes at distance exactly k from i;
    ``means[i, k-1]`` is the mean covariate over that shell, 0 with
    ``mask[i, k-1] = False`` when the shell is empty. The mask (not NaN)
    lets regressions carry an explicit missingness indicator.
    """

    counts: np.ndarray
    means: np.ndarray
    mask: np.ndarray
    kmax: int


def shortest_path_stats(g: Graph, x: Optional[np.ndarray] = None, kmax: Optional[int] = None) -> ShellStats:
    """Distance-shell statistics: counts and covariate means per shell.

    ``kmax`` defaults to the largest finite distance in the graph (shells
    beyond the diameter are identically zero).
    """
    n = g.n
    dists = np.stack([bfs_distances(g, i) for i in range(n)])
    finite_max = int(dists.max()) if n else 0
    if kmax is None:
        kmax = max(finite_max, 1)
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    xmat = None
    if x is not None:
        xmat = np.asarray(x, dtype=np.float64)
        if xmat.ndim == 1:
            xmat = xmat[:, None]
    p = xmat.shape[1] if xmat is not None else 1
    counts = np.zeros((n, kmax), dtype=np.int64)
    means = np.zeros((n, kmax, p))
    mask = np.zeros((n, kmax), dtype=bool)
    for i in range(n):
        for k in range(1, kmax + 1):
            shell = np.flatnonzero(dists[i] == k)
            counts[i, k - 1] = shell.size
            if shell.size and xmat is not None:
                means[i, k - 1] = xmat[shell].mean(axis=0)
                mask[i, k - 1] = True
            elif shell.size:
                mask[i, k - 1] = True
    return ShellStats(counts=counts, means=means, mask=mask, kmax=kmax)


def neighbor_weighted_mean(
    g: Graph, values: np.ndarray, beta: Callable[[int], float]
) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean of ``values`` over other nodes, weights depending only on
    shortest-path length via ``beta``.

    Returns ``(out, mask)``: nodes whose total weight is zero (e.g. isolated
    nodes under a 1-hop beta) get out = 0 and mask = False.
    """
    values = np.asarray(values, dtype=np.float64)
    n = g.n
    out = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for i in range(n):
        dist = bfs_distances(g, i)
        total = 0.0
        acc = 0.0
        for j in range(n):
            if j == i or dist[j] < 0:
                continue
            w = float(beta(int(dist[j])))
            if w < 0:
                raise ValueError(f"negative shell weight beta({dist[j]}) = {w}")
            total += w
            acc += w * values[j]
        if total > 0:
            out[i] = acc / total
            mask[i] = True
    return out, mask


def one_hop_mean(g: Graph, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean of ``values`` over direct neighbors (beta = 1 at length 1), vectorized."""
    values = np.asarray(values, dtype=np.float64)
    deg = g.degrees().astype(np.float64)
    sums = g.adj.astype(np.float64) @ values
    mask = deg > 0
    out = np.zeros_like(sums)
    if values.ndim == 1:
        out[mask] = sums[mask] / deg[mask]
    else:
        out[mask] = sums[mask] / deg[mask, None]
    return out, mask


def network_covariates(g: Graph, ase_dim: int) -> CovariateBundle:
    """Default covariate bundle: degree plus an ASE embedding, all computed
    from the (sub)graph alone."""
    deg = degrees(g).astype(np.float64)[:, None]
    emb = ase_embedding(g, min(ase_dim, g.n))
    zhat = np.hstack([deg, emb])
    prov = ("degree",) + tuple(f"ase_{k}" for k in range(emb.shape[1]))
    return CovariateBundle(zhat=zhat, provenance=prov)


def check_permutation_invariance(
    zeta: Callable[[Graph, Optional[np.ndarray]], np.ndarray],
    u: tuple[Graph, Optional[np.ndarray]],
    sigma: Sequence[int],
    atol: float = 0.0,
) -> bool:
    """True iff computing ``zeta`` on the relabeled subarray matches relabeling
    the computed rows.

    ``atol = 0`` demands bitwise equality, appropriate for integer statistics;
    spectral statistics need a small tolerance because relabeling changes
    floating-point summation order inside the eigensolver.
    """
    g, x = u
    sigma = np.asarray(sigma, dtype=np.intp)
    base = np.asarray(zeta(g, x))
    permuted_input = (g.relabel(sigma), None if x is None else np.asarray(x)[sigma])
    lhs = np.asarray(zeta(*permuted_input))
    rhs = base[sigma]
    if atol == 0.0:
        return np.array_equal(lhs, rhs)
    return bool(np.allclose(lhs, rhs, atol=atol, rtol=0.0))


def write_covariates_csv(bundle: CovariateBundle, path) -> None:
    """Emit the covariate matrix with its provenance names as the header row."""
    header = ",".join(bundle.provenance)
    np.savetxt(path, bundle.zhat, delimiter=",", header=header, comments="")
