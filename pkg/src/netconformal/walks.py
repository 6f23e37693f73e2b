"""Simple random walks on undirected graphs and start-node policies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .graphs import Graph, NodeDataset

__all__ = ["WalkTrace", "StartPolicy", "random_walk", "choose_walk_start"]


@dataclass(frozen=True)
class WalkTrace:
    """Visited node sequence X_0..X_T plus a description of the start rule."""

    nodes: tuple[int, ...]
    start_rule: str = "unspecified"

    def __len__(self) -> int:
        return len(self.nodes)

    def to_json_dict(self) -> dict:
        return {"start": self.nodes[0], "nodes": list(self.nodes), "start_rule": self.start_rule}


def random_walk(g: Graph, x0: int, steps: int, rng: np.random.Generator, start_rule: str = "unspecified") -> WalkTrace:
    """Run a simple random walk for ``steps`` transitions from ``x0``.

    Each transition is uniform over the current node's neighbors. Reaching a
    degree-0 node is an error: the sampling regime this models assumes the
    walk never gets stuck, and fabricating a continuation would silently
    change its law.
    """
    if g.directed:
        raise ValueError("random walks are defined on undirected graphs here")
    if not 0 <= x0 < g.n:
        raise ValueError(f"start node {x0} out of range")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    trace = [int(x0)]
    current = int(x0)
    for t in range(steps):
        nbrs = g.neighbors(current)
        if nbrs.size == 0:
            raise RuntimeError(f"walk reached degree-0 node {current} at step {t}")
        current = int(nbrs[rng.integers(nbrs.size)])
        trace.append(current)
    return WalkTrace(tuple(trace), start_rule=start_rule)


@dataclass(frozen=True)
class StartPolicy:
    """Closed set of start-node choices so experiment configs stay serializable.

    Kinds: ``uniform`` | ``fixed`` (requires ``node``) | ``max_degree`` |
    ``degree_threshold`` (requires ``threshold``; uniform among qualifying
    nodes). Any measurable start choice leaves the walk guarantees intact.
    """

    kind: str = "uniform"
    node: Optional[int] = None
    threshold: Optional[float] = None

    def __post_init__(self) -> None:
        kinds = {"uniform", "fixed", "max_degree", "degree_threshold"}
        if self.kind not in kinds:
            raise ValueError(f"unknown start policy {self.kind!r}; choose from {sorted(kinds)}")
        if self.kind == "fixed" and self.node is None:
            raise ValueError("fixed policy requires a node")
        if self.kind == "degree_threshold" and self.threshold is None:
            raise ValueError("degree_threshold policy requires a threshold")

    @classmethod
    def parse(cls, text: str) -> "StartPolicy":
        """Parse ``uniform``, ``fixed:<i>``, ``max_degree``, ``degree_threshold:<t>``."""
        kind, _, arg = text.partition(":")
        if kind == "fixed":
            return cls("fixed", node=int(arg))
        if kind == "degree_threshold":
            return cls("degree_threshold", threshold=float(arg))
        return cls(kind)

    def describe(self) -> str:
        if self.kind == "fixed":
            return f"fixed:{self.node}"
        if self.kind == "degree_threshold":
            return f"degree_threshold:{self.threshold}"
        return self.kind


def choose_walk_start(
    data: Union[NodeDataset, Graph], policy: StartPolicy, rng: np.random.Generator
) -> int:
    """Pick a start node according to ``policy``."""
    g = data.graph if isinstance(data, NodeDataset) else data
    if policy.kind == "fixed":
        if not 0 <= int(policy.node) < g.n:
            raise ValueError(f"fixed start {policy.node} out of range")
        return int(policy.node)
    if policy.kind == "uniform":
        return int(rng.integers(g.n))
    degrees = g.degrees()
    if policy.kind == "max_degree":
        return int(np.argmax(degrees))
    qualifying = np.flatnonzero(degrees > policy.threshold)
    if qualifying.size == 0:
        raise ValueError(f"no node has degree > {policy.threshold}")
    return int(qualifying[rng.integers(qualifying.size)])
