"""Exhaustive, exact-arithmetic verification of conditional exchangeability.

On a tiny finite-support data-generating process (independent Bernoulli
edges, independent binary responses) every configuration of the population
array can be enumerated with rational probabilities. For an invariant
selection rule, the conditional law of the selected subarray given the
selection event must be identical under every permutation that maps the
selected set onto itself — an exact statement, checked here with exact
Fractions so there is no Monte Carlo or floating-point slack anywhere in the
core correctness argument.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import numpy as np

from .graphs import Graph
from .selectors import Rule, apply_rule

__all__ = [
    "ExchangeabilityReport",
    "FiniteDGP",
    "check_conditional_exchangeability",
    "conditional_laws",
    "selection_probabilities",
]

# Law of the selected subarray: (y values on S, adjacency restricted to S),
# both in S-sorted position order, mapped to an unnormalized rational mass.
SubarrayKey = tuple[tuple[int, ...], tuple[tuple[int, ...], ...]]
Law = dict[SubarrayKey, Fraction]


@dataclass(frozen=True)
class FiniteDGP:
    """Binary-response population with independent Bernoulli(p) dyads.

    Undirected graphs have C(n, 2) independent dyads; directed graphs have
    n(n-1). Responses are i.i.d. Bernoulli(q), independent of the graph.
    """

    n: int
    p_edge: Fraction
    q_y: Fraction
    directed: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.p_edge, Fraction) or not isinstance(self.q_y, Fraction):
            raise TypeError("p_edge and q_y must be Fractions for exact enumeration")
        if not (0 < self.p_edge < 1 and 0 < self.q_y < 1):
            raise ValueError("p_edge and q_y must lie strictly in (0, 1)")
        if self.n < 2:
            raise ValueError("n must be >= 2")

    def dyads(self) -> list[tuple[int, int]]:
        if self.directed:
            return [(i, j) for i in range(self.n) for j in range(self.n) if i != j]
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]


def _adjacency_configs(dgp: FiniteDGP) -> Iterator[tuple[Graph, Fraction]]:
    """Every adjacency configuration with its exact probability."""
    dyads = dgp.dyads()
    n_dyads = len(dyads)
    p = dgp.p_edge
    # Probability depends only on the edge count; precompute the powers.
    mass = [p**k * (1 - p) ** (n_dyads - k) for k in range(n_dyads + 1)]
    for bits in itertools.product((0, 1), repeat=n_dyads):
        adj = np.zeros((dgp.n, dgp.n), dtype=np.uint8)
        for (i, j), b in zip(dyads, bits):
            if b:
                adj[i, j] = 1
                if not dgp.directed:
                    adj[j, i] = 1
        yield Graph(adj, directed=dgp.directed), mass[sum(bits)]


def conditional_laws(dgp: FiniteDGP, rule: Rule) -> dict[tuple[int, ...], Law]:
    """Joint masses of (subarray value, selection event) for every selection
    outcome of ``rule``, by literal enumeration of all (A, Y) configurations.

    Masses are unnormalized (they sum to P(S = S0) within each event), which
    is all the equality check needs.
    """
    n = dgp.n
    q = dgp.q_y
    y_mass = [q**k * (1 - q) ** (n - k) for k in range(n + 1)]
    laws: dict[tuple[int, ...], Law] = {}
    for graph, a_prob in _adjacency_configs(dgp):
        s0 = tuple(apply_rule(graph, rule).selected)
        law = laws.setdefault(s0, {})
        sub = graph.adj[np.ix_(s0, s0)]
        a_key = tuple(tuple(int(v) for v in row) for row in sub)
        for y in itertools.product((0, 1), repeat=n):
            key = (tuple(y[i] for i in s0), a_key)
            mass = a_prob * y_mass[sum(y)]
            law[key] = law.get(key, Fraction(0)) + mass
    return laws


def selection_probabilities(dgp: FiniteDGP, rule: Rule) -> dict[tuple[int, ...], Fraction]:
    """Exact P(S = S0) for every selection outcome."""
    return {s0: sum(law.values(), Fraction(0)) for s0, law in conditional_laws(dgp, rule).items()}


def _pushforward(law: Law, tau: tuple[int, ...]) -> Law:
    """Law of the relabeled subarray: position a takes the original value at
    position tau(a)."""
    out: Law = {}
    for (y, a), mass in law.items():
        y2 = tuple(y[t] for t in tau)
        a2 = tuple(tuple(a[ti][tj] for tj in tau) for ti in tau)
        key = (y2, a2)
        out[key] = out.get(key, Fraction(0)) + mass
    return out


@dataclass(frozen=True)
class ExchangeabilityReport:
    ok: bool
    n_events: int
    n_permutations: int
    failures: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]  # (S0, position perm)


def check_conditional_exchangeability(
    dgp: FiniteDGP, rule: Rule, s0: Optional[tuple[int, ...]] = None
) -> ExchangeabilityReport:
    """Verify that, for every selection event of positive probability (or the
    one given), the conditional subarray law is invariant under all
    permutations of the selected positions. Exact; no tolerance anywhere.
    """
    laws = conditional_laws(dgp, rule)
    events = [s0] if s0 is not None else sorted(laws)
    failures: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    n_perms = 0
    for event in events:
        if event not in laws:
            raise ValueError(f"selection event {event} has probability zero")
        law = laws[event]
        k = len(event)
        for tau in itertools.permutations(range(k)):
            n_perms += 1
            if _pushforward(law, tau) != law:
                failures.append((event, tau))
                break
    return ExchangeabilityReport(
        ok=not failures,
        n_events=len(events),
        n_permutations=n_perms,
        failures=tuple(failures),
    )
