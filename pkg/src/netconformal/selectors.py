"""Selection rules over node indices: ego neighborhoods, snowball waves, and
k-hop unions, plus a brute-force checker for the relabeling-invariance
property those rules satisfy.

A rule is invariant when, for any permutation that fixes the complement of
the selected set pointwise and maps the selected set onto itself, relabeling
the data leaves the selection event unchanged. Ego, wave, and k-hop rules
have this property (the root/seed parameters are fixed points of every such
permutation); it is what licenses conformal prediction within the selected
nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from .graphs import Graph

__all__ = [
    "Ego",
    "Wave",
    "KHop",
    "BrokenEgo",
    "SelectionResult",
    "apply_rule",
    "ego_select",
    "snowball_wave",
    "k_hop_union",
    "stabilizer_permutations",
    "verify_invariant_selector",
]


@dataclass(frozen=True)
class Ego:
    """Neighbors of ``root``, root excluded."""

    root: int


@dataclass(frozen=True)
class Wave:
    """Nodes first reached at referral step ``k`` from seed set ``seeds``."""

    seeds: tuple[int, ...]
    k: int


@dataclass(frozen=True)
class KHop:
    """Nodes within distance ``k`` of the seed set, seeds excluded."""

    seeds: tuple[int, ...]
    k: int


@dataclass(frozen=True)
class BrokenEgo:
    """Negative-control rule: ego neighborhood with the root wrongly included.

    Deliberately violates invariance (a permutation swapping the root with a
    selected leaf changes the selection); used to validate the checker.
    """

    root: int


Rule = Union[Ego, Wave, KHop, BrokenEgo]


@dataclass(frozen=True)
class SelectionResult:
    """Sorted selected index set plus the rule that produced it."""

    selected: tuple[int, ...]
    rule: Rule

    @property
    def valid_for_conformal(self) -> bool:
        # Wave 0 is the seed set itself: computable, but it conditions on a
        # different event than the wave theory covers.
        return not (isinstance(self.rule, Wave) and self.rule.k == 0)

    def to_json_dict(self) -> dict:
        rule = self.rule
        if isinstance(rule, Ego):
            tag = {"kind": "ego", "root": rule.root}
        elif isinstance(rule, Wave):
            tag = {"kind": "wave", "seeds": list(rule.seeds), "k": rule.k}
        elif isinstance(rule, KHop):
            tag = {"kind": "khop", "seeds": list(rule.seeds), "k": rule.k}
        else:
            tag = {"kind": "broken_ego", "root": rule.root}
        return {"rule": tag, "selected": list(self.selected)}


def _check_indices(g: Graph, nodes: Iterable[int]) -> None:
    for v in nodes:
        if not 0 <= v < g.n:
            raise ValueError(f"node index {v} out of range for n={g.n}")


def ego_select(g: Graph, root: int) -> SelectionResult:
    """Out-neighbors of ``root``; the root itself is excluded.

    Including the root would break invariance: swapping it with a neighbor
    changes which node the rule is anchored to.
    """
    _check_indices(g, [root])
    selected = tuple(int(j) for j in g.neighbors(root))
    return SelectionResult(selected, Ego(root))


def _wave_sets(g: Graph, seeds: Sequence[int], kmax: int) -> list[set[int]]:
    """Waves 0..kmax: wave t holds nodes first referred at step t."""
    current = set(int(s) for s in seeds)
    seen = set(current)
    out = [set(current)]
    for _ in range(kmax):
        nxt: set[int] = set()
        for i in current:
            nxt.update(int(j) for j in g.neighbors(i))
        nxt -= seen
        out.append(nxt)
        seen |= nxt
        current = nxt
    return out

def snowball_wave(g: Graph, m0: Sequence[int], k: int) -> SelectionResult:
    """The k-th snowball wave from seed set ``m0`` (out-edges as referrals).

    ``k = 0`` returns the seeds themselves; the result is flagged as not
    valid for conformal prediction (see ``SelectionResult.valid_for_conformal``).
    """
    if len(m0) == 0:
        raise ValueError("seed set must be nonempty")
    if k < 0:
        raise ValueError("wave index must be >= 0")
    _check_indices(g, m0)
    waves = _wave_sets(g, m0, k)
    return SelectionResult(tuple(sorted(waves[k])), Wave(tuple(sorted(set(map(int, m0)))), k))


def k_hop_union(g: Graph, m0: Sequence[int], k: int) -> SelectionResult:
    """Nodes at (quasi-)distance at most ``k`` from ``m0``, seeds excluded.

    Equals the union of waves 1..k.
    """
    if k < 1:
        raise ValueError("radius must be >= 1")
    if len(m0) == 0:
        raise ValueError("seed set must be nonempty")
    _check_indices(g, m0)
    waves = _wave_sets(g, m0, k)
    union: set[int] = set()
    for wave in waves[1:]:
        union |= wave
    return SelectionResult(tuple(sorted(union)), KHop(tuple(sorted(set(map(int, m0)))), k))


def apply_rule(g: Graph, rule: Rule) -> SelectionResult:
    if isinstance(rule, Ego):
        return ego_select(g, rule.root)
    if isinstance(rule, Wave):
        return snowball_wave(g, rule.seeds, rule.k)
    if isinstance(rule, KHop):
        return k_hop_union(g, rule.seeds, rule.k)
    if isinstance(rule, BrokenEgo):
        base = ego_select(g, rule.root)
        return SelectionResult(tuple(sorted(set(base.selected) | {rule.root})), rule)
    raise TypeError(f"unknown rule {rule!r}")


def stabilizer_permutations(n: int, selected: Sequence[int]) -> Iterator[np.ndarray]:
    """All permutations of 0..n-1 fixing the complement of ``selected``
    pointwise and mapping ``selected`` onto itself.
    """
    selected = sorted(int(v) for v in selected)
    base = np.arange(n, dtype=np.intp)
    for perm in itertools.permutations(selected):
        sigma = base.copy()
        sigma[selected] = perm
        yield sigma


def verify_invariant_selector(
    g: Graph, rule: Rule, selected: Optional[Sequence[int]] = None
) -> tuple[bool, Optional[np.ndarray]]:
    """Brute-force the invariance property of ``rule`` on the concrete graph ``g``.

    With ``S`` the conditioning set (defaults to the rule's own output, so the
    selection event is witnessed), every stabilizer permutation ``sigma`` must
    satisfy ``[rule(g^sigma) == S] == [rule(g) == S]``. Returns ``(True, None)``
    or ``(False, sigma)`` for the first violating permutation.

    Exhaustive over ``|S|!`` permutations; intended for small graphs.
    """
    baseline = tuple(apply_rule(g, rule).selected)
    target = baseline if selected is None else tuple(sorted(int(v) for v in selected))
    base_event = baseline == target
    for sigma in stabilizer_permutations(g.n, target):
        relabeled = apply_rule(g.relabel(sigma), rule).selected
        if (tuple(relabeled) == target) != base_event:
            return False, sigma
    return True, None
