"""Brute-force verification suites behind the ``verify`` CLI subcommand.

Three suites: selector invariance (exhaustive permutation checks on small
random graphs, with an optional deliberately broken selector as a negative
control), exact conditional exchangeability (rational-arithmetic enumeration
of tiny finite populations), and Monte Carlo coverage of the split conformal
quantile rule on exchangeable continuous scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .conformal import split_conformal_threshold
from .exact import FiniteDGP, check_conditional_exchangeability
from .graphs import Graph
from .rng import substream
from .selectors import BrokenEgo, Ego, KHop, Rule, Wave, verify_invariant_selector

__all__ = ["SuiteResult", "run_coverage_suite", "run_exchangeability_suite", "run_invariance_suite"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    ok: bool
    summary: dict
    failures: tuple = ()

    def to_json_dict(self) -> dict:
        return {"suite": self.name, "ok": self.ok, "summary": self.summary,
                "failures": list(self.failures)}


def _random_graph(rng: np.random.Generator, n: int, directed: bool) -> Graph:
    p = rng.uniform(0.2, 0.7)
    adj = (rng.uniform(size=(n, n)) < p).astype(np.uint8)
    np.fill_diagonal(adj, 0)
    if not directed:
        adj = np.triu(adj, 1)
        adj = adj + adj.T
    return Graph(adj, directed=directed)


def _rules_for(n: int) -> list[Rule]:
    return [
        Ego(0),
        Wave((0,), 1),
        Wave((0, 1), 2),
        KHop((0,), 2),
    ]


def run_invariance_suite(
    n_graphs: int = 100, n_max: int = 7, seed: int = 0, inject_broken: bool = False
) -> SuiteResult:
    """Exhaustively verify selector invariance on random graphs.

    Each graph/rule pair is checked against every permutation fixing the
    non-selected nodes; any violation is returned as a concrete permutation.
    With ``inject_broken`` the root-including ego variant must *fail*, which
    validates that the checker has teeth.
    """
    rng = substream(seed, 0)
    failures = []
    n_checked = 0
    for g_idx in range(n_graphs):
        n = int(rng.integers(4, n_max + 1))
        directed = bool(g_idx % 2)
        g = _random_graph(rng, n, directed)
        for rule in _rules_for(n):
            ok, sigma = verify_invariant_selector(g, rule)
            n_checked += 1
            if not ok:
                failures.append(
                    {"graph_index": g_idx, "rule": repr(rule), "sigma": sigma.tolist()}
                )
    broken_summary: Optional[dict] = None
    if inject_broken:
        # Negative control: the run is expected to FAIL here, with the
        # violating permutation serialized; a broken rule slipping through
        # would mean the checker itself is broken.
        star = Graph.star(3)
        ok, sigma = verify_invariant_selector(star, BrokenEgo(0))
        broken_summary = {
            "counterexample_found": not ok,
            "sigma": None if sigma is None else sigma.tolist(),
        }
        if ok:
            failures.append(
                {"injected": True, "rule": "BrokenEgo(0)", "sigma": None,
                 "error": "negative control found no counterexample; checker is broken"}
            )
        else:
            failures.append(
                {"injected": True, "rule": "BrokenEgo(0)", "sigma": sigma.tolist()}
            )
    ok = not failures
    summary = {"n_graphs": n_graphs, "n_checks": n_checked, "n_failures": len(failures)}
    if broken_summary is not None:
        summary["broken_selector"] = broken_summary
    return SuiteResult("invariance", ok, summary, tuple(failures))


def run_exchangeability_suite(n: int = 5) -> SuiteResult:
    """Exact conditional-exchangeability checks on finite-support populations.

    Enumerates every (adjacency, response) configuration of small
    Bernoulli-edge populations, conditions on each selection event of the
    ego/wave/k-hop rules, and demands the conditional subarray laws be
    *identical* (exact rationals) under all within-set permutations.
    """
    dgps = [
        FiniteDGP(n=n, p_edge=Fraction(1, 2), q_y=Fraction(1, 2)),
        FiniteDGP(n=n, p_edge=Fraction(1, 3), q_y=Fraction(1, 4)),
    ]
    rules: list[Rule] = [Ego(0), Wave((0,), 1), Wave((0,), 2), KHop((0,), 2)]
    failures = []
    n_events = 0
    n_perms = 0
    for dgp in dgps:
        for rule in rules:
            report = check_conditional_exchangeability(dgp, rule)
            n_events += report.n_events
            n_perms += report.n_permutations
            for event, tau in report.failures:
                failures.append(
                    {"dgp": f"p={dgp.p_edge}, q={dgp.q_y}", "rule": repr(rule),
                     "event": list(event), "position_perm": list(tau)}
                )
    summary = {"n": n, "n_dgps": len(dgps), "n_rules": len(rules),
               "n_events": n_events, "n_permutations": n_perms, "n_failures": len(failures)}
    return SuiteResult("exchangeability", not failures, summary, tuple(failures))


def run_coverage_suite(
    m: int = 100, alpha: float = 0.1, replicates: int = 2000, seed: int = 0
) -> SuiteResult:
    """Monte Carlo marginal coverage of the split conformal threshold on
    i.i.d. continuous scores.

    For distinct scores the exact coverage is ceil((1-alpha)(m+1)) / (m+1),
    inside [1-alpha, 1-alpha + 1/(m+1)); the suite checks the empirical rate
    against that band widened by 3 Monte Carlo standard errors.
    """
    rng = substream(seed, 1)
    hits = 0
    for _ in range(replicates):
        scores = rng.standard_normal(m + 1) ** 2
        d = split_conformal_threshold(scores[:m], alpha)
        hits += bool(scores[m] <= d)
    coverage = hits / replicates
    se = math.sqrt((1 - alpha) * alpha / replicates)
    lo = (1 - alpha) - 3 * se
    hi = (1 - alpha) + 1.0 / (m + 1) + 3 * se
    ok = lo <= coverage <= hi
    summary = {
        "m": m, "alpha": alpha, "replicates": replicates,
        "coverage": coverage, "band": [lo, hi], "mc_se": se,
        "exact_target": math.ceil((1 - alpha) * (m + 1)) / (m + 1),
    }
    failures = () if ok else ({"coverage": coverage, "band": [lo, hi]},)
    return SuiteResult("coverage", ok, summary, failures)
