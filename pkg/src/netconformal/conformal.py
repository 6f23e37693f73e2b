"""Split conformal prediction and its degree-weighted variant for
random-walk samples.

Split conformal thresholds calibration scores at the inflated empirical
quantile level (1 - alpha)(1 + 1/m), which delivers finite-sample coverage
at least 1 - alpha for exchangeable scores. The weighted variant replaces
the empirical CDF with a walk-visit-weighted one, using weights
nu(j) = 2|E| / (n D_j) that undo the walk's bias toward high-degree nodes;
its guarantee is asymptotic.

Boundary conventions (fixed for determinism; immaterial for continuously
distributed scores): the split set is closed at its threshold, the weighted
set is half-open, and a score tied with the mass target to within 1e-12 is
treated as not exceeding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graphs import Graph, NodeDataset
from .covariates import CovariateBundle
from .regression import fit_kernel_smoother, fit_ols
from .walks import WalkTrace

__all__ = [
    "CalibrationScores",
    "PredictionSet",
    "split_conformal_threshold",
    "split_conformal_predict",
    "walk_weights",
    "weighted_conformal_membership",
    "weighted_interval",
]

# Slack for comparing accumulated floating-point mass against (1 - alpha):
# mathematical ties must count as "not exceeding" regardless of rounding.
_MASS_TIE_TOL = 1e-12


@dataclass(frozen=True)
class CalibrationScores:
    """Calibration scores, optional per-score walk weights, and the level alpha."""

    scores: np.ndarray
    alpha: float
    weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1 or scores.size == 0:
            raise ValueError("scores must be a nonempty vector")
        if np.any(scores < 0):
            raise ValueError("non-conformity scores must be nonnegative")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        object.__setattr__(self, "scores", scores)
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=np.float64)
            if weights.shape != scores.shape:
                raise ValueError("weights must match scores in length")
            if np.any(weights < 0):
                raise ValueError("weights must be nonnegative")
            object.__setattr__(self, "weights", weights)

    @property
    def m(self) -> int:
        return self.scores.size


@dataclass(frozen=True)
class PredictionSet:
    """Prediction set for absolute-residual scores: an interval around ``center``.

    ``mode`` is "split" (closed interval) or "weighted" (half-open: scores
    strictly below the threshold are members). ``threshold`` may be +inf,
    in which case the set is the whole line.
    """

    mode: str
    threshold: float
    center: float = 0.0

    @property
    def closed(self) -> bool:
        return self.mode == "split"

    @property
    def interval(self) -> tuple[float, float]:
        return (self.center - self.threshold, self.center + self.threshold)

    @property
    def width(self) -> float:
        return 2.0 * self.threshold

    def contains_score(self, s: float) -> bool:
        if math.isinf(self.threshold):
            return True
        return s <= self.threshold if self.closed else s < self.threshold

    def contains(self, y: float) -> bool:
        return self.contains_score(abs(y - self.center))

    def to_json_dict(self) -> dict:
        lo, hi = self.interval
        return {
            "mode": self.mode,
            "threshold": None if math.isinf(self.threshold) else float(self.threshold),
            "interval": [
                None if math.isinf(lo) else float(lo),
                None if math.isinf(hi) else float(hi),
            ],
        }


def split_conformal_threshold(scores: np.ndarray, alpha: float) -> float:
    """The (1 - alpha)(1 + 1/m) empirical quantile of the calibration scores.

    Returns the k-th smallest score with k = ceil((1 - alpha)(m + 1)); when
    that level exceeds 1 (small m) the threshold is +inf and the prediction
    set is the whole line.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("scores must be a nonempty vector")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    m = scores.size
    # The 1e-9 nudge keeps mathematically integral levels (e.g. 0.9 * 10)
    # from rounding up through float fuzz and spuriously saturating.
    k = math.ceil((1.0 - alpha) * (m + 1) - 1e-9)
    if k > m:
        return math.inf
    return float(np.sort(scores)[k - 1])


def weighted_conformal_membership(cal: CalibrationScores, s_query: float) -> bool:
    """Membership test of the weighted set: the weighted fraction of
    calibration scores at or below the query must not exceed 1 - alpha."""
    if cal.weights is None:
        raise ValueError("weighted membership requires calibration weights")
    mass = float(np.sum(cal.weights * (cal.scores <= s_query))) / cal.m
    return mass <= (1.0 - cal.alpha) + _MASS_TIE_TOL


def weighted_interval(cal: CalibrationScores, center: float = 0.0) -> PredictionSet:
    """Closed-form threshold of the weighted set for absolute-residual scores.

    t* is the smallest calibration score at which the cumulative weighted
    mass first exceeds 1 - alpha (half-open set {s < t*}); if the total mass
    never exceeds 1 - alpha the set is the whole line.
    """
    if cal.weights is None:
        raise ValueError("weighted interval requires calibration weights")
    order = np.argsort(cal.scores, kind="stable")
    cum = np.cumsum(cal.weights[order]) / cal.m
    exceeding = np.flatnonzero(cum > (1.0 - cal.alpha) + _MASS_TIE_TOL)
    if exceeding.size == 0:
        return PredictionSet(mode="weighted", threshold=math.inf, center=center)
    t_star = float(cal.scores[order][exceeding[0]])
    return PredictionSet(mode="weighted", threshold=t_star, center=center)


def walk_weights(g: Graph, trace: WalkTrace) -> np.ndarray:
    """Degree-debiasing weights nu(j) = 2|E| / (n D_j) for the calibration half
    of a length-(2m+1) walk trace (states m+1 .. 2m)."""
    if g.directed:
        raise ValueError("walk weights are defined for undirected graphs")
    if len(trace) < 3 or len(trace) % 2 == 0:
        raise ValueError("trace must have odd length 2m + 1 with m >= 1")
    if g.edge_count() < 1:
        raise ValueError("graph must have at least one edge")
    m = (len(trace) - 1) // 2
    cal_nodes = np.asarray(trace.nodes[m + 1 :], dtype=np.intp)
    deg = g.degrees()[cal_nodes].astype(np.float64)
    if np.any(deg == 0):
        raise ValueError("degree-0 node in calibration trace")
    two_e = 2.0 * g.edge_count()
    return two_e / (g.n * deg)


def _fold_positions(
    m_total: int, test_position: int, split: str, rng: Optional[np.random.Generator]
) -> tuple[np.ndarray, np.ndarray]:
    rest = np.array([i for i in range(m_total) if i != test_position], dtype=np.intp)
    if split == "parity":
        return rest[0::2], rest[1::2]
    if split == "random":
        if rng is None:
            raise ValueError("random split requires an rng")
        perm = rng.permutation(rest)
        half = rest.size // 2
        return np.sort(perm[:half]), np.sort(perm[half:])
    raise ValueError(f"unknown split spec {split!r}; use 'parity' or 'random'")


def split_conformal_predict(
    ds: NodeDataset,
    cov: Optional[CovariateBundle],
    alpha: float,
    model_kind: str = "ols",
    split: str = "parity",
    test_position: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    ridge: float = 0.0,
) -> tuple[PredictionSet, dict]:
    """Split conformal prediction on an already-selected dataset.

    ``ds`` holds the selected nodes (and, through ``cov``, any network
    covariates computed on the selected subarray only). The held-out test
    point defaults to the last position; the remainder is split into a fit
    fold and a calibration fold ("parity": alternating positions; "random":
    a seeded random half-split). ``model_kind`` is "kernel" (smoother on x
    alone) or "ols" (linear in x and the network covariates). The model is
    fit strictly on the fit fold; calibration responses never reach it.

    Returns the prediction set for the test point and a diagnostics dict.
    """
    m_total = ds.n
    if m_total < 3:
        raise ValueError(f"need at least 3 selected nodes, got {m_total}")
    if test_position is None:
        test_position = m_total - 1
    if not 0 <= test_position < m_total:
        raise ValueError("test position out of range")
    d1, d2 = _fold_positions(m_total, test_position, split, rng)
    if d1.size == 0 or d2.size == 0:
        raise ValueError("both folds must be nonempty")

    if model_kind == "kernel":
        features = ds.x
    elif model_kind == "ols":
        features = ds.x if cov is None else np.hstack([ds.x, cov.zhat])
    else:
        raise ValueError(f"unknown model kind {model_kind!r}; use 'kernel' or 'ols'")

    if model_kind == "kernel":
        model = fit_kernel_smoother(features[d1], ds.y[d1])
    else:
        model = fit_ols(features[d1], ds.y[d1], ridge=ridge)

    cal_scores = np.abs(ds.y[d2] - model.predict(features[d2]))
    threshold = split_conformal_threshold(cal_scores, alpha)
    center = float(model.predict(features[test_position][None, :])[0])
    pred = PredictionSet(mode="split", threshold=threshold, center=center)
    diagnostics = {
        "n_selected": m_total,
        "n_fit": int(d1.size),
        "n_cal": int(d2.size),
        "test_position": int(test_position),
        "threshold": threshold,
        "model": model.to_json_dict(),
    }
    return pred, diagnostics
