"""Data-generating processes and coverage experiment drivers.

Two synthetic populations are provided: a spatial-autoregressive regression
on a rank-3 latent-position graph (exercised by the snowball-sampling
experiment) and a Gaussian latent space model with a nonlinear response
(exercised by the random-walk experiment). Drivers run replicates on
independent substreams keyed by (master seed, replicate index), so results
are reproducible bit-for-bit and identical whether replicates run serially
or on a process pool.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .conformal import (
    CalibrationScores,
    PredictionSet,
    split_conformal_predict,
    split_conformal_threshold,
    walk_weights,
    weighted_interval,
)
from .covariates import CovariateBundle, ase_embedding
from .generators import (
    min_graphon_rdpg_positions,
    sample_bernoulli_graph,
    sample_fixed_out_degree_digraph,
    sample_gaussian_latent_space_graph,
)
from .graphs import Graph, NodeDataset
from .regression import fit_ols
from .rng import substream
from .selectors import k_hop_union, snowball_wave
from .walks import StartPolicy, choose_walk_start, random_walk

__all__ = [
    "CoverageCell",
    "CoverageReport",
    "SarPopulation",
    "SnowballExperimentConfig",
    "WalkExperimentConfig",
    "gen_sar_dataset",
    "gen_walk_dataset",
    "run_snowball_experiment",
    "run_walk_experiment",
    "solve_sar_neumann",
]

logger = logging.getLogger(__name__)

COVERAGE_CSV_COLUMNS = ("scheme", "target", "model", "coverage", "width", "se", "n_reps", "n_skipped")

SCHEME_SEED_COUNTS = {1: 3, 2: 10, 3: 20}
SCHEME_REFERRALS = {2: 10, 3: 5}

WALK_MU = np.array([1.0, 3.0, 0.0])
WALK_SIGMA = np.array([[1.0, 0.6, 0.3], [0.6, 4.0, -0.4], [0.3, -0.4, 1.0]])


# ---------------------------------------------------------------------------
# configs


def _check_fields(raw: dict, allowed: set[str], where: str) -> None:
    for key in raw:
        if key not in allowed:
            raise ValueError(f"unknown field {key!r} in {where} config (allowed: {sorted(allowed)})")


@dataclass(frozen=True)
class SnowballExperimentConfig:
    """Snowball-sampling coverage experiment.

    Referral schemes: 1 = 3 random seeds, every neighbor recruited (waves run
    on the adjacency itself); 2 = 10 seeds, each node refers its 10 largest
    edge-probability partners; 3 = 20 seeds, 5 referrals each. Targets are
    the first wave, the second wave, and the 2-hop union.
    """

    n: int = 500
    scheme: int = 1
    targets: tuple[str, ...] = ("wave1", "wave2", "hop2")
    models: tuple[str, ...] = ("kernel", "ols")
    alpha: float = 0.1
    replicates: int = 200
    seed: int = 20260810
    sparsity_coefficient: float = 5.0
    sparsity_exponent: float = -0.25
    ase_dim: int = 3
    split: str = "parity"
    referral_ranking: str = "deterministic"  # or "perturbed": jittered continuous keys
    # Small waves can leave the fit fold with fewer points than regression
    # columns; a vanishing ridge keeps the fit defined (conformal coverage is
    # model-agnostic) without measurably changing well-posed fits.
    ridge: float = 1e-8

    def __post_init__(self) -> None:
        if self.scheme not in SCHEME_SEED_COUNTS:
            raise ValueError(f"scheme must be 1, 2, or 3, got {self.scheme}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        bad = set(self.targets) - {"wave1", "wave2", "hop2"}
        if bad:
            raise ValueError(f"unknown targets {sorted(bad)}")
        bad = set(self.models) - {"kernel", "ols"}
        if bad:
            raise ValueError(f"unknown models {sorted(bad)}")
        if self.referral_ranking not in ("deterministic", "perturbed"):
            raise ValueError("referral_ranking must be 'deterministic' or 'perturbed'")

    @property
    def nu(self) -> float:
        return self.sparsity_coefficient * self.n**self.sparsity_exponent

    @classmethod
    def from_dict(cls, raw: dict) -> "SnowballExperimentConfig":
        allowed = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        _check_fields(raw, allowed, "snowball")
        raw = dict(raw)
        for key in ("targets", "models"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "scheme": self.scheme,
            "targets": list(self.targets),
            "models": list(self.models),
            "alpha": self.alpha,
            "replicates": self.replicates,
            "seed": self.seed,
            "sparsity_coefficient": self.sparsity_coefficient,
            "sparsity_exponent": self.sparsity_exponent,
            "ase_dim": self.ase_dim,
            "split": self.split,
            "referral_ranking": self.referral_ranking,
            "ridge": self.ridge,
        }

    def paper_scale(self) -> "SnowballExperimentConfig":
        """The published experiment size: 2000-node population, 500 runs."""
        return replace(self, n=2000, replicates=500)


@dataclass(frozen=True)
class WalkExperimentConfig:
    """Random-walk coverage experiment with a uniform-sampling baseline arm."""

    n: int = 1000
    nu: float = 0.1
    m: int = 50
    alpha: float = 0.2
    replicates: int = 200
    seed: int = 20260810
    start: StartPolicy = field(default_factory=StartPolicy)

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if 2 * self.m + 1 > self.n:
            logger.warning("walk length 2m+1=%d exceeds population size %d", 2 * self.m + 1, self.n)

    @classmethod
    def from_dict(cls, raw: dict) -> "WalkExperimentConfig":
        allowed = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        _check_fields(raw, allowed, "walk")
        raw = dict(raw)
        if "start" in raw and isinstance(raw["start"], str):
            raw["start"] = StartPolicy.parse(raw["start"])
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "nu": self.nu,
            "m": self.m,
            "alpha": self.alpha,
            "replicates": self.replicates,
            "seed": self.seed,
            "start": self.start.describe(),
        }

    def paper_scale(self) -> "WalkExperimentConfig":
        """The published experiment size: 2000-node population, 500 runs."""
        return replace(self, n=2000, replicates=500)


# ---------------------------------------------------------------------------
# populations


@dataclass(frozen=True)
class SarPopulation:
    """Spatial-autoregressive population plus its edge-probability matrix."""

    data: NodeDataset
    p_matrix: np.ndarray
    z: np.ndarray
    clamp_rate: float
    residual: float


def solve_sar_neumann(B: np.ndarray, rhs: np.ndarray, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Neumann-series solve of (I - 0.5 B) y = rhs.

    Converges because ||0.5 B||_inf <= 0.5 < 1 for a row-normalized B;
    kept as an independent cross-check of the direct solver.
    """
    y = rhs.copy()
    for _ in range(max_iter):
        y_next = rhs + 0.5 * (B @ y)
        if np.max(np.abs(y_next - y)) < tol:
            return y_next
        y = y_next
    return y


def gen_sar_dataset(n: int, rng: np.random.Generator, sparsity_coefficient: float = 5.0,
                    sparsity_exponent: float = -0.25) -> SarPopulation:
    """Population for the snowball experiment.

    Latent positions are uniform; rank-3 positions Z come from the truncated
    eigendecomposition of the min(x, y) kernel; edges are Bernoulli with
    probability nu * Z_i . Z_j (clamped into [0, 1] with the clamp rate
    recorded). The response solves the autoregressive system
    (I - 0.5 B) Y = 2 + 2 B X + 10 Z_1 + 20 Z_2 + 10 Z_3 + 4 X + eps with B
    the row-normalized adjacency, so neighborhood effects are endogenous.
    """
    nu = sparsity_coefficient * n**sparsity_exponent
    xi = rng.uniform(size=n)
    z = min_graphon_rdpg_positions(xi, 3)
    raw = nu * (z @ z.T)
    clamped = np.clip(raw, 0.0, 1.0)
    off = ~np.eye(n, dtype=bool)
    clamp_rate = float(np.mean(raw[off] != clamped[off]))
    if clamp_rate > 0:
        logger.debug("clamped %.4f of edge probabilities into [0, 1]", clamp_rate)
    np.fill_diagonal(clamped, 0.0)
    graph = sample_bernoulli_graph(clamped, rng)

    u = rng.uniform(-2.0, 1.0, size=n)
    x = u + 4.0 * z[:, 0]
    eps = rng.standard_normal(n)

    deg = graph.degrees().astype(np.float64)
    B = np.zeros((n, n))
    nz = deg > 0
    B[nz] = graph.adj[nz].astype(np.float64) / deg[nz, None]
    rhs = 2.0 + 2.0 * (B @ x) + 10.0 * z[:, 0] + 20.0 * z[:, 1] + 10.0 * z[:, 2] + 4.0 * x + eps
    y = np.linalg.solve(np.eye(n) - 0.5 * B, rhs)
    residual = float(np.max(np.abs((np.eye(n) - 0.5 * B) @ y - rhs)))

    data = NodeDataset(y=y, x=x[:, None], graph=graph, latent=xi)
    return SarPopulation(data=data, p_matrix=clamped, z=z, clamp_rate=clamp_rate, residual=residual)


def walk_regression_response(x: np.ndarray, eps: np.ndarray) -> np.ndarray:
    return 3.0 + 8.0 * x[..., 0] + 4.0 * np.sin(4.0 * np.pi * x[..., 1]) + 3.0 * x[..., 2] + eps


def draw_walk_covariates(rng: np.random.Generator, size: int) -> np.ndarray:
    L = np.linalg.cholesky(WALK_SIGMA)
    return WALK_MU + rng.standard_normal((size, 3)) @ L.T


def gen_walk_dataset(n: int, nu: float, rng: np.random.Generator) -> NodeDataset:
    """Population for the random-walk experiment: trivariate Gaussian
    covariates, a sinusoidal response, and a Gaussian latent space graph
    keyed to the third covariate (which the fitted model never sees)."""
    x = draw_walk_covariates(rng, n)
    eps = rng.standard_normal(n)
    y = walk_regression_response(x, eps)
    graph = sample_gaussian_latent_space_graph(x[:, 2], nu, rng)
    return NodeDataset(y=y, x=x, graph=graph)


# ---------------------------------------------------------------------------
# coverage bookkeeping


@dataclass(frozen=True)
class CoverageCell:
    scheme: str
    target: str
    model: str
    coverage: float
    width: float
    se: float
    n_reps: int
    n_skipped: int
    n_infinite: int = 0


@dataclass(frozen=True)
class CoverageReport:
    kind: str
    cells: tuple[CoverageCell, ...]
    config: dict
    n_resampled: int
    wall_time: float

    def cell(self, scheme: str, target: str, model: str) -> CoverageCell:
        for c in self.cells:
            if (c.scheme, c.target, c.model) == (scheme, target, model):
                return c
        raise KeyError((scheme, target, model))

    def csv_rows(self) -> list[list]:
        rows = [list(COVERAGE_CSV_COLUMNS)]
        for c in self.cells:
            rows.append(
                [c.scheme, c.target, c.model, f"{c.coverage:.6f}", f"{c.width:.6f}",
                 f"{c.se:.6f}", c.n_reps, c.n_skipped]
            )
        return rows

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "n_resampled": self.n_resampled,
            "wall_time_s": self.wall_time,
            "cells": [
                {
                    "scheme": c.scheme, "target": c.target, "model": c.model,
                    "coverage": c.coverage, "width": c.width, "se": c.se,
                    "n_reps": c.n_reps, "n_skipped": c.n_skipped, "n_infinite": c.n_infinite,
                }
                for c in self.cells
            ],
        }


class _CellAccumulator:
    def __init__(self) -> None:
        self.covered: list[bool] = []
        self.widths: list[float] = []
        self.n_skipped = 0
        self.n_infinite = 0

    def add(self, covered: bool, width: float) -> None:
        self.covered.append(covered)
        if math.isinf(width):
            self.n_infinite += 1
        else:
            self.widths.append(width)

    def cell(self, scheme: str, target: str, model: str) -> CoverageCell:
        n = len(self.covered)
        coverage = float(np.mean(self.covered)) if n else float("nan")
        width = float(np.mean(self.widths)) if self.widths else float("inf")
        se = math.sqrt(coverage * (1.0 - coverage) / n) if n else float("nan")
        return CoverageCell(
            scheme=scheme, target=target, model=model, coverage=coverage,
            width=width, se=se, n_reps=n, n_skipped=self.n_skipped,
            n_infinite=self.n_infinite,
        )


# ---------------------------------------------------------------------------
# snowball experiment


def _referral_graph(cfg: SnowballExperimentConfig, pop: SarPopulation, rng: np.random.Generator) -> Graph:
    if cfg.scheme == 1:
        return pop.data.graph
    r = SCHEME_REFERRALS[cfg.scheme]
    keys = pop.p_matrix
    if cfg.referral_ranking == "perturbed":
        # Continuous referral keys: a vanishing uniform jitter breaks the
        # (measure-zero under the model, possible after clamping) ties.
        keys = keys + 1e-9 * rng.uniform(size=keys.shape)
    return sample_fixed_out_degree_digraph(keys, r)


def _select_target(referral: Graph, seeds: np.ndarray, target: str) -> np.ndarray:
    if target == "wave1":
        return np.asarray(snowball_wave(referral, seeds, 1).selected, dtype=np.intp)
    if target == "wave2":
        return np.asarray(snowball_wave(referral, seeds, 2).selected, dtype=np.intp)
    if target == "hop2":
        return np.asarray(k_hop_union(referral, seeds, 2).selected, dtype=np.intp)
    raise ValueError(f"unknown target {target!r}")


def _snowball_replicate(cfg: SnowballExperimentConfig, rep: int) -> dict:
    """One replicate: generate, select, and run conformal per (target, model).

    Returns per-cell outcomes: {"cells": {(target, model): (covered, width)},
    "skipped": {target: reason}, "resampled": int}.
    """
    rng = substream(cfg.seed, rep)
    resampled = 0
    while True:
        try:
            pop = gen_sar_dataset(cfg.n, rng, cfg.sparsity_coefficient, cfg.sparsity_exponent)
            break
        except np.linalg.LinAlgError:
            resampled += 1
            logger.warning("replicate %d: singular autoregressive system, resampling", rep)
            if resampled > 100:
                raise
    if pop.residual > 1e-8:
        raise RuntimeError(f"autoregressive solve residual {pop.residual:.2e} exceeds 1e-8")

    referral = _referral_graph(cfg, pop, rng)
    n_seeds = SCHEME_SEED_COUNTS[cfg.scheme]
    seeds = np.sort(rng.choice(cfg.n, size=n_seeds, replace=False))

    cells: dict[tuple[str, str], tuple[bool, float]] = {}
    skipped: dict[str, str] = {}
    for target in cfg.targets:
        selected = _select_target(referral, seeds, target)
        if selected.size < 3:
            skipped[target] = f"selected set of size {selected.size} < 3"
            continue
        ds = pop.data.subset(selected)
        emb = ase_embedding(ds.graph, min(cfg.ase_dim, ds.n))
        cov = CovariateBundle(emb, tuple(f"ase_{k}" for k in range(emb.shape[1])))
        test_position = int(rng.integers(ds.n))
        for model in cfg.models:
            pred, _ = split_conformal_predict(
                ds, cov, alpha=cfg.alpha, model_kind=model, split=cfg.split,
                test_position=test_position, rng=rng, ridge=cfg.ridge,
            )
            cells[(target, model)] = (pred.contains(ds.y[test_position]), pred.width)
    return {"cells": cells, "skipped": skipped, "resampled": resampled}


def _run_replicates(worker, cfg, threads: int) -> list[dict]:
    reps = range(cfg.replicates)
    if threads <= 1:
        return [worker(cfg, rep) for rep in reps]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, [cfg] * cfg.replicates, reps))


def run_snowball_experiment(cfg: SnowballExperimentConfig, threads: int = 1) -> CoverageReport:
    """Monte Carlo coverage of split conformal prediction within snowball
    selections, per (target, model) cell."""
    t0 = time.monotonic()
    results = _run_replicates(_snowball_replicate, cfg, threads)
    acc: dict[tuple[str, str], _CellAccumulator] = {
        (target, model): _CellAccumulator() for target in cfg.targets for model in cfg.models
    }
    n_resampled = 0
    for res in results:  # replicate order fixed by _run_replicates
        n_resampled += res["resampled"]
        for target in cfg.targets:
            if target in res["skipped"]:
                for model in cfg.models:
                    acc[(target, model)].n_skipped += 1
                continue
            for model in cfg.models:
                covered, width = res["cells"][(target, model)]
                acc[(target, model)].add(covered, width)
    scheme_name = f"scheme{cfg.scheme}"
    cells = tuple(
        acc[(target, model)].cell(scheme_name, target, model)
        for target in cfg.targets
        for model in cfg.models
    )
    return CoverageReport(
        kind="snowball", cells=cells, config=cfg.to_dict(),
        n_resampled=n_resampled, wall_time=time.monotonic() - t0,
    )


# ---------------------------------------------------------------------------
# random-walk experiment


def _walk_replicate(cfg: WalkExperimentConfig, rep: int) -> dict:
    rng = substream(cfg.seed, rep)
    resampled = 0
    while True:
        ds = gen_walk_dataset(cfg.n, cfg.nu, rng)
        try:
            x0 = choose_walk_start(ds, cfg.start, rng)
            trace = random_walk(ds.graph, x0, 2 * cfg.m, rng, start_rule=cfg.start.describe())
            break
        except (RuntimeError, ValueError):
            resampled += 1
            logger.warning("replicate %d: walk stuck, resampling population", rep)
            if resampled > 100:
                raise

    m = cfg.m
    fit_idx = np.asarray(trace.nodes[: m + 1], dtype=np.intp)
    cal_idx = np.asarray(trace.nodes[m + 1 :], dtype=np.intp)
    # The third covariate drives the graph but is treated as unobserved.
    model = fit_ols(ds.x[fit_idx, :2], ds.y[fit_idx])
    cal_scores = np.abs(ds.y[cal_idx] - model.predict(ds.x[cal_idx, :2]))
    weights = walk_weights(ds.graph, trace)

    x_test = draw_walk_covariates(rng, 1)[0]
    y_test = float(walk_regression_response(x_test, rng.standard_normal()))

    cal = CalibrationScores(scores=cal_scores, alpha=cfg.alpha, weights=weights)
    center_w = float(model.predict(x_test[None, :2])[0])
    pred_w = weighted_interval(cal, center=center_w)

    uniform_idx = rng.choice(cfg.n, size=2 * m, replace=False)
    u_fit, u_cal = uniform_idx[:m], uniform_idx[m:]
    u_model = fit_ols(ds.x[u_fit, :2], ds.y[u_fit])
    u_scores = np.abs(ds.y[u_cal] - u_model.predict(ds.x[u_cal, :2]))
    d = split_conformal_threshold(u_scores, cfg.alpha)
    center_u = float(u_model.predict(x_test[None, :2])[0])
    pred_u = PredictionSet(mode="split", threshold=d, center=center_u)

    return {
        "walk": (pred_w.contains(y_test), pred_w.width),
        "uniform": (pred_u.contains(y_test), pred_u.width),
        "resampled": resampled,
    }


def run_walk_experiment(cfg: WalkExperimentConfig, threads: int = 1) -> CoverageReport:
    """Monte Carlo coverage of weighted conformal prediction over random-walk
    samples against the uniform-sampling split-conformal baseline, both
    evaluated on an independently drawn test point per replicate."""
    t0 = time.monotonic()
    results = _run_replicates(_walk_replicate, cfg, threads)
    acc = {"random_walk": _CellAccumulator(), "uniform": _CellAccumulator()}
    n_resampled = 0
    for res in results:
        n_resampled += res["resampled"]
        acc["random_walk"].add(*res["walk"])
        acc["uniform"].add(*res["uniform"])
    cells = (
        acc["random_walk"].cell("random_walk", "fresh_draw", "ols"),
        acc["uniform"].cell("uniform", "fresh_draw", "ols"),
    )
    return CoverageReport(
        kind="walk", cells=cells, config=cfg.to_dict(),
        n_resampled=n_resampled, wall_time=time.monotonic() - t0,
    )
