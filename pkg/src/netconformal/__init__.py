"""Conformal prediction for network-assisted regression under non-uniform node sampling.

Provides graph/regression data generators, selection rules (ego, snowball
waves, k-hop unions), random-walk sampling with degree-debiasing weights,
split and weighted conformal prediction, spectral mixing diagnostics, and a
reproducible simulation harness with a CLI front end.
"""

__version__ = "0.1.0"

from .graphs import Graph, NodeDataset, read_edge_list, write_edge_list
from .generators import (
    GraphonSpec,
    kernel_by_name,
    min_graphon_eigenvalue,
    min_graphon_rdpg_positions,
    sample_bernoulli_graph,
    sample_fixed_out_degree_digraph,
    sample_gaussian_latent_space_graph,
    sample_graphon_graph,
)
from .selectors import (
    BrokenEgo,
    Ego,
    KHop,
    SelectionResult,
    Wave,
    apply_rule,
    ego_select,
    k_hop_union,
    snowball_wave,
    verify_invariant_selector,
)
from .walks import StartPolicy, WalkTrace, choose_walk_start, random_walk
from .conformal import (
    CalibrationScores,
    PredictionSet,
    split_conformal_predict,
    split_conformal_threshold,
    walk_weights,
    weighted_conformal_membership,
    weighted_interval,
)
from .spectral import (
    SpectralReport,
    eigengap,
    kernel_operator_eig_check,
    normalized_adjacency_eigs,
    spectral_report,
    stationary_distribution,
    tv_mixing_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
