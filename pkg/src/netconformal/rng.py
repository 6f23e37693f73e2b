"""Deterministic random-stream plumbing.

Everything stochastic in the package takes an explicit ``numpy`` generator.
Experiment drivers derive one independent substream per replicate from
``(master seed, replicate index)`` so that parallel and serial runs produce
identical results.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator derived from a master seed and a key.

    The same ``(seed, *key)`` always yields the same stream, and distinct
    keys yield statistically independent streams (SeedSequence hashing).
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))
