"""Deterministic random streams.

Every stochastic component draws from a Philox counter-based generator so
that runs reproduce bit-identically for a fixed seed, on any platform and
regardless of how many simulations run in parallel.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_rng", "episode_seed", "episode_rng"]


def make_rng(seed: int | tuple[int, ...]) -> np.random.Generator:
    """Philox generator keyed by an integer seed or a tuple of integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def episode_seed(base_seed: int, episode_index: int) -> int:
    """Per-episode seed: consecutive integers starting at ``base_seed``."""
    return int(base_seed) + int(episode_index)


def episode_rng(base_seed: int, episode_index: int) -> np.random.Generator:
    """Independent stream for one episode of a larger run."""
    return make_rng(episode_seed(base_seed, episode_index))
