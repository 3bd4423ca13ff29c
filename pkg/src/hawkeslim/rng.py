"""Seed handling: every stochastic entry point accepts ``None`` (fresh OS
entropy), an int, a sequence of ints (hierarchical entropy, e.g.
``[master, path_index]``), or a SeedSequence."""

from __future__ import annotations

import numpy as np

__all__ = ["as_seed_sequence", "as_generator"]


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if seed is None:
        return np.random.SeedSequence()
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (int, np.integer)):
        return np.random.SeedSequence(int(seed))
    if isinstance(seed, (list, tuple)) and all(
        isinstance(s, (int, np.integer)) for s in seed
    ):
        return np.random.SeedSequence([int(s) for s in seed])
    raise TypeError(
        "seed must be None, an int, a sequence of ints, or a SeedSequence; "
        f"got {type(seed).__name__}"
    )


def as_generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(as_seed_sequence(seed)))
