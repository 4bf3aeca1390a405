"""Named random substreams derived from one root seed.

Every consumer (permutation draw, labeling shuffle, basis sample, phase
draw, outcome sampling) gets its own stream keyed by a fixed registry id
plus a trial index, so changing how much randomness one consumer uses can
never perturb the others.
"""

from __future__ import annotations

import numpy as np

__all__ = ["STREAMS", "substream", "substream_state"]

STREAMS = {
    "permutation": 0,
    "labeling": 1,
    "basis": 2,
    "phases": 3,
    "sampling": 4,
}


def substream(root_seed: int, name: str, index: int = 0) -> np.random.SeedSequence:
    """Independent child seed for the named stream and trial index."""
    if name not in STREAMS:
        raise KeyError(f"unknown stream {name!r}; known: {sorted(STREAMS)}")
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    return np.random.SeedSequence(int(root_seed), spawn_key=(STREAMS[name], int(index)))


def substream_state(root_seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Generator over the named substream."""
    return np.random.default_rng(substream(root_seed, name, index))
