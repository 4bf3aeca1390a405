"""Reversible dynamics on a finite set of ontic states.

The bottom layer of the model is a finite state set {0, ..., N-1} with an
invertible one-step update rule: step t+1 sends state k to ``targets[k]``.
Everything built on top (unitaries, spectra, outcome statistics) assumes
this map is a bijection, so bijectivity is enforced eagerly at
construction. All objects are immutable after construction; the module
functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "OnticState",
    "ValidationError",
    "PermutationMap",
    "CycleDecomposition",
    "OutcomeLabeling",
    "step",
    "evolve",
    "inverse",
    "power_map",
    "cycle_decomposition",
    "classify",
]

# Ontic states are plain integer indices into [0, N); range checks happen
# at the operation boundaries.
OnticState = int


class ValidationError(ValueError):
    """A constructed object violates its structural invariants."""


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PermutationMap:
    """Bijective update rule: one time step sends state k to targets[k]."""

    targets: np.ndarray

    def __post_init__(self) -> None:
        targets = np.asarray(self.targets, dtype=np.int64)
        if targets.ndim != 1 or targets.size == 0:
            raise ValidationError("targets must be a non-empty 1-D integer array")
        n = targets.size
        lo = int(targets.min())
        hi = int(targets.max())
        if lo < 0 or hi >= n:
            raise ValidationError(
                f"targets must take values in [0, {n}), found range [{lo}, {hi}]"
            )
        if int(np.bincount(targets, minlength=n).max()) > 1:
            raise ValidationError("targets is not a bijection: repeated image")
        object.__setattr__(self, "targets", _frozen_array(targets, np.int64))

    @property
    def size(self) -> int:
        return int(self.targets.size)

    @classmethod
    def identity(cls, n: int) -> "PermutationMap":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def random(cls, n: int, seed) -> "PermutationMap":
        """Uniformly random permutation, deterministic per seed."""
        rng = np.random.default_rng(seed)
        return cls(rng.permutation(n).astype(np.int64))

    @cached_property
    def cycles(self) -> "CycleDecomposition":
        return _decompose(self)


@dataclass(frozen=True, eq=False)
class CycleDecomposition:
    """Orbits of a permutation, each listed in traversal order.

    ``cycle_index[s]`` is the orbit number of state s and
    ``cycle_position[s]`` its offset inside that orbit, so t steps from s
    land on ``cycles[cycle_index[s]][(cycle_position[s] + t) % L]``.
    """

    cycles: tuple[np.ndarray, ...]
    cycle_index: np.ndarray
    cycle_position: np.ndarray

    @property
    def size(self) -> int:
        return int(self.cycle_index.size)

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(int(c.size) for c in self.cycles)

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.cycles)


def _decompose(m: PermutationMap) -> CycleDecomposition:
    n = m.size
    targets = m.targets.tolist()
    cycle_index = np.full(n, -1, dtype=np.int64)
    cycle_position = np.zeros(n, dtype=np.int64)
    cycles: list[np.ndarray] = []
    for start in range(n):
        if cycle_index[start] >= 0:
            continue
        orbit = [start]
        cur = targets[start]
        while cur != start:
            orbit.append(cur)
            cur = targets[cur]
        orbit_arr = _frozen_array(orbit, np.int64)
        cycle_index[orbit_arr] = len(cycles)
        cycle_position[orbit_arr] = np.arange(orbit_arr.size)
        cycles.append(orbit_arr)
    return CycleDecomposition(
        cycles=tuple(cycles),
        cycle_index=_frozen_array(cycle_index, np.int64),
        cycle_position=_frozen_array(cycle_position, np.int64),
    )


def cycle_decomposition(m: PermutationMap) -> CycleDecomposition:
    """Disjoint orbits covering [0, N); cached on the map."""
    return m.cycles


def _check_state(state: int, n: int) -> int:
    state = int(state)
    if not 0 <= state < n:
        raise ValueError(f"state {state} outside [0, {n})")
    return state


def step(state: OnticState, m: PermutationMap) -> OnticState:
    """Advance one time step."""
    return int(m.targets[_check_state(state, m.size)])


def evolve(state: OnticState, m: PermutationMap, t: int) -> OnticState:
    """Advance t steps (t >= 0) in O(cycle length) via modular reduction.

    Exact for arbitrarily large integer t; no iteration is performed.
    """
    state = _check_state(state, m.size)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    dec = m.cycles
    orbit = dec.cycles[dec.cycle_index[state]]
    pos = int(dec.cycle_position[state])
    return int(orbit[(pos + t) % orbit.size])


def inverse(m: PermutationMap) -> PermutationMap:
    """The unique map undoing one step: inverse(m) after m is the identity."""
    inv = np.empty(m.size, dtype=np.int64)
    inv[m.targets] = np.arange(m.size, dtype=np.int64)
    return PermutationMap(inv)


def power_map(m: PermutationMap, t: int) -> PermutationMap:
    """The t-step map as a single permutation (t >= 0), built per orbit."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    out = np.empty(m.size, dtype=np.int64)
    for orbit in m.cycles:
        length = orbit.size
        out[orbit] = orbit[(np.arange(length) + t) % length]
    return PermutationMap(out)


@dataclass(frozen=True, eq=False)
class OutcomeLabeling:
    """One macro outcome label per ontic state.

    ``names`` is the label alphabet, ``codes[s]`` the alphabet index of
    state s. Class fractions always sum to 1 because every state carries
    exactly one label.
    """

    names: tuple[str, ...]
    codes: np.ndarray

    def __post_init__(self) -> None:
        names = tuple(str(x) for x in self.names)
        if len(names) == 0:
            raise ValidationError("label alphabet must be non-empty")
        if len(set(names)) != len(names):
            raise ValidationError("label names must be distinct")
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.ndim != 1 or codes.size == 0:
            raise ValidationError("codes must be a non-empty 1-D integer array")
        if codes.min() < 0 or codes.max() >= len(names):
            raise ValidationError("codes reference labels outside the alphabet")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "codes", _frozen_array(codes, np.int64))

    @property
    def size(self) -> int:
        return int(self.codes.size)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=len(self.names))

    @property
    def class_fractions(self) -> dict[str, float]:
        counts = self.class_counts
        return {name: float(c) / self.size for name, c in zip(self.names, counts)}

    @classmethod
    def from_labels(cls, labels: Sequence[str]) -> "OutcomeLabeling":
        """Build from one label string per state (alphabet in first-seen order)."""
        names: list[str] = []
        index: dict[str, int] = {}
        codes = np.empty(len(labels), dtype=np.int64)
        for i, lab in enumerate(labels):
            lab = str(lab)
            if lab not in index:
                index[lab] = len(names)
                names.append(lab)
            codes[i] = index[lab]
        return cls(tuple(names), codes)

    @classmethod
    def two_class(
        cls,
        n: int,
        first_fraction: float,
        names: tuple[str, str] = ("Live", "Dead"),
        rng=None,
    ) -> "OutcomeLabeling":
        """Exactly round(first_fraction * n) states in the first class.

        Without an rng the first class occupies the low indices; with one,
        the assignment is shuffled (deterministic per generator state).
        """
        if not 0.0 <= first_fraction <= 1.0:
            raise ValidationError(f"first_fraction must be in [0, 1], got {first_fraction}")
        n_first = int(round(first_fraction * n))
        codes = np.ones(n, dtype=np.int64)
        codes[:n_first] = 0
        if rng is not None:
            np.random.default_rng(rng).shuffle(codes)
        return cls(names, codes)

    @classmethod
    def bernoulli(
        cls,
        n: int,
        p_first: float,
        rng,
        names: tuple[str, str] = ("Live", "Dead"),
    ) -> "OutcomeLabeling":
        """Independent per-state draws: first class with probability p_first."""
        if not 0.0 <= p_first <= 1.0:
            raise ValidationError(f"p_first must be in [0, 1], got {p_first}")
        draws = np.random.default_rng(rng).random(n)
        return cls(names, (draws >= p_first).astype(np.int64))

    def to_labels(self) -> list[str]:
        return [self.names[c] for c in self.codes]


def classify(state: OnticState, labeling: OutcomeLabeling) -> str:
    """The macro outcome attached to a state; purely a table lookup."""
    return labeling.names[labeling.codes[_check_state(state, labeling.size)]]
