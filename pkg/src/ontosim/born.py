"""Outcome statistics of the deterministic layer against squared-amplitude
predictions.

Templates (conventional quantum states over the ontic basis) predict
outcome probabilities as summed squared amplitudes per outcome class. The
sampling side never touches amplitudes: it draws integer initial states
uniformly, pushes them through the permutation for T steps, and counts
macro labels. Because the dynamics is a bijection, the fraction of
initial states destined for each outcome equals the final class fraction
exactly, which is what the sampled frequencies estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .ontic import OutcomeLabeling, PermutationMap, ValidationError, _frozen_array, power_map

__all__ = [
    "Z_FAILURE_THRESHOLD",
    "Template",
    "EnsembleReport",
    "FrequencyComparison",
    "AbundanceReport",
    "born_probabilities",
    "template_from_class_weights",
    "destiny_labeling",
    "sample_ontic_frequencies",
    "abundance_conservation_check",
    "compare_frequencies",
]

# ~6e-5 per-comparison false-failure rate; the suite makes many comparisons.
Z_FAILURE_THRESHOLD = 4.0

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Template:
    """Unit-norm amplitude vector over the ontic basis."""

    amplitudes: np.ndarray
    description: str = ""

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.ndim != 1 or amp.size == 0:
            raise ValidationError("amplitudes must be a non-empty 1-D complex vector")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"template norm {norm!r} deviates from 1")
        object.__setattr__(self, "amplitudes", _frozen_array(amp, np.complex128))

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    """Per-label counts and frequencies from an ontic-state ensemble."""

    labels: tuple[str, ...]
    counts: np.ndarray
    samples: int
    horizon: int
    seed: int | None = None
    exhaustive: bool = False
    z_scores: np.ndarray | None = None

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.size != len(self.labels):
            raise ValidationError("one count per label required")
        if int(counts.sum()) != self.samples:
            raise ValidationError("counts must sum to the sample size")
        object.__setattr__(self, "counts", _frozen_array(counts, np.int64))
        if self.z_scores is not None:
            object.__setattr__(
                self, "z_scores", _frozen_array(np.asarray(self.z_scores, float), np.float64)
            )

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.samples

    @property
    def std_errors(self) -> np.ndarray:
        f = self.frequencies
        return np.sqrt(f * (1.0 - f) / self.samples)

    def with_z_scores(self, z: np.ndarray) -> "EnsembleReport":
        return replace(self, z_scores=z)

    def to_dict(self) -> dict:
        out = {
            "labels": list(self.labels),
            "counts": [int(c) for c in self.counts],
            "frequencies": [float(f) for f in self.frequencies],
            "std_errors": [float(s) for s in self.std_errors],
            "samples": int(self.samples),
            "horizon": int(self.horizon),
            "seed": None if self.seed is None else int(self.seed),
            "exhaustive": bool(self.exhaustive),
        }
        if self.z_scores is not None:
            out["z_scores"] = [float(z) for z in self.z_scores]
        return out


def born_probabilities(template: Template, labeling: OutcomeLabeling) -> np.ndarray:
    """Summed squared amplitudes per outcome class; sums to 1."""
    if template.dimension != labeling.size:
        raise ValueError(
            f"dimension mismatch: template {template.dimension}, labeling {labeling.size}"
        )
    weights = np.abs(template.amplitudes) ** 2
    return np.bincount(labeling.codes, weights=weights, minlength=len(labeling.names))


def template_from_class_weights(
    labeling: OutcomeLabeling, weights: Mapping[str, float]
) -> Template:
    """Uniform-magnitude superposition within each class, weighted across.

    Each class with weight w gets amplitude sqrt(w / class_count) on every
    one of its states, so the squared-amplitude prediction reproduces the
    given weights exactly.
    """
    total = float(sum(weights.values()))
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"class weights must sum to 1, got {total}")
    counts = labeling.class_counts
    amp = np.zeros(labeling.size, dtype=np.complex128)
    for name, w in weights.items():
        if name not in labeling.names:
            raise ValidationError(f"unknown label {name!r}")
        if w < 0:
            raise ValidationError(f"negative weight for {name!r}")
        code = labeling.names.index(name)
        if w > 0 and counts[code] == 0:
            raise ValidationError(f"label {name!r} has weight but no states")
        if counts[code]:
            amp[labeling.codes == code] = np.sqrt(w / counts[code])
    return Template(amp, description="uniform-per-class superposition")


def destiny_labeling(
    m: PermutationMap, final: OutcomeLabeling, horizon: int
) -> OutcomeLabeling:
    """Pull the final-time labeling back to initial states.

    The destiny of state k is the label of its image after ``horizon``
    steps; computed in O(N) through the cycle structure.
    """
    if final.size != m.size:
        raise ValueError(
            f"labeling sized {final.size} for a {m.size}-state map"
        )
    forward = power_map(m, horizon)
    return OutcomeLabeling(final.names, final.codes[forward.targets])


def sample_ontic_frequencies(
    m: PermutationMap,
    labeling: OutcomeLabeling,
    horizon: int,
    samples: int,
    seed,
    exhaustive: bool = False,
) -> EnsembleReport:
    """Draw initial states uniformly, evolve, classify, count.

    ``labeling`` applies to final states. With ``exhaustive`` set, every
    initial state is counted once instead of sampling (sampling error
    becomes exactly zero); the integer-only path never constructs
    amplitudes.
    """
    if labeling.size != m.size:
        raise ValueError(
            f"labeling sized {labeling.size} for a {m.size}-state map"
        )
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    initial = destiny_labeling(m, labeling, horizon)
    n_labels = len(labeling.names)
    if exhaustive:
        counts = np.bincount(initial.codes, minlength=n_labels)
        return EnsembleReport(
            labels=labeling.names,
            counts=counts,
            samples=m.size,
            horizon=int(horizon),
            seed=None if seed is None else _seed_int(seed),
            exhaustive=True,
        )
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, m.size, size=samples)
    counts = np.bincount(initial.codes[draws], minlength=n_labels)
    return EnsembleReport(
        labels=labeling.names,
        counts=counts,
        samples=int(samples),
        horizon=int(horizon),
        seed=_seed_int(seed),
        exhaustive=False,
    )


def _seed_int(seed) -> int | None:
    return int(seed) if isinstance(seed, (int, np.integer)) else None


@dataclass(frozen=True, eq=False)
class AbundanceReport:
    """Class counts of the destiny labeling against the final labeling."""

    labels: tuple[str, ...]
    initial_counts: np.ndarray
    final_counts: np.ndarray

    @property
    def conserved(self) -> bool:
        return bool(np.array_equal(self.initial_counts, self.final_counts))


def abundance_conservation_check(
    m: PermutationMap, final: OutcomeLabeling, horizon: int
) -> AbundanceReport:
    """Counting measure is preserved: destiny counts equal final counts.

    A bijection cannot change class cardinalities, so the comparison is
    integer-exact, not approximate.
    """
    initial = destiny_labeling(m, final, horizon)
    return AbundanceReport(
        labels=final.names,
        initial_counts=initial.class_counts,
        final_counts=final.class_counts,
    )


@dataclass(frozen=True, eq=False)
class FrequencyComparison:
    """z-scores of sampled frequencies against predicted probabilities."""

    z_scores: np.ndarray
    flagged: np.ndarray
    hard_failure: bool

    @property
    def passed(self) -> bool:
        return not self.hard_failure and not bool(self.flagged.any())


def compare_frequencies(
    report: EnsembleReport, predicted: np.ndarray
) -> FrequencyComparison:
    """z = (f - p) / sqrt(p (1 - p) / M) per label; |z| > 4 is flagged.

    A prediction of exactly 0 or 1 with any deviation is an impossible
    outcome and reported as a hard failure (infinite z).
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    if predicted.shape != (len(report.labels),):
        raise ValueError("one predicted probability per label required")
    f = report.frequencies
    z = np.zeros_like(predicted)
    hard = False
    for i, p in enumerate(predicted):
        if p <= 0.0 or p >= 1.0:
            if f[i] == p:
                z[i] = 0.0
            else:
                z[i] = np.inf if f[i] > p else -np.inf
                hard = True
        else:
            z[i] = (f[i] - p) / np.sqrt(p * (1.0 - p) / report.samples)
    flagged = np.abs(z) > Z_FAILURE_THRESHOLD
    return FrequencyComparison(
        z_scores=_frozen_array(z, np.float64),
        flagged=_frozen_array(flagged, np.bool_),
        hard_failure=hard,
    )
