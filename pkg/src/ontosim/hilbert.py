"""Permutation dynamics embedded in Hilbert space.

A one-step permutation becomes a 0/1 unitary U acting on basis states,
and choosing every eigenphase in [0, 2*pi) fixes a canonical bounded
generator H with U = exp(-iH). The generator is assembled in closed form,
cycle by cycle: an orbit of length L contributes eigenphases 2*pi*k/L
with discrete Fourier eigenvectors supported on that orbit, so no
numerical diagonalization is ever needed. Delta-peaked states evolved
through this spectrum stay delta-peaked at every integer time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ontic import PermutationMap, ValidationError, _frozen_array

__all__ = [
    "NORM_TOL",
    "CapacityError",
    "WaveFunction",
    "PermutationUnitary",
    "HamiltonianSpectrum",
    "unitary_from_permutation",
    "hamiltonian_from_permutation",
    "delta_state",
    "apply_unitary",
    "schrodinger_evolve",
    "reconstruct_unitary",
    "hamiltonian_matrix",
    "energy_expectation",
]

NORM_TOL = 1e-12

# Dense eigenvector storage is O(N^2); beyond this the sparse permutation
# path (apply_unitary, integer-time evolution) is the supported route.
DEFAULT_DENSE_LIMIT = 4096


class CapacityError(RuntimeError):
    """Requested dense operation exceeds the configured size limit."""


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex amplitude vector over a finite basis, unit norm."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.ndim != 1 or amp.size == 0:
            raise ValidationError("amplitudes must be a non-empty 1-D complex vector")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _frozen_array(amp, np.complex128))

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def normalized(cls, amplitudes) -> "WaveFunction":
        amp = np.asarray(amplitudes, dtype=np.complex128)
        norm = np.linalg.norm(amp)
        if norm == 0.0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(amp / norm)


@dataclass(frozen=True, eq=False)
class PermutationUnitary:
    """The permutation as a unitary: exactly one unit entry per row/column.

    Stored sparsely: column q' has its single 1 in row targets[q'].
    """

    targets: np.ndarray

    def __post_init__(self) -> None:
        # Reuse the bijectivity validation.
        m = PermutationMap(self.targets)
        object.__setattr__(self, "targets", m.targets)

    @property
    def dimension(self) -> int:
        return int(self.targets.size)

    def to_dense(self) -> np.ndarray:
        u = np.zeros((self.dimension, self.dimension), dtype=np.complex128)
        u[self.targets, np.arange(self.dimension)] = 1.0
        return u


@dataclass(frozen=True, eq=False)
class HamiltonianSpectrum:
    """Eigenphases in [0, 2*pi) with orthonormal eigenvector columns."""

    eigenphases: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        phases = np.asarray(self.eigenphases, dtype=np.float64)
        vectors = np.asarray(self.eigenvectors, dtype=np.complex128)
        if phases.ndim != 1 or phases.size == 0:
            raise ValidationError("eigenphases must be a non-empty 1-D real vector")
        if vectors.shape != (phases.size, phases.size):
            raise ValidationError("eigenvectors must be square and match the phase count")
        if phases.min() < 0.0 or phases.max() >= 2.0 * np.pi:
            raise ValidationError("eigenphases must lie in [0, 2*pi)")
        object.__setattr__(self, "eigenphases", _frozen_array(phases, np.float64))
        object.__setattr__(self, "eigenvectors", _frozen_array(vectors, np.complex128))

    @property
    def dimension(self) -> int:
        return int(self.eigenphases.size)


def unitary_from_permutation(m: PermutationMap) -> PermutationUnitary:
    """Wrap the map as a unitary sending |q'> to |targets[q']>."""
    return PermutationUnitary(m.targets)


def hamiltonian_from_permutation(
    m: PermutationMap, dense_limit: int = DEFAULT_DENSE_LIMIT
) -> HamiltonianSpectrum:
    """Closed-form generator of the permutation unitary, per cycle.

    An orbit (c_0, ..., c_{L-1}) contributes eigenvectors
    v_k[c_i] = exp(2*pi*i*k*i/L)/sqrt(L) with eigenphase 2*pi*k/L, so
    U v_k = exp(-2*pi*i*k/L) v_k and exp(-iH) reconstructs U exactly.
    """
    n = m.size
    if n > dense_limit:
        raise CapacityError(
            f"dense spectrum for N={n} exceeds the limit {dense_limit}; "
            "use the sparse permutation path instead"
        )
    phases = np.empty(n, dtype=np.float64)
    vectors = np.zeros((n, n), dtype=np.complex128)
    col = 0
    for orbit in m.cycles:
        length = orbit.size
        k = np.arange(length)
        phases[col : col + length] = 2.0 * np.pi * k / length
        block = np.exp(2j * np.pi * np.outer(k, k) / length) / np.sqrt(length)
        vectors[np.ix_(orbit, col + k)] = block
        col += length
    return HamiltonianSpectrum(phases, vectors)


def delta_state(k: int, n: int) -> WaveFunction:
    """Amplitude 1 on the single ontic state k, 0 elsewhere."""
    k = int(k)
    if not 0 <= k < n:
        raise ValueError(f"state {k} outside [0, {n})")
    amp = np.zeros(n, dtype=np.complex128)
    amp[k] = 1.0
    return WaveFunction(amp)


def apply_unitary(psi: WaveFunction, u: PermutationUnitary) -> WaveFunction:
    """One permutation step on the amplitudes, O(N) and norm-exact."""
    if psi.dimension != u.dimension:
        raise ValueError(
            f"dimension mismatch: state {psi.dimension}, unitary {u.dimension}"
        )
    out = np.empty(psi.dimension, dtype=np.complex128)
    out[u.targets] = psi.amplitudes
    return WaveFunction(out)


def schrodinger_evolve(psi: WaveFunction, h: HamiltonianSpectrum, t: float) -> WaveFunction:
    """Evolve by exp(-iHt) spectrally; t may be any real number.

    At integer t this agrees with repeated application of the underlying
    permutation unitary; at non-integer t it is the spectral interpolation.
    """
    if psi.dimension != h.dimension:
        raise ValueError(
            f"dimension mismatch: state {psi.dimension}, spectrum {h.dimension}"
        )
    coeff = h.eigenvectors.conj().T @ psi.amplitudes
    coeff *= np.exp(-1j * h.eigenphases * t)
    return WaveFunction(h.eigenvectors @ coeff)


def reconstruct_unitary(h: HamiltonianSpectrum) -> np.ndarray:
    """Dense exp(-iH) assembled from the spectrum."""
    return (h.eigenvectors * np.exp(-1j * h.eigenphases)) @ h.eigenvectors.conj().T


def hamiltonian_matrix(h: HamiltonianSpectrum) -> np.ndarray:
    """Dense Hermitian H assembled from the spectrum."""
    return (h.eigenvectors * h.eigenphases) @ h.eigenvectors.conj().T


def energy_expectation(psi: WaveFunction, h: HamiltonianSpectrum) -> float:
    """<psi|H|psi>, conserved under schrodinger_evolve."""
    if psi.dimension != h.dimension:
        raise ValueError(
            f"dimension mismatch: state {psi.dimension}, spectrum {h.dimension}"
        )
    coeff = h.eigenvectors.conj().T @ psi.amplitudes
    return float(np.sum(h.eigenphases * np.abs(coeff) ** 2))
