"""Two-branch system entangled with a large environment, and why the
off-diagonal terms die.

A measurement-like event splits the state into two branches (weights
p_live, p_dead) while each of N environment levels picks up a relative
phase phi_i on the decayed branch. Written against any orthonormal
entangled environment basis, the equal-weight mixture over that basis
collapses to an exact closed form: diagonal blocks p_live*I and p_dead*I
plus off-diagonal blocks sqrt(p_live*p_dead) * X with
X = diag(exp(-i*phi_i)), all scaled by 1/N. Averaging the phases then
suppresses the off-diagonal survival coefficient like 1/sqrt(N), without
any collapse rule: every object here is an ordinary state or mixture.

Layout convention: composite index b*N + i with branch b in {0, 1}
(0 = undecayed/live, 1 = decayed/dead) and environment level i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import WaveFunction
from .ontic import ValidationError, _frozen_array

__all__ = [
    "BranchWeights",
    "EnvironmentEnsemble",
    "EntangledBasis",
    "DensityMatrix",
    "SuppressionStatistic",
    "sample_entangled_basis",
    "pure_branch_state",
    "pure_state_density",
    "ensemble_density",
    "closed_form_ensemble_density",
    "phase_average_suppression",
    "reduced_system_density",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
# Full eigendecomposition for the positivity check is O(N^3); above this
# total dimension the check is skipped (positivity already follows from
# the convex-mixture construction).
PSD_CHECK_MAX_DIM = 128


@dataclass(frozen=True)
class BranchWeights:
    """Branch probabilities of the two-outcome split."""

    p_live: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_live <= 1.0:
            raise ValidationError(f"p_live must be in [0, 1], got {self.p_live}")

    @property
    def p_dead(self) -> float:
        return 1.0 - self.p_live

    @property
    def coherence(self) -> float:
        """sqrt(p_live * p_dead), the bare off-diagonal weight."""
        return float(np.sqrt(self.p_live * self.p_dead))


@dataclass(frozen=True, eq=False)
class EnvironmentEnsemble:
    """N environment levels with one branch phase phi_i each."""

    phases: np.ndarray

    def __post_init__(self) -> None:
        phases = np.asarray(self.phases, dtype=np.float64)
        if phases.ndim != 1 or phases.size == 0:
            raise ValidationError("phases must be a non-empty 1-D real vector")
        if phases.min() < 0.0 or phases.max() >= 2.0 * np.pi:
            raise ValidationError("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "phases", _frozen_array(phases, np.float64))

    @property
    def size(self) -> int:
        return int(self.phases.size)

    @classmethod
    def uniform_grid(cls, n: int) -> "EnvironmentEnsemble":
        """phi_i = 2*pi*i/N: the exact-cancellation reference ensemble."""
        if n < 1:
            raise ValidationError(f"environment size must be >= 1, got {n}")
        return cls(2.0 * np.pi * np.arange(n) / n)

    @classmethod
    def random_uniform(cls, n: int, seed) -> "EnvironmentEnsemble":
        """Independent uniform phases, deterministic per seed."""
        if n < 1:
            raise ValidationError(f"environment size must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        return cls(rng.uniform(0.0, 2.0 * np.pi, size=n))


@dataclass(frozen=True, eq=False)
class EntangledBasis:
    """Orthonormal environment basis: column k holds the coefficients
    alpha_i^(k) of the k-th entangled basis vector."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        coeff = np.asarray(self.coefficients, dtype=np.complex128)
        if coeff.ndim != 2 or coeff.shape[0] != coeff.shape[1] or coeff.size == 0:
            raise ValidationError("coefficients must be a non-empty square matrix")
        object.__setattr__(self, "coefficients", _frozen_array(coeff, np.complex128))

    @property
    def size(self) -> int:
        return int(self.coefficients.shape[0])

    def unitarity_residual(self) -> float:
        c = self.coefficients
        return float(np.max(np.abs(c.conj().T @ c - np.eye(self.size))))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, trace-1 operator on the branch (x) environment space."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("density matrix must be square")
        if matrix.shape[0] % 2 != 0:
            raise ValidationError("density matrix dimension must be even (2 branches)")
        herm = float(np.max(np.abs(matrix - matrix.conj().T)))
        if herm > HERMITICITY_TOL:
            raise ValidationError(f"density matrix not Hermitian: residual {herm:.3e}")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(f"density matrix trace {trace} deviates from 1")
        if matrix.shape[0] <= PSD_CHECK_MAX_DIM:
            lo = float(np.linalg.eigvalsh(matrix).min())
            if lo < -PSD_TOL:
                raise ValidationError(f"density matrix not PSD: min eigenvalue {lo:.3e}")
        object.__setattr__(self, "matrix", _frozen_array(matrix, np.complex128))

    @property
    def dimension(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def env_size(self) -> int:
        return self.dimension // 2


def sample_entangled_basis(n: int, seed) -> EntangledBasis:
    """Haar-distributed random unitary, deterministic per seed.

    Complex Ginibre matrix, QR decomposition, then the R diagonal phases
    folded into Q so the distribution is exactly unitarily invariant.
    """
    if n < 1:
        raise ValidationError(f"basis size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return EntangledBasis(q)


def _branch_amplitudes(
    k: int, basis: EntangledBasis, env: EnvironmentEnsemble, w: BranchWeights
) -> np.ndarray:
    n = basis.size
    if env.size != n:
        raise ValidationError(
            f"basis size {n} and environment size {env.size} disagree"
        )
    if not 0 <= int(k) < n:
        raise ValueError(f"basis index {k} outside [0, {n})")
    alpha = basis.coefficients[:, int(k)]
    out = np.empty(2 * n, dtype=np.complex128)
    out[:n] = np.sqrt(w.p_live) * alpha
    out[n:] = np.sqrt(w.p_dead) * np.exp(1j * env.phases) * alpha
    return out


def pure_branch_state(
    k: int, basis: EntangledBasis, env: EnvironmentEnsemble, w: BranchWeights
) -> WaveFunction:
    """The post-split state built on the k-th entangled basis vector.

    Live-branch block sqrt(p_live) * alpha_i^(k); dead-branch block
    sqrt(p_dead) * exp(i*phi_i) * alpha_i^(k).
    """
    return WaveFunction(_branch_amplitudes(k, basis, env, w))


def pure_state_density(
    k: int, basis: EntangledBasis, env: EnvironmentEnsemble, w: BranchWeights
) -> DensityMatrix:
    """Rank-1 projector onto the k-th post-split state."""
    amp = _branch_amplitudes(k, basis, env, w)
    return DensityMatrix(np.outer(amp, amp.conj()))


def ensemble_density(
    basis: EntangledBasis, env: EnvironmentEnsemble, w: BranchWeights
) -> DensityMatrix:
    """Equal-weight mixture (1/N) sum_k of the pure projectors.

    Accumulated in a fixed k order so the result is bit-reproducible
    regardless of threading; equals closed_form_ensemble_density up to
    roundoff by the orthonormality of the basis columns.
    """
    n = basis.size
    rho = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    for k in range(n):
        amp = _branch_amplitudes(k, basis, env, w)
        rho += np.outer(amp, amp.conj())
    rho /= n
    return DensityMatrix(rho)


def closed_form_ensemble_density(
    env: EnvironmentEnsemble, w: BranchWeights
) -> DensityMatrix:
    """The exact block form of the equal-weight mixture.

    (1/N) * [[p_live * I,            c * X       ],
             [c * conj(X),           p_dead * I  ]]

    with c = sqrt(p_live * p_dead) and X = diag(exp(-i * phi_i)). The
    basis drops out entirely; only the phases survive.
    """
    n = env.size
    rho = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    idx = np.arange(n)
    rho[idx, idx] = w.p_live
    rho[n + idx, n + idx] = w.p_dead
    x = np.exp(-1j * env.phases)
    rho[idx, n + idx] = w.coherence * x
    rho[n + idx, idx] = w.coherence * np.conj(x)
    return DensityMatrix(rho / n)


@dataclass(frozen=True)
class SuppressionStatistic:
    """Mean branch phasor (1/N) sum_i exp(-i*phi_i) and its magnitude."""

    mean_phasor: complex
    magnitude: float


def phase_average_suppression(env: EnvironmentEnsemble) -> SuppressionStatistic:
    """The scalar coefficient governing off-diagonal survival.

    For a uniform phase grid it vanishes exactly; for independent random
    phases its magnitude behaves like a 2-D random-walk endpoint,
    concentrating around 1/sqrt(N).
    """
    mean = complex(np.mean(np.exp(-1j * env.phases)))
    return SuppressionStatistic(mean_phasor=mean, magnitude=abs(mean))


def reduced_system_density(rho: DensityMatrix) -> np.ndarray:
    """Partial trace over the environment: the 2x2 branch density matrix."""
    n = rho.env_size
    m = rho.matrix
    out = np.empty((2, 2), dtype=np.complex128)
    for a in range(2):
        for b in range(2):
            out[a, b] = np.trace(m[a * n : (a + 1) * n, b * n : (b + 1) * n])
    return out
