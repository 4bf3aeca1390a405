"""Continuum transport dynamics dq/dt = f(q) in symmetrized operator form.

On a periodic 1-D grid the momentum operator p = -i d/dq becomes -i D with
D a real, exactly antisymmetric derivative matrix (spectral by default,
central difference as an option), and the generator

    H = (p f(q) + f(q) p) / 2

is Hermitian by construction, so evolution under exp(-iHt) conserves the
norm. For narrow wave packets the position expectation tracks the
classical flow; the fourth-order Runge-Kutta integrator over the same
tabulated flow field serves as the classical reference.

The spectral derivative uses the closed-form circulant
D[i, j] = (2*pi/L) * 0.5 * (-1)^d * cot(d*pi/M), d = (i - j) mod M,
built so that D^T = -D holds exactly in floating point (the Nyquist mode
of an even grid carries derivative zero, as required for a real
antisymmetric matrix).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .hilbert import WaveFunction
from .ontic import ValidationError, _frozen_array

__all__ = [
    "PeriodicGrid",
    "FlowField",
    "GaussianPacket",
    "DiscretizedHamiltonian",
    "EhrenfestReport",
    "NormTransportReport",
    "derivative_matrix",
    "momentum_values",
    "build_flow_hamiltonian",
    "packet_state",
    "expectation_position",
    "circular_distance",
    "classical_flow_integrate",
    "ehrenfest_check",
    "norm_functional_check",
]

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PeriodicGrid:
    """Uniform periodic grid: M points on a ring of circumference L."""

    points: int
    length: float = 1.0

    def __post_init__(self) -> None:
        if self.points < 8:
            raise ValidationError(f"grid needs at least 8 points, got {self.points}")
        if not self.length > 0.0:
            raise ValidationError(f"domain length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @cached_property
    def positions(self) -> np.ndarray:
        return _frozen_array(np.arange(self.points) * self.spacing, np.float64)


@dataclass(frozen=True, eq=False)
class FlowField:
    """Velocity field f(x) tabulated on the grid points (periodic)."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.points,):
            raise ValidationError(
                f"flow table has {values.size} entries for a {self.grid.points}-point grid"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("flow values must be finite")
        object.__setattr__(self, "values", _frozen_array(values, np.float64))

    @classmethod
    def constant(cls, c: float, grid: PeriodicGrid) -> "FlowField":
        return cls(grid, np.full(grid.points, float(c)))

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], grid: PeriodicGrid) -> "FlowField":
        return cls(grid, np.asarray(fn(grid.positions), dtype=np.float64))

    @classmethod
    def from_table(cls, x: Sequence[float], f: Sequence[float], grid: PeriodicGrid) -> "FlowField":
        """Resample tabulated (x, f) points onto the grid, periodically."""
        x = np.asarray(x, dtype=np.float64)
        f = np.asarray(f, dtype=np.float64)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise ValidationError("flow table needs matching 1-D x and f columns, >= 2 rows")
        order = np.argsort(x)
        vals = np.interp(grid.positions, x[order], f[order], period=grid.length)
        return cls(grid, vals)

    @property
    def is_constant(self) -> bool:
        return bool(np.ptp(self.values) == 0.0)

    def at(self, q) -> np.ndarray:
        """Linear interpolation between grid points, periodic in q."""
        return np.interp(
            np.mod(q, self.grid.length),
            self.grid.positions,
            self.values,
            period=self.grid.length,
        )


@dataclass(frozen=True)
class GaussianPacket:
    """Localized stand-in for a point concentration: center and width."""

    center: float
    width: float

    def __post_init__(self) -> None:
        if not self.width > 0.0:
            raise ValidationError(f"packet width must be positive, got {self.width}")


@dataclass(frozen=True, eq=False)
class DiscretizedHamiltonian:
    """Dense Hermitian generator of the tabulated flow."""

    matrix: np.ndarray
    flow: FlowField

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        n = self.flow.grid.points
        if matrix.shape != (n, n):
            raise ValidationError("generator matrix must be square and match the grid")
        residual = float(np.max(np.abs(matrix - matrix.conj().T)))
        if residual > HERMITICITY_TOL:
            raise ValidationError(f"generator not Hermitian: residual {residual:.3e}")
        object.__setattr__(self, "matrix", _frozen_array(matrix, np.complex128))

    @property
    def grid(self) -> PeriodicGrid:
        return self.flow.grid

    @cached_property
    def _eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.matrix)

    def propagate(self, amplitudes: np.ndarray, t: float) -> np.ndarray:
        """exp(-iHt) applied through the dense eigendecomposition."""
        w, v = self._eigensystem
        coeff = v.conj().T @ np.asarray(amplitudes, dtype=np.complex128)
        return v @ (np.exp(-1j * w * t) * coeff)


def derivative_matrix(grid: PeriodicGrid, kind: str = "spectral") -> np.ndarray:
    """Real derivative matrix with D^T = -D exact in floating point.

    ``spectral``: trigonometric-interpolation derivative (even M only).
    ``central``: second-order central difference.
    """
    m = grid.points
    scale = 2.0 * np.pi / grid.length
    stencil = np.zeros(m, dtype=np.float64)
    if kind == "spectral":
        if m % 2 != 0:
            raise ValidationError("spectral derivative requires an even point count")
        for d in range(1, m // 2):
            val = 0.5 * (-1.0) ** d / np.tan(d * np.pi / m) * scale
            stencil[d] = val
            stencil[m - d] = -val
        # Nyquist column: cot(pi/2) = 0 exactly.
    elif kind == "central":
        stencil[1] = -1.0 / (2.0 * grid.spacing)
        stencil[m - 1] = 1.0 / (2.0 * grid.spacing)
    else:
        raise ValueError(f"unknown derivative kind {kind!r}")
    idx = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    return stencil[idx]


def momentum_values(grid: PeriodicGrid, kind: str = "spectral") -> np.ndarray:
    """Eigenvalues of p = -i D for the chosen derivative, unsorted.

    For the spectral derivative these are 2*pi*k/L for integer k with
    |k| < M/2, plus a zero for the Nyquist mode of an even grid.
    """
    m = grid.points
    modes = np.fft.fftfreq(m) * m
    if kind == "spectral":
        if m % 2 == 0:
            modes = modes.copy()
            modes[m // 2] = 0.0
        return 2.0 * np.pi / grid.length * modes
    if kind == "central":
        return np.sin(2.0 * np.pi * modes / m) / grid.spacing
    raise ValueError(f"unknown derivative kind {kind!r}")


def build_flow_hamiltonian(
    f: FlowField, grid: PeriodicGrid, derivative: str = "spectral"
) -> DiscretizedHamiltonian:
    """H = (P diag(f) + diag(f) P) / 2 with P = -i D; Hermitian exactly."""
    if f.grid is not grid and (f.grid.points != grid.points or f.grid.length != grid.length):
        raise ValidationError("flow field and grid disagree")
    d = derivative_matrix(grid, derivative)
    # Entry (i, j) is -i/2 * D[i, j] * (f[i] + f[j]); antisymmetry of D
    # makes the matrix Hermitian with zero residual.
    h = -0.5j * d * (f.values[:, None] + f.values[None, :])
    return DiscretizedHamiltonian(h, f)


def packet_state(packet: GaussianPacket, grid: PeriodicGrid) -> WaveFunction:
    """Normalized Gaussian on the grid, wrapped by minimal image.

    Requires width >= 2 spacings (resolvable) and 6*width <= L
    (negligible wrap-around).
    """
    if packet.width < 2.0 * grid.spacing:
        raise ValidationError(
            f"packet width {packet.width} below twice the grid spacing {grid.spacing}"
        )
    if 6.0 * packet.width > grid.length:
        raise ValidationError(
            f"packet width {packet.width} too large for domain {grid.length}"
        )
    half = 0.5 * grid.length
    d = np.mod(grid.positions - packet.center + half, grid.length) - half
    return WaveFunction.normalized(np.exp(-(d**2) / (4.0 * packet.width**2)))


def expectation_position(psi: WaveFunction, grid: PeriodicGrid) -> float:
    """Circular mean of position: immune to the periodic branch cut."""
    weights = np.abs(psi.amplitudes) ** 2
    angles = 2.0 * np.pi * grid.positions / grid.length
    z = np.sum(weights * np.exp(1j * angles))
    return float(np.mod(np.angle(z), 2.0 * np.pi) * grid.length / (2.0 * np.pi))


def circular_distance(a, b, length: float):
    """Shortest distance on a ring of the given circumference."""
    half = 0.5 * length
    return np.abs(np.mod(np.asarray(a) - np.asarray(b) + half, length) - half)


def classical_flow_integrate(q0: float, f: FlowField, T: float, dt: float) -> np.ndarray:
    """RK4 trajectory of dq/dt = f(q) from q0, sampled every dt up to T.

    The flow is linearly interpolated between grid points. Returns
    positions at times 0, dt, 2*dt, ..., n*dt with n = round(T/dt);
    positions are wrapped into [0, L).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if T < 0.0:
        raise ValueError(f"T must be >= 0, got {T}")
    length = f.grid.length
    n = int(round(T / dt))
    out = np.empty(n + 1, dtype=np.float64)
    q = float(q0) % length
    out[0] = q
    for i in range(n):
        k1 = float(f.at(q))
        k2 = float(f.at(q + 0.5 * dt * k1))
        k3 = float(f.at(q + 0.5 * dt * k2))
        k4 = float(f.at(q + dt * k3))
        q = (q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)) % length
        out[i + 1] = q
    return out


@dataclass(frozen=True, eq=False)
class EhrenfestReport:
    """Quantum expectation trajectory against the classical reference."""

    times: np.ndarray
    quantum: np.ndarray
    classical: np.ndarray
    max_deviation: float

    @property
    def trajectory_pairs(self) -> list[tuple[float, float, float]]:
        return [
            (float(t), float(q), float(c))
            for t, q, c in zip(self.times, self.quantum, self.classical)
        ]


def ehrenfest_check(
    packet: GaussianPacket,
    f: FlowField,
    grid: PeriodicGrid,
    T: float,
    steps: int,
    derivative: str = "spectral",
    classical_substeps: int = 16,
) -> EhrenfestReport:
    """Track <q>(t) under exp(-iHt) against the classical RK4 trajectory.

    Evaluates both sides at steps+1 equally spaced times in [0, T] and
    reports the maximum circular distance between them.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    h = build_flow_hamiltonian(f, grid, derivative)
    psi0 = packet_state(packet, grid)
    times = np.linspace(0.0, T, steps + 1)
    quantum = np.empty(steps + 1, dtype=np.float64)
    for i, t in enumerate(times):
        psi_t = WaveFunction(h.propagate(psi0.amplitudes, float(t)))
        quantum[i] = expectation_position(psi_t, grid)
    dt = T / (steps * classical_substeps) if T > 0 else 1.0
    fine = classical_flow_integrate(packet.center, f, T, dt)
    classical = fine[:: classical_substeps] if T > 0 else np.full(steps + 1, packet.center)
    deviation = circular_distance(quantum, classical, grid.length)
    return EhrenfestReport(
        times=_frozen_array(times, np.float64),
        quantum=_frozen_array(quantum, np.float64),
        classical=_frozen_array(classical, np.float64),
        max_deviation=float(np.max(deviation)),
    )


@dataclass(frozen=True, eq=False)
class NormTransportReport:
    """Norm conservation and amplitude-transport diagnostics."""

    norm_drift: float
    amplitude_multiset_error: float
    amplitude_transport: bool


def norm_functional_check(
    psi: WaveFunction, h: DiscretizedHamiltonian, T: float
) -> NormTransportReport:
    """Evolve to time T and report what the flow preserves.

    A divergence-free (here: constant) flow transports amplitudes
    rigidly, so the multiset of |psi_j| is preserved up to interpolation
    error; a generic flow preserves only the 2-norm. The report carries
    the multiset error either way; ``amplitude_transport`` records
    whether the constant-flow claim applies.
    """
    if psi.dimension != h.grid.points:
        raise ValueError(
            f"dimension mismatch: state {psi.dimension}, grid {h.grid.points}"
        )
    final = h.propagate(psi.amplitudes, T)
    norm_drift = abs(float(np.linalg.norm(final)) - 1.0)
    before = np.sort(np.abs(psi.amplitudes))
    after = np.sort(np.abs(final))
    return NormTransportReport(
        norm_drift=norm_drift,
        amplitude_multiset_error=float(np.max(np.abs(after - before))),
        amplitude_transport=h.flow.is_constant,
    )
