import numpy as np
import pytest

from ontosim.flow import (
    FlowField,
    GaussianPacket,
    PeriodicGrid,
    build_flow_hamiltonian,
    classical_flow_integrate,
    derivative_matrix,
    ehrenfest_check,
    expectation_position,
    momentum_values,
    norm_functional_check,
    packet_state,
)
from ontosim.ontic import ValidationError

L = 1.0


def offset_sin_field(grid, offset=0.3, amplitude=0.1):
    length = grid.length
    return FlowField.from_function(
        lambda x: offset + amplitude * np.sin(2.0 * np.pi * x / length), grid
    )


class TestDerivativeMatrix:
    @pytest.mark.parametrize("kind", ["spectral", "central"])
    def test_exact_antisymmetry(self, kind):
        d = derivative_matrix(PeriodicGrid(64, 2.0), kind)
        assert np.array_equal(d.T, -d)

    def test_spectral_exact_on_band_limited(self):
        g = PeriodicGrid(64, 2.0 * np.pi)
        d = derivative_matrix(g, "spectral")
        x = g.positions
        assert np.max(np.abs(d @ np.sin(3 * x) - 3 * np.cos(3 * x))) <= 1e-12

    def test_central_second_order(self):
        errs = []
        for m in (32, 64, 128):
            g = PeriodicGrid(m, 2.0 * np.pi)
            d = derivative_matrix(g, "central")
            x = g.positions
            errs.append(np.max(np.abs(d @ np.sin(x) - np.cos(x))))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
        assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)

    def test_spectral_rejects_odd_grid(self):
        with pytest.raises(ValidationError):
            derivative_matrix(PeriodicGrid(9, 1.0), "spectral")

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            derivative_matrix(PeriodicGrid(8, 1.0), "upwind")


class TestBuildFlowHamiltonian:
    def test_zero_flow_gives_zero_matrix(self):
        g = PeriodicGrid(32, L)
        h = build_flow_hamiltonian(FlowField.constant(0.0, g), g)
        assert np.count_nonzero(h.matrix) == 0

    @pytest.mark.parametrize("kind", ["spectral", "central"])
    def test_constant_flow_eigenvalues_are_scaled_momenta(self, kind):
        # Oracle: dense eigendecomposition against c * (momentum values).
        g = PeriodicGrid(64, L)
        c = 0.7
        h = build_flow_hamiltonian(FlowField.constant(c, g), g, derivative=kind)
        got = np.sort(np.linalg.eigvalsh(h.matrix))
        expected = np.sort(c * momentum_values(g, kind))
        assert np.max(np.abs(got - expected)) <= 1e-10

    def test_sine_flow_hermitian(self):
        g = PeriodicGrid(128, L)
        f = FlowField.from_function(lambda x: np.sin(2.0 * np.pi * x / L), g)
        h = build_flow_hamiltonian(f, g)
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) <= 1e-12

    def test_rejects_non_finite_flow(self):
        g = PeriodicGrid(16, L)
        values = np.zeros(16)
        values[3] = np.nan
        with pytest.raises(ValidationError):
            FlowField(g, values)


class TestClassicalFlow:
    def test_zero_flow_stays_put(self):
        g = PeriodicGrid(32, L)
        traj = classical_flow_integrate(0.25, FlowField.constant(0.0, g), 2.0, 0.01)
        assert np.max(np.abs(traj - 0.25)) == 0.0

    def test_constant_flow_translates(self):
        g = PeriodicGrid(32, L)
        c = 0.3
        traj = classical_flow_integrate(0.9, FlowField.constant(c, g), 1.0, 1e-3)
        assert traj[-1] == pytest.approx((0.9 + c) % L, abs=1e-12)

    def test_sine_flow_matches_separable_closed_form(self):
        # dq/dt = sin(q) separates: q(t) = 2*atan(exp(t) * tan(q0/2)).
        g = PeriodicGrid(8192, 2.0 * np.pi)
        f = FlowField.from_function(np.sin, g)
        q0, T = np.pi / 2.0, 1.0
        traj = classical_flow_integrate(q0, f, T, 1e-3)
        exact = 2.0 * np.arctan(np.exp(T) * np.tan(q0 / 2.0))
        assert abs(traj[-1] - exact) <= 1e-6

    def test_bad_dt_rejected(self):
        g = PeriodicGrid(16, L)
        with pytest.raises(ValueError):
            classical_flow_integrate(0.0, FlowField.constant(1.0, g), 1.0, 0.0)
        with pytest.raises(ValueError):
            classical_flow_integrate(0.0, FlowField.constant(1.0, g), -1.0, 0.1)


class TestPacket:
    def test_too_narrow_rejected(self):
        g = PeriodicGrid(32, L)
        with pytest.raises(ValidationError):
            packet_state(GaussianPacket(0.5, 1.5 * g.spacing), g)

    def test_too_wide_rejected(self):
        g = PeriodicGrid(32, L)
        with pytest.raises(ValidationError):
            packet_state(GaussianPacket(0.5, 0.2 * L), g)

    def test_normalized_and_centered(self):
        g = PeriodicGrid(256, L)
        psi = packet_state(GaussianPacket(0.3, 8 * g.spacing), g)
        assert abs(psi.norm - 1.0) <= 1e-12
        assert expectation_position(psi, g) == pytest.approx(0.3, abs=1e-9)

    def test_center_across_boundary(self):
        g = PeriodicGrid(256, L)
        psi = packet_state(GaussianPacket(0.0, 8 * g.spacing), g)
        assert expectation_position(psi, g) % L == pytest.approx(0.0, abs=1e-9)


class TestEhrenfest:
    def test_zero_flow_is_stationary(self):
        g = PeriodicGrid(64, L)
        rep = ehrenfest_check(
            GaussianPacket(0.5, 4 * g.spacing), FlowField.constant(0.0, g), g, 1.0, 16
        )
        assert rep.max_deviation <= 1e-10

    def test_constant_flow_rigid_transport(self):
        g = PeriodicGrid(128, L)
        c = 0.4
        rep = ehrenfest_check(
            GaussianPacket(0.25, 4 * g.spacing),
            FlowField.constant(c, g),
            g,
            L / (4.0 * c),
            32,
        )
        assert rep.max_deviation <= 1e-6

    def test_nonuniform_flow_tracks_within_packet_systematics(self):
        g = PeriodicGrid(256, L)
        f = offset_sin_field(g)
        T = L / (4.0 * 0.3)
        rep = ehrenfest_check(GaussianPacket(0.0, 8 * g.spacing), f, g, T, 64)
        assert rep.max_deviation <= 0.02 * L

    def test_trajectory_pairs_shape(self):
        g = PeriodicGrid(64, L)
        rep = ehrenfest_check(
            GaussianPacket(0.5, 4 * g.spacing), FlowField.constant(0.1, g), g, 0.5, 8
        )
        pairs = rep.trajectory_pairs
        assert len(pairs) == 9
        assert pairs[0][0] == 0.0

    def test_refinement_monotone_with_central_derivative(self):
        # Three levels at fixed physical packet width L/32: the resolvable
        # O(spacing^2) dispersion of the central-difference generator
        # shrinks under refinement.
        T = L / (4.0 * 0.3)
        devs = []
        for m, cells in ((128, 4), (256, 8), (512, 16)):
            g = PeriodicGrid(m, L)
            f = offset_sin_field(g)
            rep = ehrenfest_check(
                GaussianPacket(0.0, cells * g.spacing), f, g, T, 64, derivative="central"
            )
            devs.append(rep.max_deviation)
        assert devs[0] > devs[1] > devs[2]
        assert devs[0] - devs[1] > 1e-8 and devs[1] - devs[2] > 1e-8


class TestNormFunctional:
    def test_zero_flow_amplitudes_exactly_constant(self):
        g = PeriodicGrid(64, L)
        h = build_flow_hamiltonian(FlowField.constant(0.0, g), g)
        psi = packet_state(GaussianPacket(0.5, 4 * g.spacing), g)
        rep = norm_functional_check(psi, h, 3.0)
        assert rep.amplitude_multiset_error == 0.0
        assert rep.norm_drift <= 1e-12
        assert rep.amplitude_transport

    def test_constant_flow_is_cyclic_shift(self):
        # Oracle: exact translation by an integer number of cells.
        g = PeriodicGrid(64, L)
        c = 0.5
        shift = 16
        T = shift * g.spacing / c
        h = build_flow_hamiltonian(FlowField.constant(c, g), g)
        psi = packet_state(GaussianPacket(0.25, 4 * g.spacing), g)
        final = h.propagate(psi.amplitudes, T)
        rolled = np.roll(np.abs(psi.amplitudes), shift)
        assert np.max(np.abs(np.abs(final) - rolled)) <= 1e-8
        rep = norm_functional_check(psi, h, T)
        assert rep.amplitude_multiset_error <= 1e-8
        assert rep.amplitude_transport

    def test_sine_flow_preserves_norm_but_not_multiset(self):
        g = PeriodicGrid(128, L)
        f = FlowField.from_function(lambda x: np.sin(2.0 * np.pi * x / L), g)
        h = build_flow_hamiltonian(f, g)
        psi = packet_state(GaussianPacket(0.25, 6 * g.spacing), g)
        rep = norm_functional_check(psi, h, 0.5)
        assert rep.norm_drift <= 1e-9
        assert rep.amplitude_multiset_error > 1e-3
        assert not rep.amplitude_transport

    def test_unitarity_over_time_sweep(self):
        g = PeriodicGrid(128, L)
        f = offset_sin_field(g)
        h = build_flow_hamiltonian(f, g)
        psi = packet_state(GaussianPacket(0.5, 6 * g.spacing), g)
        for t in np.linspace(0.0, 2.0, 9):
            assert abs(np.linalg.norm(h.propagate(psi.amplitudes, float(t))) - 1.0) <= 1e-9

    def test_dimension_mismatch(self):
        g = PeriodicGrid(64, L)
        h = build_flow_hamiltonian(FlowField.constant(0.0, g), g)
        g2 = PeriodicGrid(32, L)
        psi = packet_state(GaussianPacket(0.5, 4 * g2.spacing), g2)
        with pytest.raises(ValueError):
            norm_functional_check(psi, h, 1.0)


class TestFlowFieldTable:
    def test_resample_matches_function_on_grid(self):
        g = PeriodicGrid(64, L)
        xs = np.linspace(0.0, L, 513)[:-1]
        fs = 0.3 + 0.1 * np.sin(2.0 * np.pi * xs / L)
        field = FlowField.from_table(xs, fs, g)
        direct = offset_sin_field(g)
        assert np.max(np.abs(field.values - direct.values)) <= 1e-4

    def test_rejects_short_table(self):
        g = PeriodicGrid(16, L)
        with pytest.raises(ValidationError):
            FlowField.from_table([0.0], [1.0], g)
