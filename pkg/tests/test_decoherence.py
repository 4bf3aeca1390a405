import numpy as np
import pytest

from ontosim.decoherence import (
    BranchWeights,
    DensityMatrix,
    EnvironmentEnsemble,
    closed_form_ensemble_density,
    ensemble_density,
    phase_average_suppression,
    pure_branch_state,
    pure_state_density,
    reduced_system_density,
    sample_entangled_basis,
)
from ontosim.ontic import ValidationError

SQRT_024 = np.sqrt(0.24)


def block_pattern_density(k, basis, env, w):
    """Oracle: assemble the density matrix entry by entry from the 2x2
    per-(i, j) block pattern, instead of an outer product."""
    n = basis.size
    alpha = basis.coefficients[:, k]
    phi = env.phases
    c = np.sqrt(w.p_live * w.p_dead)
    rho = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            scale = alpha[i] * np.conj(alpha[j])
            rho[i, j] = scale * w.p_live
            rho[i, n + j] = scale * c * np.exp(-1j * phi[j])
            rho[n + i, j] = scale * c * np.exp(1j * phi[i])
            rho[n + i, n + j] = scale * w.p_dead * np.exp(1j * (phi[i] - phi[j]))
    return rho


class TestBranchWeights:
    def test_bounds(self):
        with pytest.raises(ValidationError):
            BranchWeights(1.4)
        with pytest.raises(ValidationError):
            BranchWeights(-0.1)

    def test_complement_and_coherence(self):
        w = BranchWeights(0.6)
        assert w.p_dead == pytest.approx(0.4)
        assert w.coherence == pytest.approx(SQRT_024)


class TestEnvironmentEnsemble:
    def test_uniform_grid_values(self):
        env = EnvironmentEnsemble.uniform_grid(4)
        assert np.allclose(env.phases, [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_random_phases_in_range(self):
        env = EnvironmentEnsemble.random_uniform(1000, seed=5)
        assert env.phases.min() >= 0.0
        assert env.phases.max() < 2.0 * np.pi

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            EnvironmentEnsemble(np.array([0.0, 2.0 * np.pi]))

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            EnvironmentEnsemble.uniform_grid(0)


class TestEntangledBasis:
    def test_single_level_is_unit_modulus(self):
        basis = sample_entangled_basis(1, seed=0)
        assert abs(abs(complex(basis.coefficients[0, 0])) - 1.0) <= 1e-12

    def test_unitarity_residual(self):
        basis = sample_entangled_basis(8, seed=3)
        assert basis.unitarity_residual() <= 1e-12

    def test_completeness_rows_orthonormal(self):
        basis = sample_entangled_basis(32, seed=9)
        c = basis.coefficients
        assert np.max(np.abs(c @ c.conj().T - np.eye(32))) <= 1e-10

    def test_distinct_seeds_distinct_matrices(self):
        a = sample_entangled_basis(64, seed=1)
        b = sample_entangled_basis(64, seed=2)
        assert a.unitarity_residual() <= 1e-12
        assert b.unitarity_residual() <= 1e-12
        assert np.max(np.abs(a.coefficients - b.coefficients)) > 0.01

    def test_deterministic_per_seed(self):
        a = sample_entangled_basis(16, seed=7)
        b = sample_entangled_basis(16, seed=7)
        assert np.array_equal(a.coefficients, b.coefficients)

    def test_rejects_zero_size(self):
        with pytest.raises(ValidationError):
            sample_entangled_basis(0, seed=1)


class TestPureBranchState:
    def test_certain_branch_is_delta(self):
        basis = sample_entangled_basis(1, seed=4)
        env = EnvironmentEnsemble(np.array([2.5]))
        psi = pure_branch_state(0, basis, env, BranchWeights(1.0))
        assert np.allclose(np.abs(psi.amplitudes), [1.0, 0.0])

    def test_single_level_amplitudes(self):
        # trivial basis: fix the 1x1 unitary to exactly 1
        from ontosim.decoherence import EntangledBasis

        basis = EntangledBasis(np.array([[1.0 + 0.0j]]))
        env = EnvironmentEnsemble(np.array([0.0]))
        psi = pure_branch_state(0, basis, env, BranchWeights(0.6))
        assert np.allclose(psi.amplitudes, [np.sqrt(0.6), np.sqrt(0.4)])

    def test_norm_and_branch_marginal(self):
        basis = sample_entangled_basis(16, seed=11)
        env = EnvironmentEnsemble.random_uniform(16, seed=12)
        psi = pure_branch_state(3, basis, env, BranchWeights(0.6))
        assert abs(psi.norm - 1.0) <= 1e-12
        live_prob = float(np.sum(np.abs(psi.amplitudes[:16]) ** 2))
        assert abs(live_prob - 0.6) <= 1e-12

    def test_index_out_of_range(self):
        basis = sample_entangled_basis(4, seed=1)
        env = EnvironmentEnsemble.uniform_grid(4)
        with pytest.raises(ValueError):
            pure_branch_state(4, basis, env, BranchWeights(0.5))


class TestPureStateDensity:
    def test_trivial_environment_matches_two_by_two(self):
        from ontosim.decoherence import EntangledBasis

        basis = EntangledBasis(np.array([[1.0 + 0.0j]]))
        env = EnvironmentEnsemble(np.array([0.0]))
        rho = pure_state_density(0, basis, env, BranchWeights(0.6))
        expected = np.array([[0.6, SQRT_024], [SQRT_024, 0.4]], dtype=complex)
        assert np.max(np.abs(rho.matrix - expected)) <= 1e-12

    def test_certain_branch_occupies_one_block(self):
        basis = sample_entangled_basis(4, seed=2)
        env = EnvironmentEnsemble.uniform_grid(4)
        rho = pure_state_density(1, basis, env, BranchWeights(1.0))
        assert np.count_nonzero(rho.matrix[4:, :]) == 0
        assert np.count_nonzero(rho.matrix[:, 4:]) == 0

    def test_trace_one_and_rank_one(self):
        basis = sample_entangled_basis(8, seed=6)
        env = EnvironmentEnsemble.random_uniform(8, seed=7)
        rho = pure_state_density(5, basis, env, BranchWeights(0.6))
        assert abs(complex(np.trace(rho.matrix)) - 1.0) <= 1e-12
        eigvals = np.sort(np.linalg.eigvalsh(rho.matrix))
        assert eigvals[-1] == pytest.approx(1.0, abs=1e-10)
        assert abs(eigvals[-2]) <= 1e-10

    def test_matches_block_pattern_oracle(self):
        basis = sample_entangled_basis(5, seed=8)
        env = EnvironmentEnsemble.random_uniform(5, seed=9)
        w = BranchWeights(0.6)
        rho = pure_state_density(2, basis, env, w)
        oracle = block_pattern_density(2, basis, env, w)
        assert np.max(np.abs(rho.matrix - oracle)) <= 1e-12


class TestEnsembleDensity:
    def test_single_level_equals_pure_state(self):
        basis = sample_entangled_basis(1, seed=3)
        env = EnvironmentEnsemble(np.array([1.0]))
        w = BranchWeights(0.6)
        assert np.max(
            np.abs(ensemble_density(basis, env, w).matrix - pure_state_density(0, basis, env, w).matrix)
        ) <= 1e-15

    def test_matches_closed_form(self):
        basis = sample_entangled_basis(16, seed=21)
        env = EnvironmentEnsemble.random_uniform(16, seed=22)
        w = BranchWeights(0.6)
        averaged = ensemble_density(basis, env, w)
        closed = closed_form_ensemble_density(env, w)
        assert np.max(np.abs(averaged.matrix - closed.matrix)) <= 1e-12

    def test_zero_phases_off_diagonal_blocks(self):
        n = 8
        basis = sample_entangled_basis(n, seed=30)
        env = EnvironmentEnsemble(np.zeros(n))
        w = BranchWeights(0.6)
        rho = ensemble_density(basis, env, w)
        upper = rho.matrix[:n, n:]
        assert np.max(np.abs(upper - SQRT_024 / n * np.eye(n))) <= 1e-12

    def test_trace_one_regardless_of_phases(self):
        for seed in range(4):
            basis = sample_entangled_basis(12, seed=seed)
            env = EnvironmentEnsemble.random_uniform(12, seed=100 + seed)
            rho = ensemble_density(basis, env, BranchWeights(0.37))
            assert abs(complex(np.trace(rho.matrix)) - 1.0) <= 1e-10

    def test_positive_semidefinite_at_small_sizes(self):
        basis = sample_entangled_basis(16, seed=5)
        env = EnvironmentEnsemble.random_uniform(16, seed=6)
        rho = ensemble_density(basis, env, BranchWeights(0.6))
        assert float(np.linalg.eigvalsh(rho.matrix).min()) >= -1e-10

    def test_density_validation_rejects_bad_matrices(self):
        with pytest.raises(ValidationError):
            DensityMatrix(np.array([[0.6, 0.5], [0.1, 0.4]], dtype=complex))  # not Hermitian
        with pytest.raises(ValidationError):
            DensityMatrix(np.eye(2, dtype=complex))  # trace 2
        with pytest.raises(ValidationError):
            DensityMatrix(np.eye(3, dtype=complex) / 3.0)  # odd dimension


class TestPhaseAverageSuppression:
    def test_zero_phases_give_unit_magnitude(self):
        env = EnvironmentEnsemble(np.zeros(10))
        assert phase_average_suppression(env).magnitude == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("n", [2, 3, 16, 1000])
    def test_uniform_grid_cancels_exactly(self, n):
        # Geometric series of the n-th roots of unity sums to zero.
        env = EnvironmentEnsemble.uniform_grid(n)
        assert phase_average_suppression(env).magnitude <= 1e-12

    def test_random_phase_magnitude_follows_rayleigh_statistics(self):
        # Monte-Carlo oracle: |mean of N unit phasors| is Rayleigh with
        # scale 1/sqrt(2N); median 0.9394 * sqrt(pi/4)/sqrt(N), tail
        # quantiles well below 3.5/sqrt(N).
        n = 10_000
        seeds = 1000
        mags = np.empty(seeds)
        for s in range(seeds):
            env = EnvironmentEnsemble.random_uniform(n, seed=s)
            mags[s] = phase_average_suppression(env).magnitude
        median = float(np.median(mags))
        ref = np.sqrt(np.pi / 4.0) / np.sqrt(n)
        assert 0.5 * ref <= median <= 1.5 * ref
        assert float(np.quantile(mags, 0.99)) <= 3.5 / np.sqrt(n)


class TestReducedSystemDensity:
    def test_uniform_grid_is_exactly_diagonal(self):
        basis = sample_entangled_basis(16, seed=8)
        env = EnvironmentEnsemble.uniform_grid(16)
        rho = ensemble_density(basis, env, BranchWeights(0.6))
        reduced = reduced_system_density(rho)
        assert np.max(np.abs(reduced - np.diag([0.6, 0.4]))) <= 1e-10

    def test_zero_phases_keep_full_coherence(self):
        basis = sample_entangled_basis(8, seed=10)
        env = EnvironmentEnsemble(np.zeros(8))
        rho = ensemble_density(basis, env, BranchWeights(0.6))
        reduced = reduced_system_density(rho)
        expected = np.array([[0.6, SQRT_024], [SQRT_024, 0.4]])
        assert np.max(np.abs(reduced - expected)) <= 1e-10

    def test_reduced_off_diagonal_equals_suppression_coefficient(self):
        # Dual route at modest size: the partial trace of the closed form
        # must equal coherence * mean phasor.
        w = BranchWeights(0.6)
        env = EnvironmentEnsemble.random_uniform(256, seed=13)
        reduced = reduced_system_density(closed_form_ensemble_density(env, w))
        stat = phase_average_suppression(env)
        assert abs(reduced[0, 1] - w.coherence * stat.mean_phasor) <= 1e-14

    def test_random_phase_off_diagonal_bound(self):
        # Rayleigh oracle at N = 10^4: off-diagonal stays below
        # 3.5 * sqrt(0.24) / sqrt(N) for at least 99 of 100 seeds. The
        # partial-trace identity above lets the scalar route stand in for
        # the (2N)^2 matrix.
        n = 10_000
        w = BranchWeights(0.6)
        bound = 3.5 * SQRT_024 / np.sqrt(n)
        hits = 0
        for seed in range(100):
            env = EnvironmentEnsemble.random_uniform(n, seed=seed)
            off = w.coherence * phase_average_suppression(env).magnitude
            if off <= bound:
                hits += 1
        assert hits >= 99
