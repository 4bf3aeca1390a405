"""Deterministic finite-state dynamics embedded in quantum form.

Reversible permutation dynamics on a finite ontic state space, its
canonical unitary/Hamiltonian representation, the continuum flow
generator, decoherence by environment-phase averaging, and outcome
statistics that identify squared-amplitude probabilities with relative
abundances of initial states.

Submodules are imported lazily so the command-line front end can
configure process-level knobs (thread pools) before numpy loads.
"""

from __future__ import annotations

__version__ = "0.1.0"

_EXPORTS = {
    "ontic": [
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
    ],
    "hilbert": [
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
    ],
    "flow": [
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
    ],
    "decoherence": [
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
    ],
    "born": [
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
    ],
    "seeding": [
        "STREAMS",
        "substream",
        "substream_state",
    ],
}

_ATTR_TO_MODULE = {name: mod for mod, names in _EXPORTS.items() for name in names}

__all__ = sorted(_ATTR_TO_MODULE) + ["__version__"]


def __getattr__(name: str):
    module_name = _ATTR_TO_MODULE.get(name)
    if module_name is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    from importlib import import_module

    value = getattr(import_module(f".{module_name}", __name__), name)
    globals()[name] = value
    return value


def __dir__():
    return __all__
