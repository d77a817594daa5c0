"""Qubit dynamics toolbox: time-dependent channels and generators, classical
stochastic reductions on arbitrary projective bases, P/CP divisibility
certificates, phase-covariant maps, and coherence-assisted information flow.
"""
from .states import (
    SIGMA_X, SIGMA_Y, SIGMA_Z, IDENTITY2, PAULI,
    InvalidStateError, bloch_to_density, density_to_bloch,
    pauli_coefficients, from_pauli_coefficients, trace_norm,
    validate_density, ProjectorBasis, Helstrom, helstrom,
    l1_coherence, decohere, outcome_probabilities,
)
from .channels import (
    QubitChannel, PositivityResult, ReductionResult, cross_matrix,
    is_unital, choi, is_positive, ell_functional, dual, is_self_dual,
    classical_reduction_matrix,
)
from .generators import (
    GeneratorSpec, DivisibilityCheck, SingularMapError,
    bloch_generator, kossakowski_from_bloch, y_matrix, kossakowski_from_y,
    instantaneous_p_div, instantaneous_cp_div,
    Propagator, intertwiner, propagate_ode, propagate_timesplitting,
    uniform_grid,
)
from .classical import (
    StochasticProcess, ClassicalGenerator, SingularProcessError,
    reduce_map, reduce_generator, solve_classical_master,
    classical_generator_from_T, FCriterionResult, f_criterion,
    kolmogorov_check, kolmogorov_distance,
)
from .covariant import (
    CovariantTriple, SingularGeneratorError, apply_triple, from_channel,
    compose_triples, positivity_triple, cp_triple, dual_triple,
    is_self_dual_triple, CovariantFamily, CovariantGenerator,
    generator_triple, kossakowski_of, hamiltonian_of, generator_spec_of,
    Prop4Result, prop4_p_div, prop4_cp_div, projector_outflow_form,
    SelfDualFamily, selfdual_build, t00_closed_form, tanh_modulated_family,
    propagator_from_family,
)
from .infoflow import (
    InfoTrajectory, quantum_info, info_trajectory,
    CoherenceBound, coherence_bound_check, detect_backflow,
    WitnessEntry, witness_search, default_chi_grid, default_xi_grid,
)
from .scenarios import (
    SCENARIOS, ConfigError, NumericalFailure, ScenarioConfig,
    config_from_document, build_scenario, compute, run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "IDENTITY2", "PAULI",
    "InvalidStateError", "bloch_to_density", "density_to_bloch",
    "pauli_coefficients", "from_pauli_coefficients", "trace_norm",
    "validate_density", "ProjectorBasis", "Helstrom", "helstrom",
    "l1_coherence", "decohere", "outcome_probabilities",
    "QubitChannel", "PositivityResult", "ReductionResult", "cross_matrix",
    "is_unital", "choi", "is_positive", "ell_functional", "dual",
    "is_self_dual", "classical_reduction_matrix",
    "GeneratorSpec", "DivisibilityCheck", "SingularMapError",
    "bloch_generator", "kossakowski_from_bloch", "y_matrix",
    "kossakowski_from_y", "instantaneous_p_div", "instantaneous_cp_div",
    "Propagator", "intertwiner", "propagate_ode", "propagate_timesplitting",
    "uniform_grid",
    "StochasticProcess", "ClassicalGenerator", "SingularProcessError",
    "reduce_map", "reduce_generator", "solve_classical_master",
    "classical_generator_from_T", "FCriterionResult", "f_criterion",
    "kolmogorov_check", "kolmogorov_distance",
    "CovariantTriple", "SingularGeneratorError", "apply_triple",
    "from_channel", "compose_triples", "positivity_triple", "cp_triple",
    "dual_triple", "is_self_dual_triple", "CovariantFamily",
    "CovariantGenerator", "generator_triple", "kossakowski_of",
    "hamiltonian_of", "generator_spec_of", "Prop4Result", "prop4_p_div",
    "prop4_cp_div", "projector_outflow_form", "SelfDualFamily",
    "selfdual_build", "t00_closed_form", "tanh_modulated_family",
    "propagator_from_family",
    "InfoTrajectory", "quantum_info", "info_trajectory",
    "CoherenceBound", "coherence_bound_check", "detect_backflow",
    "WitnessEntry", "witness_search", "default_chi_grid", "default_xi_grid",
    "SCENARIOS", "ConfigError", "NumericalFailure", "ScenarioConfig",
    "config_from_document", "build_scenario", "compute", "run_sweep",
    "__version__",
]
