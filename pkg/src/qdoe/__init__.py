"""Optimal measurement design for quantum-state estimation.

A library plus CLI for Fisher information of POVM designs, SLD quantum
Fisher information, optimality criteria on information matrices,
closed-form optimal designs for qubit models, a certificate-producing
design optimizer, and efficiency comparisons between designs.
"""

from .criteria import (
    Criterion,
    criterion_value,
    efficiency,
    feasibility_contains,
    generalized_inverse_quadratic,
    gill_massar_value,
    lowner_dominates,
    sensitivity,
    sensitivity_threshold,
)
from .errors import QdoeError
from .fisher import (
    DesignMeasure,
    born_probabilities,
    fisher_matrix_design,
    fisher_matrix_povm,
    fisher_region_point,
    flatten_design,
    sld_fisher,
    sld_frame_pvm,
    sld_operators,
)
from .quantum import (
    AffineModel,
    Bloch3Model,
    BlochSubModel,
    ParametricModel,
    PhaseAmplitudeModel,
    Povm,
    bloch_vector,
    merge_proportional,
    mix_povms,
    pauli_pvm,
    validate_povm,
)
from .qubit import (
    OptimalDesignResult,
    a_optimal,
    c_optimal,
    closed_form_inverse_fisher,
    d_optimal,
    e_optimal,
    efficiency_curves,
    equivalence_certificate,
    gamma_optimal,
    max_information_trace,
    scalar_optimal,
    standard_tomography,
)
from .solver import (
    CandidateSet,
    EfficiencyReport,
    SolveOptions,
    SolveReport,
    apportion,
    compare_designs,
    fedorov_wynn,
    optimal_criterion_value,
    prune_design,
    simplex_grid_minimum,
)

__version__ = "0.1.0"

__all__ = [
    "AffineModel",
    "Bloch3Model",
    "BlochSubModel",
    "CandidateSet",
    "Criterion",
    "DesignMeasure",
    "EfficiencyReport",
    "OptimalDesignResult",
    "ParametricModel",
    "PhaseAmplitudeModel",
    "Povm",
    "QdoeError",
    "SolveOptions",
    "SolveReport",
    "a_optimal",
    "apportion",
    "bloch_vector",
    "born_probabilities",
    "c_optimal",
    "closed_form_inverse_fisher",
    "compare_designs",
    "criterion_value",
    "d_optimal",
    "e_optimal",
    "efficiency",
    "efficiency_curves",
    "equivalence_certificate",
    "feasibility_contains",
    "fedorov_wynn",
    "fisher_matrix_design",
    "fisher_matrix_povm",
    "fisher_region_point",
    "flatten_design",
    "gamma_optimal",
    "generalized_inverse_quadratic",
    "gill_massar_value",
    "lowner_dominates",
    "max_information_trace",
    "merge_proportional",
    "mix_povms",
    "optimal_criterion_value",
    "pauli_pvm",
    "prune_design",
    "scalar_optimal",
    "sensitivity",
    "sensitivity_threshold",
    "simplex_grid_minimum",
    "sld_fisher",
    "sld_frame_pvm",
    "sld_operators",
    "standard_tomography",
    "validate_povm",
]
