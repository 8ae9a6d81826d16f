"""Stochastic cellular automata as mixtures of deterministic rules.

The package simulates multi-state stochastic cellular automata on a ring,
evolves their exact cell-wise state distributions without sampling, and
decomposes any such rule into a weighted mixture of deterministic rules
whose leading weight is maximal.  An experiment harness reproduces three
seeded studies on top of those engines.
"""

from .cca import (
    SIMPLEX_TOL,
    ContinuousConfiguration,
    ContinuousTrajectory,
    cca_converged,
    cca_evolve,
    cca_local_eval,
    cca_step,
    density_trace,
    lift,
)
from .core import (
    MAX_STATES,
    ROW_SUM_TOL,
    Configuration,
    Geometry,
    Lut,
    Plut,
    ValidationError,
    as_deterministic,
    config_random,
    digit_matrix,
    ind_digits,
    load_rule,
    lut_to_plut,
    make_lut,
    neighborhood_index,
    one_hot,
    save_rule,
    validate_plut,
)
from .decompose import (
    ZERO_TOL,
    Decomposition,
    decompose_stochastic_matrix,
    decomposition_issues,
    decomposition_valid,
    dominant_component,
    greedy_decompose,
    mixture_plut,
    recompose,
    reconstruction_error,
)
from .io import read_csv, write_csv, write_pbm, write_pgm
from .experiments import (
    REFERENCE_CLASSIFICATION,
    C3Record,
    C3Summary,
    ClassThresholds,
    DAlphaCurve,
    GridStats,
    SurveyRow,
    classify_aca,
    hamming,
    run_aca_survey,
    run_c3_convergence,
    run_c3_success,
    run_dalpha,
    run_totalistic_grid,
)
from .rules import (
    TotalisticParams,
    alpha_async_plut,
    c3_plut,
    eca_lut,
    identity_lut,
    lut_number,
    parse_rule_spec,
    rule_spec_lut,
    totalistic_plut,
    widen_radius,
)
from .sca import (
    SpaceTimeDiagram,
    derive_rng,
    estimate_pi,
    lut_evolve,
    mixture_step,
    sca_evolve,
    sca_step,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_STATES",
    "ROW_SUM_TOL",
    "SIMPLEX_TOL",
    "ZERO_TOL",
    "C3Record",
    "C3Summary",
    "ClassThresholds",
    "Configuration",
    "ContinuousConfiguration",
    "ContinuousTrajectory",
    "DAlphaCurve",
    "Decomposition",
    "Geometry",
    "GridStats",
    "Lut",
    "Plut",
    "REFERENCE_CLASSIFICATION",
    "SpaceTimeDiagram",
    "SurveyRow",
    "TotalisticParams",
    "ValidationError",
    "alpha_async_plut",
    "as_deterministic",
    "c3_plut",
    "cca_converged",
    "cca_evolve",
    "cca_local_eval",
    "cca_step",
    "classify_aca",
    "config_random",
    "decompose_stochastic_matrix",
    "decomposition_issues",
    "decomposition_valid",
    "density_trace",
    "derive_rng",
    "digit_matrix",
    "dominant_component",
    "eca_lut",
    "estimate_pi",
    "greedy_decompose",
    "hamming",
    "identity_lut",
    "ind_digits",
    "lift",
    "load_rule",
    "lut_evolve",
    "lut_number",
    "lut_to_plut",
    "make_lut",
    "mixture_plut",
    "mixture_step",
    "neighborhood_index",
    "one_hot",
    "parse_rule_spec",
    "read_csv",
    "recompose",
    "reconstruction_error",
    "rule_spec_lut",
    "run_aca_survey",
    "run_c3_convergence",
    "run_c3_success",
    "run_dalpha",
    "run_totalistic_grid",
    "save_rule",
    "sca_evolve",
    "sca_step",
    "validate_plut",
    "widen_radius",
    "write_csv",
    "write_pbm",
    "write_pgm",
]