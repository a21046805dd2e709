"""Finite-volume solver for conservation laws whose flux switches across
fixed spatial interfaces, with an exact-solution oracle and verification
tooling for convergence studies.
"""

from .analysis import (
    EntropyResidualReport,
    ErrorReport,
    entropy_residual,
    flux_lipschitz_in_space,
    l1_error,
    l1_error_vs_oracle,
    ooc,
    spatial_tv,
    temporal_tv,
)
from .config import (
    ExperimentConfig,
    build_boundary,
    build_model,
    build_problem,
    build_solver_config,
    config_digest,
    data_range,
    initial_datum,
    load_config,
    preset,
    save_config,
)
from .errors import (
    ConfigError,
    DiscfluxError,
    DivergentRangeError,
    DomainError,
    FluxRangeError,
    GridAlignmentError,
    InterfaceAmbiguityError,
    MissingDataError,
    ProjectionError,
    SequencingError,
    StabilityError,
    UnsupportedOracleError,
    ValidityError,
)
from .exact import (
    ExactSolution,
    exact_linear_advection,
    exact_two_flux_riemann,
)
from .fluxes import (
    FluxSegment,
    PiecewiseFlux,
    custom_flux,
    invariant_interval,
    invert,
    invert_near,
    linear_flux,
    max_wave_speed,
    quadratic_flux,
)
from .grid import (
    Grid,
    PiecewiseConstant,
    SampledTable,
    build_grid,
    cell_average,
)
from .solver import (
    Inflow,
    Outflow,
    ProblemSpec,
    Snapshot,
    SolverConfig,
    State,
    Trajectory,
    inflow_boundary_value,
    numerical_flux_value,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DiscfluxError",
    "DivergentRangeError",
    "DomainError",
    "EntropyResidualReport",
    "ErrorReport",
    "ExactSolution",
    "ExperimentConfig",
    "FluxRangeError",
    "FluxSegment",
    "Grid",
    "GridAlignmentError",
    "Inflow",
    "InterfaceAmbiguityError",
    "MissingDataError",
    "Outflow",
    "PiecewiseConstant",
    "PiecewiseFlux",
    "ProblemSpec",
    "ProjectionError",
    "SampledTable",
    "SequencingError",
    "Snapshot",
    "SolverConfig",
    "StabilityError",
    "State",
    "Trajectory",
    "UnsupportedOracleError",
    "ValidityError",
    "build_boundary",
    "build_grid",
    "build_model",
    "build_problem",
    "build_solver_config",
    "cell_average",
    "config_digest",
    "custom_flux",
    "data_range",
    "entropy_residual",
    "exact_linear_advection",
    "exact_two_flux_riemann",
    "flux_lipschitz_in_space",
    "inflow_boundary_value",
    "initial_datum",
    "invariant_interval",
    "invert",
    "invert_near",
    "l1_error",
    "l1_error_vs_oracle",
    "linear_flux",
    "load_config",
    "max_wave_speed",
    "numerical_flux_value",
    "ooc",
    "preset",
    "quadratic_flux",
    "run",
    "save_config",
    "spatial_tv",
    "step",
    "temporal_tv",
]
