"""Numerical laboratory for a parabolic-elliptic chemotaxis system with
space-time dependent logistic sources."""

from .analysis import (
    Trajectory,
    check_persistence,
    check_rectangle_invariance,
    check_speed_interval,
    estimate_speed,
    front_position,
)
from .elliptic import SpectralWorkspace, gradient, solve_chemical, verify_v_bounds
from .grid import Grid, ScalarField, VectorField, field_from_function
from .params import (
    CoefficientSpec,
    HypothesisError,
    ParameterSet,
    TheoreticalBounds,
    check_h1,
    check_h2,
    check_h3,
    comparison_envelope,
    cube_principal_pair,
    finite_time_floor,
    m_plus,
    mn_sequence,
    rectangle_bounds,
    spreading_speeds,
)
from .scenario import Scenario, ScenarioError, load_scenario, make_initial, parse_scenario
from .stepper import NumericalAbort, run

__version__ = "0.1.0"

__all__ = [
    "CoefficientSpec",
    "Grid",
    "HypothesisError",
    "NumericalAbort",
    "ParameterSet",
    "ScalarField",
    "Scenario",
    "ScenarioError",
    "SpectralWorkspace",
    "TheoreticalBounds",
    "Trajectory",
    "VectorField",
    "check_h1",
    "check_h2",
    "check_h3",
    "check_persistence",
    "check_rectangle_invariance",
    "check_speed_interval",
    "comparison_envelope",
    "cube_principal_pair",
    "estimate_speed",
    "field_from_function",
    "finite_time_floor",
    "front_position",
    "gradient",
    "load_scenario",
    "m_plus",
    "make_initial",
    "mn_sequence",
    "parse_scenario",
    "rectangle_bounds",
    "run",
    "solve_chemical",
    "spreading_speeds",
    "verify_v_bounds",
    "__version__",
]
