"""Twist maps of the torus, made computable.

Exact area-preserving twist maps lifted to the plane, vertical rotation
numbers, level-set components C(p,q) with their graph functions, periodic
orbit searches (Birkhoff and vertical/climbing), invariant-circle
nonexistence witnesses, and onset-threshold estimation for the standard
family -- with a deterministic CLI on top.
"""

from .covering import (
    CylinderPoint,
    Deck,
    PlanePoint,
    TorusPoint,
    frac_split,
    lift,
    mod1,
    project_cylinder,
    project_torus,
    torus_distance,
    translate,
)
from .errors import (
    BracketError,
    ConfigError,
    DivergenceError,
    NonGraphImageError,
    NumericalError,
    ParameterError,
)
from .kernels import BACKEND
from .levelset import LevelSetComponent, compute_levelset, translate_component, verify_exchange
from .maps import (
    BUILTIN_FAMILIES,
    StructureReport,
    TwistFamily,
    builtin_circle_diffeo,
    builtin_saddle_center,
    builtin_standard,
    builtin_standard_shifted,
    check_exactness,
    check_structure,
    custom_family,
    eval_lift,
    family_from_config,
)
from .ric import ClimbingWitness, RicBudget, RicVerdict, find_climbing_orbit, ric_witness
from .rotation import RotationEstimate, classify_orbit, estimate_rotation, orbit_segment
from .solver import (
    OrbitRecord,
    find_birkhoff,
    find_vertical,
    intermediate_spectrum,
    newton_refine,
    vertical_displacement,
)
from .threshold import (
    CriticalEstimate,
    ThresholdRecord,
    bisect_threshold,
    critical_grid,
    estimate_critical,
    has_vertical,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BUILTIN_FAMILIES",
    "BracketError",
    "ClimbingWitness",
    "ConfigError",
    "CriticalEstimate",
    "CylinderPoint",
    "Deck",
    "DivergenceError",
    "LevelSetComponent",
    "NonGraphImageError",
    "NumericalError",
    "OrbitRecord",
    "ParameterError",
    "PlanePoint",
    "RicBudget",
    "RicVerdict",
    "RotationEstimate",
    "StructureReport",
    "ThresholdRecord",
    "TorusPoint",
    "TwistFamily",
    "bisect_threshold",
    "builtin_circle_diffeo",
    "builtin_saddle_center",
    "builtin_standard",
    "builtin_standard_shifted",
    "check_exactness",
    "check_structure",
    "classify_orbit",
    "compute_levelset",
    "critical_grid",
    "custom_family",
    "estimate_critical",
    "estimate_rotation",
    "eval_lift",
    "family_from_config",
    "find_birkhoff",
    "find_climbing_orbit",
    "find_vertical",
    "frac_split",
    "has_vertical",
    "intermediate_spectrum",
    "lift",
    "mod1",
    "newton_refine",
    "orbit_segment",
    "project_cylinder",
    "project_torus",
    "ric_witness",
    "torus_distance",
    "translate",
    "translate_component",
    "verify_exchange",
    "vertical_displacement",
]
