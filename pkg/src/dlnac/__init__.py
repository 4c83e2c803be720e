"""Variable-step DLN time integration for the Allen-Cahn equation with P2
finite elements: a secant (modified) scheme, a scalar-auxiliary-variable
scheme, and LTE-based step adaptivity."""

__version__ = "0.1.0"

from .adaptive import AdaptConfig, AdaptHistory, AdaptStats, adaptive_loop, lte_coefficients
from .coefficients import (
    THETA_DLN,
    THETA_KS,
    THETA_MIDPOINT,
    THETAS,
    DlnCoefficients,
    RefactorCoefficients,
    combine,
    dln_coefficients,
    refactor_coefficients,
)
from .errors import (
    ConvergenceFailure,
    DecompositionFailure,
    DegenerateCoefficients,
    DlnError,
    InvalidArgument,
    InvalidState,
    NotReady,
    NumericalFailure,
    StepFloorError,
    TooManyRejections,
)
from .linsolve import Factorization, FactorizationCache, factorize, solve
from .model import ModelParams, f, f_tilde, F
from .modified import FixedPointConfig, ModifiedDLNStepper, step_modified
from .sav import SavParams, SavStepper, be_sav_substep, step_sav
from .state import SavState, SchemeState, StepDiagnostics

__all__ = [
    "AdaptConfig",
    "AdaptHistory",
    "AdaptStats",
    "ConvergenceFailure",
    "DecompositionFailure",
    "DegenerateCoefficients",
    "DlnCoefficients",
    "DlnError",
    "F",
    "Factorization",
    "FactorizationCache",
    "FixedPointConfig",
    "InvalidArgument",
    "InvalidState",
    "ModelParams",
    "ModifiedDLNStepper",
    "NotReady",
    "NumericalFailure",
    "RefactorCoefficients",
    "SavParams",
    "SavState",
    "SavStepper",
    "SchemeState",
    "StepDiagnostics",
    "StepFloorError",
    "THETAS",
    "THETA_DLN",
    "THETA_KS",
    "THETA_MIDPOINT",
    "TooManyRejections",
    "adaptive_loop",
    "be_sav_substep",
    "combine",
    "dln_coefficients",
    "f",
    "f_tilde",
    "factorize",
    "lte_coefficients",
    "refactor_coefficients",
    "solve",
    "step_modified",
    "step_sav",
]
