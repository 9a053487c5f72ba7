"""Spectral Galerkin simulation of Kirchhoff wave equations with nonlocal strong damping.

    u_tt - sigma(|grad u|^2) Lap u_t - phi(|grad u|^2) Lap u + f(u) = h

on an interval or rectangle with homogeneous Dirichlet conditions.
"""

from .dynamics import ModalState, StepperConfig, Trajectory, simulate, step
from .errors import (AssumptionGateError, ConfigError, DomainError, KirchhoffError, NumericalError,
                     SequencingError, StepFailure)
from .model import CoefficientSet, check_assumptions
from .spectral import Basis, Domain

__version__ = "0.1.0"
