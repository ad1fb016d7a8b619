"""Simulation of quantum period finding in infrastructures of arbitrary dimension.

Exact lattice arithmetic, a classical simulator of the Fourier sampling step, generation
probabilities, approximate basis recovery and a parameter planner.
"""

__version__ = "0.1.0"

from .errors import BudgetError, CapabilityError, CheckFailure, ConfigError, InfraError, PreconditionError
from .lattice import Lattice, dual_lattice, hnf, kz_reduce, lll_reduce, snf
from .infrastructure import BoxInfrastructure, GridSpec, interval_infrastructure, synth_box_infrastructure
from .planner import PlannerInput, plan, recheck, success_lower_bound, competitor_bound
from .recovery import ApproxGeneratingSet, recover_basis, dual_basis_from_approx

__all__ = [
    "ApproxGeneratingSet", "BoxInfrastructure", "BudgetError", "CapabilityError", "CheckFailure", "ConfigError",
    "GridSpec", "InfraError", "Lattice", "PlannerInput", "PreconditionError", "competitor_bound", "dual_basis_from_approx",
    "dual_lattice", "hnf", "interval_infrastructure", "kz_reduce", "lll_reduce", "plan", "recheck", "recover_basis",
    "snf", "success_lower_bound", "synth_box_infrastructure",
]
