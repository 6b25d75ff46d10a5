"""Random beta-transformations: invariant densities, counting and the natural extension."""

__version__ = "0.1.0"

from .core import GOLDEN, BetaContext, Region, classify, step_greedy, step_random
from .counting import CountQuery, count_brute, count_dp, count_monte_carlo, growth_estimate
from .density import DensityResult, build_density, mu_S, parry_density, partial_sum, symmetry_defect
from .errors import ConsistencyError, ContractError, DomainError, ResourceError, TruncationError
from .orbit_tree import build_tree
from .simulate import SimConfig, run_orbit
from .stepfn import StepFunction, l1_distance
from .tower import layout, mass_identity, natural_extension_step, psi_step, verify_measure_preservation
from .transfer import TransferConfig, apply_transfer, fixed_point

__all__ = [
    "GOLDEN", "BetaContext", "Region", "classify", "step_greedy", "step_random",
    "CountQuery", "count_brute", "count_dp", "count_monte_carlo", "growth_estimate",
    "DensityResult", "build_density", "mu_S", "parry_density", "partial_sum", "symmetry_defect",
    "ConsistencyError", "ContractError", "DomainError", "ResourceError", "TruncationError",
    "build_tree", "SimConfig", "run_orbit", "StepFunction", "l1_distance",
    "layout", "mass_identity", "natural_extension_step", "psi_step", "verify_measure_preservation",
    "TransferConfig", "apply_transfer", "fixed_point",
]
