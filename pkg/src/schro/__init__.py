"""Radial solvers for a pair of linearly and nonlinearly coupled cubic
Schrödinger equations: ground states, weighted spectra, synchronized
branches and their bifurcations, Nehari minimization and continuation.
"""

from .branches import (BifurcationPoint, RegionVerdict, classify_opposite_sign,
                       classify_region, count_bifurcations_in_unit_interval, f_of_beta,
                       find_bifurcation_kappas, sigma_action, solve_algebraic_system,
                       synchronized_minus, synchronized_plus)
from .continuation import (BranchPoint, BranchSegment, Termination, branch_switch,
                           continue_branch, newton_solve, trace_from_bifurcation,
                           verify_cutoff_equivalence)
from .errors import (ConfigurationError, DegenerateComponent, NotProjectable,
                     NumericalFailure, SingularJacobian)
from .ground_state import GroundState, default_grid, solve_ground_state, sup_norm
from .mesh import Profile, RadialGrid, build_grid, h1_norm, inner_h1, integrate, laplacian_apply
from .nehari import NehariState, energy_I, gradient_I, minimize_ground_state, nehari_t
from .spectrum import (EigenPair, MorseIndexReport, coupling_C, eigen_lambda,
                       lambda1_lower_bound, morse_index_on_branch, rayleigh_J)
from .system import Params

__version__ = "0.1.0"
