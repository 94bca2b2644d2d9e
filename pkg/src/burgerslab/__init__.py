"""burgerslab: a numerical laboratory for the stationary structure, parabolic
dynamics and blow-up behaviour of the generalized Burgers equation

    u_t = u_xx - u u_x + u|u|^(p-1) - lambda u.
"""

from . import barriers, blowup, flow, model, parabolic, stationary, supersolutions, sweep
from .barriers import (
    Certificate,
    certify_bounded_lneg,
    certify_bounded_pge3,
    certify_unbounded_axis_start,
    certify_unbounded_u_axis_start,
    confirm,
)
from .errors import (
    BurgersLabError,
    ConsistencyError,
    ContractError,
    DomainError,
    NumericalError,
    PreconditionError,
    RegimeError,
    TruncationError,
)
from .flow import IntegrationOptions, Trajectory, integrate, mirror, portrait
from .model import EquilibriumInfo, ModelParams, PhasePoint, classify_equilibria, vector_field
from .parabolic import (
    BoundaryCondition,
    BoundarySpec,
    EvolutionResult,
    EvolveOptions,
    Field,
    Grid,
    compare_fields,
    evolve,
)
from .stationary import (
    StationarySolution,
    find_blowup_profile,
    find_halfline,
    find_periodic,
    solve_bvp,
)
from .supersolutions import SuperSolutionSpec, build, evaluate, validate
from .sweep import regime_map

__version__ = "0.1.0"
