"""Critical points of two-component univariate Gaussian mixture likelihoods."""

from .census import (
    CensusOptions,
    CensusReport,
    CriticalPoint,
    Strategy,
    census,
    dedup,
    generate_starts,
    polish,
)
from .em import Constraint, EMOptions, EMTrace, Status, m_step, run_em
from .errors import *  # noqa: F401,F403
from .io import load_sample, parse_sample
from .manyhills import (
    BoxBounds,
    HillsRow,
    box_bounds,
    generate_sample,
    run_manyhills,
    starting_point,
)
from .mixture import (
    Classification,
    MixtureParams,
    Responsibilities,
    Sample,
    canonicalize,
    classify,
    density,
    exponent_spectrum,
    grad_loglik,
    loglik,
    responsibilities,
    trivial_point,
)
from .toy import (
    ToyProblem,
    ToySolveResult,
    critical_residual,
    interior_threshold,
    recover_alpha,
    solve_mu,
    surface_grid,
    toy_loglik,
    unboundedness_trace,
)

__version__ = "0.1.0"
