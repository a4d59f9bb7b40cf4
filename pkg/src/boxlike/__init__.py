"""L^q-spectra, closed-form branches and dimensions of box-like self-affine measures.

Set ``BOXLIKE_DISABLE_NUMBA=1`` before import to run the pure-numpy kernels.
"""

from ._kernels import BACKEND
from .closed_form import (
    Branch,
    Case,
    ClosedFormResult,
    PhaseTransition,
    Status,
    branch_grid,
    classify_case,
    closed_gamma,
    find_phase_transitions,
    gamma_A,
    gamma_A_prime,
    gamma_B,
    gamma_B_prime,
    gamma_prime_at_1,
)
from .derivative import DerivativeEstimate, gamma_k_prime, hat_big_psi, hausdorff_bounds, limit_gamma_k_prime
from .dimensions import DimensionReport, dimension_report, gamma_samples, legendre_spectrum
from .empirical import (
    MeasureCellCover,
    delta_stopping_cover,
    dyadic_moments,
    estimate_tau,
    moment_submultiplicativity_check,
    render_attractor,
)
from .errors import BoxLikeError, BudgetExceededError, ConsistencyError, InputError
from .ifs import (
    EMPTY_WORD,
    AffineMap,
    BoxLikeIFS,
    Isometry,
    Projection,
    WordData,
    check_rosc,
    compose_isometry,
    extend_word,
    projection_choice,
    word_data,
)
from .pressure import (
    GammaEstimate,
    PressureContext,
    WordAggregate,
    aggregate_words,
    big_psi,
    gamma,
    gamma_k,
    pressure_estimate,
    psi,
)
from .projection import (
    GraphDirectedSystem1D,
    SelfSimilarSystem1D,
    SpectrumFunction,
    adjacency_matrix,
    beta,
    coalesce,
    project_ifs,
    projection_spectra,
    tau_closed,
    tau_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Branch",
    "Case",
    "ClosedFormResult",
    "PhaseTransition",
    "Status",
    "branch_grid",
    "classify_case",
    "closed_gamma",
    "find_phase_transitions",
    "gamma_A",
    "gamma_A_prime",
    "gamma_B",
    "gamma_B_prime",
    "gamma_prime_at_1",
    "DerivativeEstimate",
    "gamma_k_prime",
    "hat_big_psi",
    "hausdorff_bounds",
    "limit_gamma_k_prime",
    "DimensionReport",
    "dimension_report",
    "gamma_samples",
    "legendre_spectrum",
    "MeasureCellCover",
    "delta_stopping_cover",
    "dyadic_moments",
    "estimate_tau",
    "moment_submultiplicativity_check",
    "render_attractor",
    "BoxLikeError",
    "BudgetExceededError",
    "ConsistencyError",
    "InputError",
    "EMPTY_WORD",
    "AffineMap",
    "BoxLikeIFS",
    "Isometry",
    "Projection",
    "WordData",
    "check_rosc",
    "compose_isometry",
    "extend_word",
    "projection_choice",
    "word_data",
    "GammaEstimate",
    "PressureContext",
    "WordAggregate",
    "aggregate_words",
    "big_psi",
    "gamma",
    "gamma_k",
    "pressure_estimate",
    "psi",
    "GraphDirectedSystem1D",
    "SelfSimilarSystem1D",
    "SpectrumFunction",
    "adjacency_matrix",
    "beta",
    "coalesce",
    "project_ifs",
    "projection_spectra",
    "tau_closed",
    "tau_derivative",
    "__version__",
]
