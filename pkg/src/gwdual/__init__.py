"""Rank-dependent Galton-Watson systems and their pathwise Siegmund duals."""

from .core import (
    DEFAULT_WIDTH,
    TRUNC,
    TRUNCATED,
    GwdualError,
    InvalidOffspring,
    MappingSystem,
    OffspringOverflow,
    RankOverflow,
    ReproductionGrid,
    ReproductionMapping,
    Trajectory,
    WindowError,
    compose,
    identity_mapping,
    make_mapping,
    simulate_trajectory,
)
from .laws import (
    GwLawTable,
    LawError,
    LinearFractionalParams,
    law_from_config,
    pgf_eval,
    sample,
    sample_grid,
    ve_pgf_compose,
)
from .duality import (
    DualGrid,
    DualMapping,
    block_assemble_dual,
    block_decompose,
    dual_grid,
    dual_mapping,
    twofold_dual,
    verify_siegmund,
    verify_twofold_shift,
)
from .analysis import (
    brute_force_dual_pmf,
    dual_marginal_pmf,
    mc_dual_marginals,
    qhat_recursion,
)
from .embedding import RateSchedule, embedded_lf_grid, kendall_params, simulate_bd
from .forest import (
    build_dual_forest,
    build_primary_forest,
    check_noncrossing,
    export_dot,
    export_svg,
    flip_correspondence,
)

__version__ = "0.1.0"
