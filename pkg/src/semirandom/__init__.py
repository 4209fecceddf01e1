"""Semi-random graph process: engine, strategies, bounds, fluid limits,
and post-run certification."""

__version__ = "0.1.0"

from .engine import (  # noqa: F401
    ProcessState, RngConfig, RoundRecord, RunReport, StrategyFault,
    export_edge_log, import_edge_log, new_process, run,
)
from .bounds import (  # noqa: F401
    GAMMA_LOWER_SWITCH, GAMMA_UPPER_SWITCH, OfflineProfile, RegimeBounds,
    RegimeError, alpha_bounds, chernoff_tail, clique_coefficients,
    large_t_bounds, offline_profile, poisson_pmf, regime_auto, small_t_bounds,
    solve_xi, very_large_t_bounds,
)
from .strategies import (  # noqa: F401
    CirculantCliqueStrategy, CliqueCertificate, ConstantStrategy,
    GrowingCliqueStrategy, MinDegreeStrategy, PartitionCertificate,
    PartitionCliqueStrategy, Strategy, make_strategy, offline_circles,
    offline_place, roundrobin_clique_strategy,
)
from .ode import PhaseSolution, integrate_phases, online_alpha_lower  # noqa: F401
from .metrics import (  # noqa: F401
    ColoringReport, DestroyReport, MetricsReport, RarePairReport, SimpleView,
    caro_wei, compute_metrics, count_rare_pairs, degeneracy_and_coloring,
    destroy_rare_pairs, exact_alpha, exact_omega, max_squares, simple_view,
    simple_view_from_edges, verify_clique,
)
