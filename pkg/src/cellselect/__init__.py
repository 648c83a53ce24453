"""Load-aware initial cell search as an optimal-stopping problem.

The library models a user joining a dense directional network: cells
are scanned one at a time, each scan reveals the cell's SNR and, after
admission, its traffic load; connecting ends the search and earns the
session's data volume.  The throughput-optimal policy is a threshold
rule, and the threshold solves a one-dimensional fixed-point equation.

Modules: :mod:`~cellselect.core` (types and sampling primitives),
:mod:`~cellselect.solver` (fixed-point solvers), :mod:`~cellselect.analytic`
(closed forms and distribution laws), :mod:`~cellselect.sim` (Monte Carlo
periods), :mod:`~cellselect.twotier` (two-tier association study), and
:mod:`~cellselect.cli` (scenario files and subcommands).
"""

from .analytic import (
    BinaryMetricModel,
    GeometricLaw,
    StoppedValueCdf,
    binary_optimal_throughput,
    binary_phi,
    expected_period_duration,
    ordinary_value,
    stopped_value_cdf,
    stopping_time_law,
)
from .core import (
    CellObservation,
    ChannelModel,
    LoadModel,
    RngStream,
    SystemParams,
    admission_probability,
    observe_cell,
    sample_beta,
    sample_sib_delay,
    sample_snr,
    sample_sync_delay,
    selection_metric,
)
from .sim import (
    CellBudgetExceeded,
    PeriodOutcome,
    SweepResult,
    estimate_throughput,
    fixed_scan_period,
    sample_trace,
    simulate_period,
    threshold_sweep,
)
from .solver import (
    MetricDistribution,
    StoppingSolution,
    build_distribution,
    optimal_threshold,
    partial_expectation,
    residual,
    sample_reward_distribution,
    solve_bisection,
    solve_iterative,
)
from .twotier import (
    ASSOCIATION_SCHEMES,
    DEFAULT_STRATEGIES,
    AssociationResult,
    BaseStation,
    NoiseParams,
    StrategyResult,
    TwoTierConfig,
    associate,
    compare_schemes,
    link_snr,
    parse_strategy,
)

__version__ = "0.1.0"

__all__ = [
    "ASSOCIATION_SCHEMES",
    "AssociationResult",
    "BaseStation",
    "BinaryMetricModel",
    "CellBudgetExceeded",
    "CellObservation",
    "ChannelModel",
    "DEFAULT_STRATEGIES",
    "GeometricLaw",
    "LoadModel",
    "MetricDistribution",
    "NoiseParams",
    "PeriodOutcome",
    "RngStream",
    "StoppedValueCdf",
    "StoppingSolution",
    "StrategyResult",
    "SweepResult",
    "SystemParams",
    "TwoTierConfig",
    "admission_probability",
    "associate",
    "binary_optimal_throughput",
    "binary_phi",
    "build_distribution",
    "compare_schemes",
    "estimate_throughput",
    "expected_period_duration",
    "fixed_scan_period",
    "link_snr",
    "observe_cell",
    "optimal_threshold",
    "ordinary_value",
    "parse_strategy",
    "partial_expectation",
    "residual",
    "sample_beta",
    "sample_reward_distribution",
    "sample_sib_delay",
    "sample_snr",
    "sample_sync_delay",
    "sample_trace",
    "selection_metric",
    "simulate_period",
    "solve_bisection",
    "solve_iterative",
    "stopped_value_cdf",
    "stopping_time_law",
    "threshold_sweep",
    "__version__",
]
