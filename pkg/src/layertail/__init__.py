"""layertail: upper tail dependence of large degrees in multilayer random graphs.

Simulation side: sample dependent heavy-tailed node weights (Gumbel-copula or
polar multivariate-regular-variation scenarios), build multilayer
inhomogeneous random multigraphs from them, and estimate the upper tail
dependence (UTD) of the per-layer degree sequences over replicated
experiments.  Data side: the same estimator applied to observed directed edge
lists over consecutive periods, with Hill tail-index screening and optional
price-shrinkage correlation.
"""

from .errors import (
    AlignmentError,
    ConvergenceError,
    DegenerateLayerError,
    DegenerateSeriesError,
    EdgeListParseError,
    LayertailError,
    ParameterError,
    ShapeError,
    UndefinedCorrelationError,
    UnsupportedBackendError,
    UnsupportedScenarioError,
)
from .harness import (
    REPORT_HEADER,
    CellResult,
    ExperimentPlan,
    ExperimentReport,
    replication_rng,
    run_plan,
    run_replication,
    write_mse_csv,
    write_report_csv,
    write_scatter_csvs,
)
from .ingestion import (
    DirectedEdgeList,
    PairedDegreeSeries,
    ParseDiagnostic,
    PeriodTailIndex,
    PriceSeries,
    UtdSeriesEntry,
    align_series,
    correlate_series,
    paired_degrees,
    parse_edge_list,
    period_degrees,
    shrinkage_ratio,
    tail_index_report,
    utd_series,
    write_combined_csv,
    write_directed_edge_list,
    write_hill_csv,
    write_utd_series_csv,
)
from .mirg import (
    AliasSampler,
    LayerEdges,
    MultilayerDegrees,
    MultilayerGraph,
    build_fast_identity,
    build_graph,
    build_pairwise,
    degrees,
    write_degree_csv,
    write_edge_list,
    write_weight_csv,
)
from .tailstats import (
    QuantileLevel,
    ReplicationSummary,
    TopCount,
    UtdEstimate,
    empirical_threshold,
    hill_profile,
    hill_tail_index,
    pearson_correlation,
    replication_summary,
    resolve_top_count,
    utd_estimate,
)
from .weights import (
    Bernoulli,
    Beta,
    Constant,
    DependenceScenario,
    GumbelCopula,
    ParetoTail,
    PolarMRV,
    ScaledBeta,
    WeightMatrix,
    gumbel_true_utd,
    mrv_true_utd,
    pareto_quantile,
    parse_scenario,
    sample_gumbel_uniforms,
    sample_weights,
    scenario_label,
    scenario_true_utd,
)

__version__ = "0.1.0"
