"""Stochastic economic dispatch with copula-modeled renewable fleets.

Pipeline: fit per-variable histogram marginals and a Gaussian copula over
synchronized forecast/actual history, generate spatially and temporally
correlated scenarios by Gibbs-style conditional sampling, reduce them, then
solve and evaluate distribution-based and scenario-based real-time dispatch
as linear programs over a DC network.
"""

__version__ = "0.1.0"

from .copula_model import (
    CopulaModel,
    DerivedVariableSpec,
    UnivariateConditional,
    fit_copula,
    line_flow_variable,
    sum_variable,
)
from .data_ingest import (
    HistoricalDataset,
    Plant,
    PlantKind,
    load_historical,
    persistence_forecast,
    with_persistence_forecast,
)
from .dispatch import (
    CostBreakdown,
    CppParams,
    DispatchCase,
    DispatchSolution,
    RecourseResult,
    Side,
    build_distribution_ed,
    build_scenario_ed,
    expected_shortfall_pwl,
    solve_distribution_ed,
    solve_recourse,
    solve_scenario_ed,
)
from .evaluation import CostReport, confidence_table, eval_seed, monte_carlo_evaluate
from .lp_solver import (
    LinearProgram,
    LpBuilder,
    LpSolution,
    LpStatus,
    export_mps,
    parse_mps,
    solve,
)
from .marginals import EmpiricalMarginal, fit_pdh
from .network import Bus, Line, NetworkModel
from .scenario_gen import (
    GibbsConfig,
    ScenarioSet,
    TemporalModel,
    dynamic_generate,
    gibbs_static,
    kantorovich_distance,
    ks_statistic,
    reduce_scenarios,
    tune_range_parameter,
)

__all__ = [
    "Bus",
    "CopulaModel",
    "CostBreakdown",
    "CostReport",
    "CppParams",
    "DerivedVariableSpec",
    "DispatchCase",
    "DispatchSolution",
    "EmpiricalMarginal",
    "GibbsConfig",
    "HistoricalDataset",
    "Line",
    "LinearProgram",
    "LpBuilder",
    "LpSolution",
    "LpStatus",
    "NetworkModel",
    "Plant",
    "PlantKind",
    "RecourseResult",
    "ScenarioSet",
    "Side",
    "TemporalModel",
    "UnivariateConditional",
    "build_distribution_ed",
    "build_scenario_ed",
    "confidence_table",
    "dynamic_generate",
    "eval_seed",
    "expected_shortfall_pwl",
    "export_mps",
    "fit_copula",
    "fit_pdh",
    "gibbs_static",
    "kantorovich_distance",
    "ks_statistic",
    "line_flow_variable",
    "load_historical",
    "monte_carlo_evaluate",
    "parse_mps",
    "persistence_forecast",
    "reduce_scenarios",
    "solve",
    "solve_distribution_ed",
    "solve_recourse",
    "solve_scenario_ed",
    "sum_variable",
    "tune_range_parameter",
    "with_persistence_forecast",
]
