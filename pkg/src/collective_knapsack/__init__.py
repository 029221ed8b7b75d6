"""Collective knapsack: aggregating noisy group evaluations for budgeted project selection."""

from .aggregation import METHOD_NAMES, AggregationMethod, aggregate, collective_instance
from .analytic import QuadratureSpec, TwoProjectScenario, beta_equiv, beta_opt, performance_two
from .knapsack import KnapsackInstance, KnapsackTooLarge, Selection, brute_force, solve
from .model import CostStructure, ProjectSet, build_panel, make_costs
from .simulator import PerformanceEstimate, ScenarioConfig, estimate_performance, run_replica, sweep

__version__ = "0.1.0"

__all__ = [
    "METHOD_NAMES",
    "AggregationMethod",
    "CostStructure",
    "KnapsackInstance",
    "KnapsackTooLarge",
    "PerformanceEstimate",
    "ProjectSet",
    "QuadratureSpec",
    "ScenarioConfig",
    "Selection",
    "TwoProjectScenario",
    "aggregate",
    "beta_equiv",
    "beta_opt",
    "brute_force",
    "build_panel",
    "collective_instance",
    "estimate_performance",
    "make_costs",
    "performance_two",
    "run_replica",
    "solve",
    "sweep",
]
