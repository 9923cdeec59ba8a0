"""Orthogonal-array hyperparameter tuning.

Plan a small balanced set of trials from a factor-level table, run them
against a black-box objective, and use range analysis to compose the best
level of every factor.
"""
from .analysis import (
    RangeAnalysisReport,
    analyze,
    analyze_values,
    parse_report,
    predicted_vs_confirmed,
    range_analysis,
    render_report,
)
from .arrays import (
    OrthogonalArray,
    catalog,
    catalog_lookup,
    construct_oa,
    full_factorial,
    verify_oa,
)
from .baselines import ComparisonReport, ComparisonRow, compare, grid_search, random_search
from .design import (
    FactorLevelTable,
    FactorSpec,
    TrialPlan,
    load_config,
    load_table,
    make_plan,
    savings_fraction,
)
from .gf import build_field
from .runner import CommandObjective, TrialLog, TrialRecord, resume_plan, run_plan, run_single
from .synth import SyntheticObjective, SyntheticSpec, eval_synthetic, fit_to_table4

__version__ = "0.1.0"
