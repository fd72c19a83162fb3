"""Extended max Russell graph measure over technologies with production trade-offs."""

from maxrgm.core import Dataset, Dmu, IndexSets, Rts, Technology, TradeoffColumn, TradeoffSpec, index_sets, validate_dataset
from maxrgm.diagnostics import DiagnosticsReport, facet_positivity_check, free_lunch_check, strong_efficient_set, tradeoff_consistency
from maxrgm.lp import LinearProgram, LpOutcome, SolverSettings, solve
from maxrgm.measures import FglResult, FglVariant, MaxRgmResult, Side, fgl, max_rgm, normalized_score, psi
from maxrgm.pps import additive_inefficiency, max_output_expansion, membership, min_input_contraction

__all__ = [
    "Dataset",
    "Dmu",
    "IndexSets",
    "Rts",
    "Technology",
    "TradeoffColumn",
    "TradeoffSpec",
    "index_sets",
    "validate_dataset",
    "DiagnosticsReport",
    "facet_positivity_check",
    "free_lunch_check",
    "strong_efficient_set",
    "tradeoff_consistency",
    "LinearProgram",
    "LpOutcome",
    "SolverSettings",
    "solve",
    "FglResult",
    "FglVariant",
    "MaxRgmResult",
    "Side",
    "fgl",
    "max_rgm",
    "normalized_score",
    "psi",
    "additive_inefficiency",
    "max_output_expansion",
    "membership",
    "min_input_contraction",
]
