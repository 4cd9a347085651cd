"""Genetic-programming repair: edits, operators, and the search loop."""
from .edits import Edit, Patch, apply_edits
from .evaluator import CandidateEvaluator, EvalCache
from .operators import NoLocalizableFault, crossover, localize, mutate, select
from .repair import TECHNIQUES, RunRecord, SearchConfig, parse_edits, repair

__all__ = [
    "CandidateEvaluator", "Edit", "EvalCache", "NoLocalizableFault", "Patch",
    "RunRecord", "SearchConfig", "TECHNIQUES", "apply_edits", "crossover",
    "localize", "mutate", "parse_edits", "repair", "select",
]
