"""Simplification of mixed Boolean-arithmetic expressions.

The linear core reduces any MBA that is equivalent to a linear one via its
result vector on 0/1 assignments; the general pipeline layers refinement,
factorization, and substitution on top to handle polynomial and mixed
expressions.  See the README for the CLI and dataset format.
"""

from .boolfunc import CapacityError, TruthTable, bitwise_refine, quine_mccluskey
from .config import DEFAULT_CONFIG, SimplifyConfig
from .expr import (
    Classification,
    Expr,
    Metric,
    ParseError,
    classify,
    evaluate,
    metric_value,
    parse,
    to_string,
)
from .linear import (
    LinearCombination,
    ResultVector,
    conjunction_basis,
    decompose_two_terms,
    decompose_with_negations,
    partition_by_variables,
    result_vector,
    simplify_linear,
)
from .pipeline import (
    SubstitutionMap,
    collect_substitution_candidates,
    factorize,
    polish,
    refine,
    simplify_general,
    simplify_general_ex,
    substitute_and_simplify,
)
from .verify import Outcome, OutcomeClass, check, random_equivalence

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "Classification",
    "DEFAULT_CONFIG",
    "Expr",
    "LinearCombination",
    "Metric",
    "Outcome",
    "OutcomeClass",
    "ParseError",
    "ResultVector",
    "SimplifyConfig",
    "SubstitutionMap",
    "TruthTable",
    "bitwise_refine",
    "check",
    "classify",
    "collect_substitution_candidates",
    "conjunction_basis",
    "decompose_two_terms",
    "decompose_with_negations",
    "evaluate",
    "factorize",
    "metric_value",
    "parse",
    "partition_by_variables",
    "polish",
    "quine_mccluskey",
    "random_equivalence",
    "refine",
    "result_vector",
    "simplify_general",
    "simplify_general_ex",
    "simplify_linear",
    "substitute_and_simplify",
    "to_string",
]
