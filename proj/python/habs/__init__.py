"""Finite abstractions of hybrid systems with LTL bounded model checking.

The heavy lifting lives in the compiled extension ``habs._habs``; this package
re-exports it and adds small conveniences that decode JSON payloads.
"""

import json as _json

from ._habs import (
    BudgetError,
    FormulaError,
    SingularityError,
    TransitionSystem,
    abstract_model,
    assess_model,
    check_quotient_condition,
    coarsest_bisimulation,
    eval_formula,
    quotient,
    sat_solve,
    simulate_model,
)

__all__ = [
    "BudgetError",
    "FormulaError",
    "SingularityError",
    "TransitionSystem",
    "abstract",
    "abstract_model",
    "assess",
    "assess_model",
    "check_quotient_condition",
    "coarsest_bisimulation",
    "eval_formula",
    "quotient",
    "sat_solve",
    "simulate_model",
]


def assess(model_json, spec, bound=0, include_timing=False):
    """Run the assessment pipeline and return the report as a dict."""
    return _json.loads(assess_model(model_json, spec, bound, include_timing))


def abstract(model_json):
    """Build the composed abstraction and return it as a dict."""
    return _json.loads(abstract_model(model_json))
