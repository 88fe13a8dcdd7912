"""Logit market model for capping how often LLM products hallucinate.

A logit demand model over LLM products in which users may under-weight
hallucinations at choice time and hallucinations impose an external
misinformation cost. Submodules:

core     domain types, cost families, validation
choice   utilities, logit shares, share Jacobian
welfare  consumer surplus, net welfare, gradient, first-order conditions
policy   mandates, standards, decomposition, sweeps
oracle   brute-force validators used by tests and ``hallstd selfcheck``
cli      the ``hallstd`` command
"""

from .core import (
    ConsistencyError,
    ConvergenceError,
    CostFamily,
    CostModel,
    DomainError,
    DomainParams,
    Product,
    Scenario,
    ScenarioValidationError,
    cost,
    cost_prime,
    cost_second,
    price,
    validate_scenario,
)
from .choice import (
    UtilityProfile,
    decision_utilities,
    experienced_utilities,
    share_jacobian,
    shares,
)
from .welfare import WelfareReport, consumer_surplus, foc_residual, net_welfare, nw_gradient
from .policy import (
    DecompositionReport,
    MandateMethod,
    MandateSolution,
    StandardOutcome,
    apply_standard,
    decompose,
    optimal_uniform_mandate,
    perfect_info_mandate,
    sweep_standard,
    unconstrained_optimum,
)

__version__ = "0.1.0"
