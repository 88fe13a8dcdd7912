"""Behavioral consumer surplus, net welfare and its gradient in H."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choice import logit_probabilities, logsumexp, share_jacobian, utility_profile
from .core import ConsistencyError, Scenario, cost_prime

CONSISTENCY_TOL = 1e-10
MIN_SHARE = 1e-300


class DegenerateShareError(ZeroDivisionError):
    """A choice share is too small to divide by."""


@dataclass(frozen=True)
class WelfareReport:
    cs: float
    externality: float
    nw: float
    avg_h: float


def consumer_surplus(scenario: Scenario) -> float:
    """Money-metric CS: log-sum of decision utility plus the experienced-utility wedge.

    The constant of integration is dropped; it cancels in every comparison.
    """
    u = utility_profile(scenario)
    s = logit_probabilities(u.v)
    alpha = scenario.domain.alpha
    return (logsumexp(u.v) + float(np.dot(s, u.wedge))) / alpha


def net_welfare(scenario: Scenario, tol: float = CONSISTENCY_TOL) -> WelfareReport:
    """CS minus the misinformation externality zeta * sum_l s_l H_l.

    Also evaluates the expanded form (1/alpha)[logsum + (rho-1) theta avg_h]
    - zeta avg_h and raises ConsistencyError if the two disagree by more
    than ``tol`` (relative to max(1, |nw|)).
    """
    d = scenario.domain
    u = utility_profile(scenario)
    s = logit_probabilities(u.v)
    h = scenario.h
    lse = logsumexp(u.v)
    avg_h = float(np.dot(s, h))

    cs = (lse + float(np.dot(s, u.wedge))) / d.alpha
    externality = d.zeta * avg_h
    nw = cs - externality

    nw_expanded = (lse + (d.rho - 1.0) * d.theta * avg_h) / d.alpha - d.zeta * avg_h
    if abs(nw - nw_expanded) > tol * max(1.0, abs(nw)):
        raise ConsistencyError(
            f"net welfare forms disagree: {nw!r} vs {nw_expanded!r}"
        )
    return WelfareReport(cs=cs, externality=externality, nw=nw, avg_h=avg_h)


def _share_terms(scenario: Scenario):
    u = utility_profile(scenario)
    s = logit_probabilities(u.v)
    jac = share_jacobian(scenario)
    # sum_l ds_l/dH_j * H_l, one entry per j
    cross = jac.T @ scenario.h
    return s, cross


def nw_gradient(scenario: Scenario) -> np.ndarray:
    """Analytic dNW/dH_j with price moving along the cost curve."""
    d = scenario.domain
    s, cross = _share_terms(scenario)
    wtp = d.theta / d.alpha
    neg_cp = -np.asarray(cost_prime(scenario.cost, scenario.h))
    return (
        neg_cp * s
        - wtp * s
        + (d.rho - 1.0) * wtp * cross
        - d.zeta * s
        - d.zeta * cross
    )


def foc_residual(scenario: Scenario, j: int) -> float:
    """Gap in the first-order condition for product ``j``; zero at an optimum.

    Equals nw_gradient[j] / s_j.
    """
    d = scenario.domain
    s, cross = _share_terms(scenario)
    if s[j] < MIN_SHARE:
        raise DegenerateShareError(f"share of product {j} is {s[j]!r}")
    wtp = d.theta / d.alpha
    neg_cp = -float(cost_prime(scenario.cost, scenario.h[j]))
    return neg_cp - wtp - d.zeta - cross[j] / s[j] * (d.zeta - (d.rho - 1.0) * wtp)


def foc_residuals(scenario: Scenario) -> np.ndarray:
    return np.array([foc_residual(scenario, j) for j in range(scenario.n_products)])
