"""Logit demand over LLM products: utilities, shares and the share Jacobian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Scenario, cost, cost_prime


@dataclass(frozen=True)
class UtilityProfile:
    """Decision utilities ``v``, experienced utilities ``v_tilde`` and the
    misperception wedge v_tilde - v = (rho - 1) theta H, kept separately so it
    does not lose digits to cancellation."""

    v: np.ndarray
    v_tilde: np.ndarray
    wedge: np.ndarray


def _base_utility(scenario: Scenario) -> np.ndarray:
    d = scenario.domain
    prices = cost(scenario.cost, scenario.h) + scenario.omega
    return scenario.delta - d.alpha * prices


def decision_utilities(scenario: Scenario) -> np.ndarray:
    """Deterministic utility at choice time, hallucination disutility scaled by rho."""
    d = scenario.domain
    return _base_utility(scenario) - d.theta * d.rho * scenario.h


def experienced_utilities(scenario: Scenario) -> np.ndarray:
    d = scenario.domain
    return _base_utility(scenario) - d.theta * scenario.h


def utility_profile(scenario: Scenario) -> UtilityProfile:
    d = scenario.domain
    base = _base_utility(scenario)
    h = scenario.h
    return UtilityProfile(
        v=base - d.theta * d.rho * h,
        v_tilde=base - d.theta * h,
        wedge=(d.rho - 1.0) * d.theta * h,
    )


def logsumexp(v) -> float:
    v = np.asarray(v, dtype=float)
    vmax = np.max(v)
    return float(vmax + np.log(np.sum(np.exp(v - vmax))))


def logit_probabilities(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    e = np.exp(v - np.max(v))
    return e / np.sum(e)


def shares(scenario: Scenario) -> np.ndarray:
    """Logit choice probabilities s_l, ordered like ``scenario.products``."""
    return logit_probabilities(decision_utilities(scenario))


def utility_slopes(scenario: Scenario) -> np.ndarray:
    """dV_j/dH_j = -alpha c'(H_j) - theta rho (price follows the cost curve)."""
    d = scenario.domain
    return -d.alpha * np.asarray(cost_prime(scenario.cost, scenario.h)) - d.theta * d.rho


def share_jacobian(scenario: Scenario) -> np.ndarray:
    """J[l, j] = ds_l/dH_j = s_l (1{l=j} - s_j) w_j."""
    s = shares(scenario)
    w = utility_slopes(scenario)
    return (np.diag(s) - np.outer(s, s)) * w[np.newaxis, :]
