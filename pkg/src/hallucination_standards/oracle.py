"""Brute-force validators: finite differences, exhaustive grid search and an
independent recomputation of the welfare decomposition.

Everything here is deliberately naive and shares as little code as possible
with the paths it checks.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, replace

import numpy as np

from .choice import shares
from .core import (
    CostFamily,
    CostModel,
    DomainParams,
    Product,
    Scenario,
    cost,
    cost_prime,
)
from .policy import (
    DecompositionReport,
    closed_form_mandate,
    bisect,
    decompose,
    perfect_info_mandate,
    unconstrained_optimum,
)
from .welfare import consumer_surplus, foc_residuals, net_welfare, nw_gradient

MAX_GRID_DIM = 3


class BoundProximityError(ValueError):
    """A finite-difference stencil would leave the cost domain."""


@dataclass(frozen=True)
class OracleConfig:
    fd_step: float = 1e-5
    grid_points_per_dim: int = 101
    tolerance: float = 1e-6

    def __post_init__(self):
        if not self.fd_step > 0:
            raise ValueError("fd_step must be > 0")
        if self.grid_points_per_dim < 2:
            raise ValueError("grid_points_per_dim must be >= 2")


def relative_error(approx, exact, floor: float = 1e-12) -> float:
    """Norm-wise relative error ||approx - exact||_inf / ||exact||_inf."""
    approx = np.atleast_1d(np.asarray(approx, dtype=float))
    exact = np.atleast_1d(np.asarray(exact, dtype=float))
    return float(np.max(np.abs(approx - exact)) / max(np.max(np.abs(exact)), floor))


def finite_diff_gradient(scenario: Scenario, config: OracleConfig = OracleConfig()) -> np.ndarray:
    """Central-difference gradient of net welfare in H (prices follow c)."""
    eps = config.fd_step
    h = scenario.h
    if np.any(h - eps < scenario.cost.h_lo) or np.any(h + eps > scenario.cost.h_hi):
        raise BoundProximityError(
            f"every H must be at least fd_step={eps} inside the cost domain"
        )
    grad = np.empty_like(h)
    for j in range(h.size):
        up, down = h.copy(), h.copy()
        up[j] += eps
        down[j] -= eps
        grad[j] = (net_welfare(scenario.with_h(up)).nw
                   - net_welfare(scenario.with_h(down)).nw) / (2 * eps)
    return grad


def batch_net_welfare(scenario: Scenario, h_rows: np.ndarray) -> np.ndarray:
    """Net welfare for many H vectors at once, one row per vector.

    Recomputed from the utility definitions rather than through the welfare
    module.
    """
    d = scenario.domain
    h_rows = np.atleast_2d(np.asarray(h_rows, dtype=float))
    price = cost(scenario.cost, h_rows) + scenario.omega
    decision = scenario.delta - d.alpha * price - d.theta * d.rho * h_rows
    experienced = scenario.delta - d.alpha * price - d.theta * h_rows
    top = decision.max(axis=1, keepdims=True)
    weights = np.exp(decision - top)
    total = weights.sum(axis=1, keepdims=True)
    probs = weights / total
    logsum = top[:, 0] + np.log(total[:, 0])
    cs = (logsum + np.sum(probs * (experienced - decision), axis=1)) / d.alpha
    return cs - d.zeta * np.sum(probs * h_rows, axis=1)


def _grid_axis(scenario: Scenario, config: OracleConfig) -> np.ndarray:
    return np.linspace(scenario.cost.h_lo, scenario.cost.h_hi, config.grid_points_per_dim)


def grid_search_nw(scenario: Scenario,
                   config: OracleConfig = OracleConfig()) -> tuple[np.ndarray, float]:
    """Exhaustive search of net welfare over the tensor grid on [h_lo, h_hi]^L."""
    n = scenario.n_products
    if n > MAX_GRID_DIM:
        raise ValueError(f"grid search supports at most {MAX_GRID_DIM} products, got {n}")
    axis = _grid_axis(scenario, config)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    rows = np.stack([m.ravel() for m in mesh], axis=1)
    values = batch_net_welfare(scenario, rows)
    best = int(np.argmax(values))
    return rows[best].copy(), float(values[best])


def grid_step_variation(scenario: Scenario, h: np.ndarray,
                        config: OracleConfig = OracleConfig()) -> float:
    """Largest |NW change| from moving one grid step along any axis (or diagonal)."""
    axis = _grid_axis(scenario, config)
    step = axis[1] - axis[0]
    lo, hi = scenario.cost.h_lo, scenario.cost.h_hi
    moves = [np.array(m) for m in itertools.product((-step, 0.0, step), repeat=h.size)]
    neighbours = np.clip(np.array([h + m for m in moves]), lo, hi)
    values = batch_net_welfare(scenario, neighbours)
    base = batch_net_welfare(scenario, h[np.newaxis, :])[0]
    return float(np.max(np.abs(values - base)))


def _nw_definitional(scenario: Scenario) -> float:
    return consumer_surplus(scenario) - scenario.domain.zeta * float(np.dot(shares(scenario), scenario.h))


def recompute_decomposition(scenario: Scenario, cap: float) -> DecompositionReport:
    """Decomposition report whose ``delta_nw`` is recomputed directly.

    Compare ``components_total`` with ``delta_nw`` to check the components.
    """
    report = decompose(scenario, cap)
    capped = scenario.with_h(np.minimum(scenario.h, float(cap)))
    independent = _nw_definitional(capped) - _nw_definitional(scenario)
    return replace(report, delta_nw=independent)


# --- randomized scenarios and the self-check --------------------------------

def random_cost_model(rng: np.random.Generator, family: CostFamily | str | None = None,
                      h_lo: float = 0.01, h_hi: float = 1.0) -> CostModel:
    fam = CostFamily(family) if family is not None else list(CostFamily)[rng.integers(3)]
    if fam is CostFamily.INVERSE:
        a, b = rng.uniform(0.0, 2.0), rng.uniform(0.05, 1.0)
    elif fam is CostFamily.LOG:
        a, b = rng.uniform(0.0, 2.0), rng.uniform(0.1, 2.0)
    else:
        a, b = rng.uniform(1.0, 5.0), rng.uniform(0.5, 5.0)
    return CostModel(fam, float(a), float(b), h_lo, h_hi)


def random_domain(rng: np.random.Generator) -> DomainParams:
    return DomainParams(
        alpha=float(rng.uniform(0.5, 3.0)),
        theta=float(rng.uniform(0.0, 5.0)),
        rho=float(rng.uniform(0.0, 1.0)),
        zeta=float(rng.uniform(0.0, 3.0)),
    )


def random_scenario(rng: np.random.Generator, n_products: int | None = None,
                    family: CostFamily | str | None = None,
                    interior_mandate: bool = False,
                    h_range: tuple[float, float] = (0.1, 0.9)) -> Scenario:
    """Random valid scenario on the default domain [0.01, 1].

    With ``interior_mandate`` the draw is repeated until the uniform mandate
    lies in [0.05, 0.95].
    """
    n = int(n_products) if n_products is not None else int(rng.integers(1, 11))
    while True:
        model = random_cost_model(rng, family)
        domain = random_domain(rng)
        if not interior_mandate:
            break
        h_star = closed_form_mandate(model, domain.marginal_social_value)
        if 0.05 <= h_star <= 0.95:
            break
    products = tuple(
        Product(f"p{i}", float(rng.uniform(-2.0, 2.0)), float(rng.uniform(0.0, 1.0)),
                float(rng.uniform(*h_range)))
        for i in range(n)
    )
    return Scenario(domain, model, products)


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool
    cases: int
    seconds: float


def _check(name, errors, tolerance, started) -> CheckResult:
    worst = float(max(errors)) if errors else 0.0
    return CheckResult(name, worst, tolerance, worst <= tolerance, len(errors),
                       time.perf_counter() - started)


def run_selfcheck(seed: int = 0, n_cases: int = 25,
                  config: OracleConfig = OracleConfig()) -> list[CheckResult]:
    """Oracle suite on seeded random scenarios; deterministic given ``seed``."""
    rng = np.random.default_rng(seed)
    results = []

    t0 = time.perf_counter()
    errs = []
    for _ in range(n_cases):
        sc = random_scenario(rng, n_products=int(rng.integers(1, 51)))
        errs.append(abs(float(np.sum(shares(sc))) - 1.0))
    results.append(_check("shares_sum_to_one", errs, 1e-12, t0))

    t0 = time.perf_counter()
    errs = []
    for _ in range(n_cases):
        sc = random_scenario(rng)
        errs.append(relative_error(nw_gradient(sc), finite_diff_gradient(sc, config)))
    results.append(_check("gradient_vs_finite_differences", errs, config.tolerance, t0))

    t0 = time.perf_counter()
    errs = []
    for _ in range(n_cases):
        sc = random_scenario(rng, interior_mandate=True)
        sol = perfect_info_mandate(sc.domain, sc.cost)
        errs.append(float(np.max(np.abs(foc_residuals(sc.with_h(sol.h_star))))))
    results.append(_check("foc_residual_at_uniform_mandate", errs, 1e-8, t0))

    t0 = time.perf_counter()
    errs = []
    for _ in range(n_cases):
        model = random_cost_model(rng)
        m = float(rng.uniform(0.1, 10.0))
        h_cf = closed_form_mandate(model, m)
        if not model.h_lo < h_cf < model.h_hi:
            continue
        root, _ = bisect(lambda h: -cost_prime(model, h) - m, model.h_lo, model.h_hi)
        errs.append(abs(h_cf - root))
    results.append(_check("closed_form_vs_bisection", errs, 1e-10, t0))

    t0 = time.perf_counter()
    errs = []
    for _ in range(n_cases):
        sc = random_scenario(rng)
        cap = float(rng.uniform(sc.cost.h_lo, sc.cost.h_hi))
        rep = recompute_decomposition(sc, cap)
        errs.append(abs(rep.components_total - rep.delta_nw))
    results.append(_check("decomposition_vs_direct_delta", errs, 1e-10, t0))

    t0 = time.perf_counter()
    errs = []
    for _ in range(max(1, n_cases // 5)):
        sc = random_scenario(rng, n_products=int(rng.integers(1, 3)), interior_mandate=True)
        opt = unconstrained_optimum(sc)
        h_grid, nw_grid = grid_search_nw(sc, config)
        slack = grid_step_variation(sc, h_grid, config)
        errs.append(max(0.0, nw_grid - slack - opt.nw))
    results.append(_check("optimizer_vs_grid_search", errs, 0.0, t0))
    return results
