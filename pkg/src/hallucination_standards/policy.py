"""Optimal mandates, maximum hallucination standards and the welfare decomposition."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .choice import decision_utilities, logit_probabilities, logsumexp, shares, utility_slopes
from .core import (
    ConsistencyError,
    ConvergenceError,
    CostFamily,
    CostModel,
    DomainError,
    DomainParams,
    Scenario,
    cost_prime,
    cost_second,
)
from .welfare import net_welfare, nw_gradient

ROOT_TOL = 1e-10
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class MandateMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NEWTON = "newton"
    BISECTION = "bisection"


@dataclass(frozen=True)
class MandateSolution:
    h_star: float
    residual: float
    method: MandateMethod
    iterations: int
    clamped: bool


@dataclass(frozen=True)
class StandardOutcome:
    cap: float
    h_bar: np.ndarray
    v_bar: np.ndarray
    s_bar: np.ndarray
    nw_bar: float
    scenario: Scenario


@dataclass(frozen=True)
class DecompositionReport:
    cap: float
    comp_i: float
    comp_ii: float
    comp_iii: float
    delta_nw: float
    avg_h_before: float
    avg_h_after: float

    @property
    def avg_h_decreased(self) -> bool:
        return self.avg_h_after <= self.avg_h_before

    @property
    def components_total(self) -> float:
        return self.comp_i + self.comp_ii + self.comp_iii


@dataclass
class OptimumResult:
    h: np.ndarray
    nw: float
    grad_norm: float
    iterations: int
    converged: bool
    interior: bool
    limits: list[np.ndarray] = field(default_factory=list)


# --- scalar root finding --------------------------------------------------

def bisect(f: Callable[[float], float], lo: float, hi: float, *,
           xtol: float = 1e-15, max_iter: int = 200) -> tuple[float, int]:
    """Root of ``f`` on a sign-change bracket [lo, hi]."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo, 0
    if fhi == 0.0:
        return hi, 0
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol * max(1.0, abs(mid)):
            return mid, it
        fmid = f(mid)
        if fmid == 0.0:
            return mid, it
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    raise ConvergenceError(f"bisection did not converge in {max_iter} iterations")


def safeguarded_newton(f: Callable[[float], float], fprime: Callable[[float], float],
                       lo: float, hi: float, *, xtol: float = 4e-16,
                       max_iter: int = 100) -> tuple[float, int]:
    """Newton's method that falls back to bisection when a step leaves the bracket."""
    flo = f(lo)
    if (flo > 0) == (f(hi) > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    x = 0.5 * (lo + hi)
    for it in range(1, max_iter + 1):
        fx = f(x)
        if fx == 0.0:
            return x, it
        if (fx > 0) == (flo > 0):
            lo = x
        else:
            hi = x
        step = fx / fprime(x)
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= xtol * max(1.0, abs(x)):
            return x_new, it
        x = x_new
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations")


# --- mandates ---------------------------------------------------------------

def closed_form_mandate(model: CostModel, m: float) -> float:
    """Unclamped solution of -c'(H) = m; may fall outside the cost domain."""
    if m <= 0:
        return math.inf
    if model.family is CostFamily.INVERSE:
        return math.sqrt(model.b / m)
    if model.family is CostFamily.LOG:
        return model.b / m
    arg = model.a * model.b / m
    # arg <= 1 means -c' < m for every H > 0
    return math.log(arg) / model.b if arg > 1 else -math.inf


def _corner(model: CostModel, m: float) -> float | None:
    """Boundary optimum when -c'(H) - m has no sign change on the domain."""
    if m <= 0:
        return model.h_hi
    if -cost_prime(model, model.h_lo) - m < 0:
        return model.h_lo
    if -cost_prime(model, model.h_hi) - m > 0:
        return model.h_hi
    return None


def perfect_info_mandate(domain: DomainParams, model: CostModel,
                         method: MandateMethod | str = MandateMethod.CLOSED_FORM,
                         tol: float = ROOT_TOL) -> MandateSolution:
    """Common hallucination level solving -c'(H) = theta/alpha + zeta.

    The closed form is cross-checked against bisection. When the condition has
    no interior root the nearer boundary is returned with ``clamped=True``.
    """
    method = MandateMethod(method)
    m = domain.marginal_social_value
    lo, hi = model.h_lo, model.h_hi

    def gap(h):
        return -cost_prime(model, h) - m

    corner = _corner(model, m)
    if corner is not None:
        return MandateSolution(corner, gap(corner), method, 0, True)

    bis, bis_iters = bisect(gap, lo, hi)
    if method is MandateMethod.BISECTION:
        h_star, iters = bis, bis_iters
    elif method is MandateMethod.NEWTON:
        h_star, iters = safeguarded_newton(gap, lambda h: -cost_second(model, h), lo, hi)
    else:
        h_star, iters = closed_form_mandate(model, m), 0
        h_star = min(max(h_star, lo), hi)
    if abs(h_star - bis) > tol:
        raise ConsistencyError(
            f"{method.value} mandate {h_star!r} disagrees with bisection {bis!r}"
        )
    return MandateSolution(h_star, gap(h_star), method, iters, False)


def _golden_max(phi: Callable[[float], float], lo: float, hi: float,
                xtol: float, max_iter: int) -> tuple[float, int]:
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = phi(x1), phi(x2)
    it = 0
    while b - a > xtol:
        it += 1
        if it > max_iter:
            raise ConvergenceError("golden-section search did not converge")
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = phi(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = phi(x1)
    # compare with the endpoints so boundary optima are not lost
    candidates = [(phi(lo), lo), (phi(0.5 * (a + b)), 0.5 * (a + b)), (phi(hi), hi)]
    return max(candidates)[1], it


def optimal_uniform_mandate(scenario: Scenario, max_iter: int = 200,
                            xtol: float = 1e-7) -> MandateSolution:
    """Maximize net welfare over one hallucination level shared by all products.

    Golden-section search brackets the optimum, then Newton steps on the
    summed analytic gradient polish it.
    """
    model = scenario.cost
    lo, hi = model.h_lo, model.h_hi
    m = scenario.domain.marginal_social_value

    def phi(h):
        return net_welfare(scenario.with_h(h)).nw

    def slope(h):
        return float(np.sum(nw_gradient(scenario.with_h(h))))

    h, iters = _golden_max(phi, lo, hi, xtol, max_iter)
    clamped = False
    while True:
        iters += 1
        if iters > max_iter:
            raise ConvergenceError(
                f"uniform mandate did not converge in {max_iter} iterations"
            )
        g = slope(h)
        if (h <= lo and g < 0) or (h >= hi and g > 0):
            clamped = True
            break
        # along the diagonal the welfare curvature is -c''(H)
        h_new = min(max(h + g / cost_second(model, h), lo), hi)
        if abs(h_new - h) <= 1e-15 * max(1.0, h):
            h = h_new
            break
        h = h_new
    residual = -cost_prime(model, h) - m
    return MandateSolution(h, residual, MandateMethod.NEWTON, iters, clamped)


# --- unconstrained optimum --------------------------------------------------

def _projected(g: np.ndarray, h: np.ndarray, lo: float, hi: float) -> np.ndarray:
    pg = g.copy()
    pg[(h <= lo) & (g < 0)] = 0.0
    pg[(h >= hi) & (g > 0)] = 0.0
    return pg


def _ascent_direction(scenario: Scenario, g: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Quasi-Newton direction on the free coordinates.

    Uses the welfare Hessian at a uniform optimum, -diag(s (c'' + alpha K^2))
    + alpha K^2 s s^T with K = (rho - 1) theta/alpha - zeta, inverted by
    Sherman-Morrison. The matrix is negative definite, so the step ascends.
    """
    d = scenario.domain
    k = (d.rho - 1.0) * d.theta / d.alpha - d.zeta
    ak2 = d.alpha * k * k
    s = shares(scenario)
    w = utility_slopes(scenario)
    h = scenario.h
    avg = float(np.dot(s, h))
    # g_j / s_j without dividing by a possibly underflowed share
    a = -np.asarray(cost_prime(scenario.cost, h)) - d.theta / d.alpha - d.zeta
    r = a + k * w * (h - avg)
    curv = np.asarray(cost_second(scenario.cost, h)) + ak2
    direction = np.where(free, r / curv, 0.0)
    if ak2 > 0:
        sf = np.where(free, s, 0.0)
        denom = 1.0 - ak2 * float(np.sum(sf / curv))
        if denom > 0:
            direction = direction + (sf / curv) * (ak2 * float(np.dot(sf, direction)) / denom)
    return direction


def _ascend(scenario: Scenario, start: np.ndarray, tol: float, max_iter: int,
            step_tol: float = 1e-10) -> tuple[np.ndarray, float, float, int, bool]:
    lo, hi = scenario.cost.h_lo, scenario.cost.h_hi
    h = np.clip(np.asarray(start, dtype=float), lo, hi)
    sc = scenario.with_h(h)
    nw = net_welfare(sc).nw
    for it in range(max_iter + 1):
        g = nw_gradient(sc)
        pg = _projected(g, h, lo, hi)
        gnorm = float(np.max(np.abs(pg)))
        free = pg != 0.0
        newton = _ascent_direction(sc, g, free)
        # small gradients alone can mean a vanishing share, so the step must be small too
        if gnorm < tol and float(np.max(np.abs(newton))) <= step_tol:
            return h, nw, gnorm, it, True
        if it == max_iter:
            break
        moved = False
        slack = 8 * np.finfo(float).eps * max(1.0, abs(nw))
        for direction in (newton, np.where(free, g, 0.0)):
            t = 1.0
            for _ in range(60):
                h_new = np.clip(h + t * direction, lo, hi)
                sc_new = scenario.with_h(h_new)
                nw_new = net_welfare(sc_new).nw
                if nw_new >= nw + 1e-4 * float(np.dot(g, h_new - h)) - slack:
                    moved = not np.array_equal(h_new, h)
                    break
                t *= 0.5
            if moved:
                break
        if not moved:
            break
        h, sc, nw = h_new, sc_new, nw_new
    return h, nw, gnorm, it, gnorm < tol


def unconstrained_optimum(scenario: Scenario, tol: float = 1e-8, max_iter: int = 2000,
                          n_starts: int = 5, seed: int = 0) -> OptimumResult:
    """Maximize net welfare over (H_1..H_L) in the cost-domain box.

    Projected ascent from the scenario's own H plus ``n_starts - 1`` seeded
    random starts. Returns the best limit; ``limits`` lists the distinct ones.
    Raises ConvergenceError (with ``.result`` attached) if the best start did
    not reach a KKT point.
    """
    lo, hi = scenario.cost.h_lo, scenario.cost.h_hi
    rng = np.random.default_rng(seed)
    starts = [scenario.h] + [rng.uniform(lo, hi, scenario.n_products)
                             for _ in range(max(0, n_starts - 1))]
    best = None
    limits: list[np.ndarray] = []
    for start in starts:
        h, nw, gnorm, iters, ok = _ascend(scenario, start, tol, max_iter)
        if not any(np.max(np.abs(h - x)) < 1e-6 for x in limits):
            limits.append(h)
        if best is None or nw > best.nw + 1e-12 * max(1.0, abs(best.nw)):
            best = OptimumResult(h, nw, gnorm, iters, ok,
                                 interior=bool(np.all((h > lo) & (h < hi))))
    best.limits = limits
    if not best.converged:
        err = ConvergenceError(
            f"projected ascent stopped at {best.h.tolist()} with "
            f"gradient norm {best.grad_norm:.3e}"
        )
        err.result = best
        raise err
    return best


# --- maximum hallucination standards -----------------------------------------

def _check_cap(scenario: Scenario, cap: float) -> float:
    cap = float(cap)
    if not scenario.cost.h_lo <= cap <= scenario.cost.h_hi:
        raise DomainError(
            f"cap {cap!r} outside cost domain [{scenario.cost.h_lo}, {scenario.cost.h_hi}]"
        )
    return cap


def apply_standard(scenario: Scenario, cap: float) -> StandardOutcome:
    """Bring every product above ``cap`` down to it; markups stay fixed."""
    cap = _check_cap(scenario, cap)
    h_bar = np.minimum(scenario.h, cap)
    capped = scenario.with_h(h_bar)
    v_bar = decision_utilities(capped)
    return StandardOutcome(
        cap=cap,
        h_bar=h_bar,
        v_bar=v_bar,
        s_bar=logit_probabilities(v_bar),
        nw_bar=net_welfare(capped).nw,
        scenario=capped,
    )


def decompose(scenario: Scenario, cap: float, tol: float = 1e-10) -> DecompositionReport:
    """Split the welfare change from a cap into choice-set value (I),
    misperception wedge (II) and externality (III) components."""
    d = scenario.domain
    out = apply_standard(scenario, cap)
    v = decision_utilities(scenario)
    s = logit_probabilities(v)
    avg_before = float(np.dot(s, scenario.h))
    avg_after = float(np.dot(out.s_bar, out.h_bar))
    diff = avg_after - avg_before

    comp_i = (logsumexp(out.v_bar) - logsumexp(v)) / d.alpha
    comp_ii = (d.rho - 1.0) * (d.theta / d.alpha) * diff
    comp_iii = -d.zeta * diff
    nw_before = net_welfare(scenario).nw
    delta_nw = out.nw_bar - nw_before

    report = DecompositionReport(out.cap, comp_i, comp_ii, comp_iii, delta_nw,
                                 avg_before, avg_after)
    scale = max(1.0, abs(nw_before), abs(out.nw_bar))
    if abs(report.components_total - delta_nw) > tol * scale:
        raise ConsistencyError(
            f"components sum to {report.components_total!r} but delta_nw={delta_nw!r}"
        )
    return report


def sweep_standard(scenario: Scenario, grid: Sequence[float]) -> list[tuple[float, DecompositionReport]]:
    caps = [float(c) for c in grid]
    if not caps:
        raise ValueError("sweep grid is empty")
    if any(b <= a for a, b in zip(caps, caps[1:])):
        raise ValueError("sweep grid must be strictly increasing")
    for c in caps:
        _check_cap(scenario, c)
    return [(c, decompose(scenario, c)) for c in caps]
