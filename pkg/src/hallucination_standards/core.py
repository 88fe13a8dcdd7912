"""Domain types, development-cost families and scenario validation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

DEFAULT_H_LO = 0.01
DEFAULT_H_HI = 1.0


class DomainError(ValueError):
    """A hallucination rate lies outside the cost model's domain."""


class ScenarioValidationError(ValueError):
    """Raised with every invariant violation found in a scenario."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConsistencyError(RuntimeError):
    """Two computations that must agree did not (implementation bug)."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations."""


class CostFamily(str, enum.Enum):
    INVERSE = "inverse"
    LOG = "log"
    EXP = "exp"


@dataclass(frozen=True)
class CostModel:
    """Development cost c(H), decreasing and convex on [h_lo, h_hi].

    inverse: a + b/H, log: a - b ln H, exp: a exp(-b H) with a > 0.
    """

    family: CostFamily
    a: float
    b: float
    h_lo: float = DEFAULT_H_LO
    h_hi: float = DEFAULT_H_HI

    def __post_init__(self):
        # accept plain strings for the family
        object.__setattr__(self, "family", CostFamily(self.family))

    def widened(self, h_lo: float, h_hi: float) -> "CostModel":
        return replace(self, h_lo=h_lo, h_hi=h_hi)


@dataclass(frozen=True)
class Product:
    id: str
    delta: float
    omega: float
    h: float


@dataclass(frozen=True)
class DomainParams:
    alpha: float
    theta: float
    rho: float
    zeta: float

    @property
    def wtp(self) -> float:
        """Willingness to pay per unit reduction in hallucination rate."""
        return self.theta / self.alpha

    @property
    def marginal_social_value(self) -> float:
        """theta/alpha + zeta, the right-hand side of the mandate condition."""
        return self.theta / self.alpha + self.zeta


@dataclass(frozen=True)
class Scenario:
    domain: DomainParams
    cost: CostModel
    products: tuple[Product, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "products", tuple(self.products))

    @property
    def n_products(self) -> int:
        return len(self.products)

    @property
    def h(self) -> np.ndarray:
        return np.array([p.h for p in self.products], dtype=float)

    @property
    def delta(self) -> np.ndarray:
        return np.array([p.delta for p in self.products], dtype=float)

    @property
    def omega(self) -> np.ndarray:
        return np.array([p.omega for p in self.products], dtype=float)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.products]

    def with_h(self, h) -> "Scenario":
        """Copy of the scenario with hallucination levels replaced."""
        h = np.broadcast_to(np.asarray(h, dtype=float), (self.n_products,))
        products = tuple(replace(p, h=float(x)) for p, x in zip(self.products, h))
        return replace(self, products=products)

    def with_domain(self, **changes) -> "Scenario":
        return replace(self, domain=replace(self.domain, **changes))


# --- cost functions -------------------------------------------------------

def _check_domain(model: CostModel, h) -> np.ndarray:
    arr = np.asarray(h, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < model.h_lo) or np.any(arr > model.h_hi):
        raise DomainError(
            f"hallucination rate {h!r} outside cost domain "
            f"[{model.h_lo}, {model.h_hi}]"
        )
    return arr


def _scalar_or_array(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def cost(model: CostModel, h):
    """c(h) for a scalar or array of hallucination rates."""
    x = _check_domain(model, h)
    a, b = model.a, model.b
    if model.family is CostFamily.INVERSE:
        out = a + b / x
    elif model.family is CostFamily.LOG:
        out = a - b * np.log(x)
    else:
        out = a * np.exp(-b * x)
    return _scalar_or_array(out)


def cost_prime(model: CostModel, h):
    """Exact c'(h); strictly negative on a valid model."""
    x = _check_domain(model, h)
    a, b = model.a, model.b
    if model.family is CostFamily.INVERSE:
        out = -b / x**2
    elif model.family is CostFamily.LOG:
        out = -b / x
    else:
        out = -a * b * np.exp(-b * x)
    return _scalar_or_array(out)


def cost_second(model: CostModel, h):
    """Exact c''(h); strictly positive on a valid model."""
    x = _check_domain(model, h)
    a, b = model.a, model.b
    if model.family is CostFamily.INVERSE:
        out = 2.0 * b / x**3
    elif model.family is CostFamily.LOG:
        out = b / x**2
    else:
        out = a * b * b * np.exp(-b * x)
    return _scalar_or_array(out)


def price(product: Product, model: CostModel) -> float:
    """Posted price c(H) + omega under the constant-markup assumption."""
    return cost(model, product.h) + product.omega


# --- validation -----------------------------------------------------------

def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def cost_violations(model: CostModel) -> list[str]:
    out = []
    for name in ("a", "b", "h_lo", "h_hi"):
        if not _finite(getattr(model, name)):
            out.append(f"cost.{name} must be a finite number")
    if out:
        return out
    if not model.b > 0:
        out.append("cost.b must be > 0")
    if not model.h_lo > 0:
        out.append("cost.h_lo must be > 0")
    if not model.h_lo < model.h_hi:
        out.append("cost.h_lo must be < cost.h_hi")
    if model.family is CostFamily.EXP and not model.a > 0:
        out.append("cost.a must be > 0 for the exp family")
    return out


def domain_violations(domain: DomainParams) -> list[str]:
    out = []
    for name in ("alpha", "theta", "rho", "zeta"):
        if not _finite(getattr(domain, name)):
            out.append(f"{name} must be a finite number")
    if out:
        return out
    if not domain.alpha > 0:
        out.append("alpha must be > 0")
    if not domain.theta >= 0:
        out.append("theta must be >= 0")
    if not 0 <= domain.rho <= 1:
        out.append("rho must lie in [0,1]")
    if not domain.zeta >= 0:
        out.append("zeta must be >= 0")
    return out


def scenario_violations(raw: Scenario) -> list[str]:
    """Every invariant violation in ``raw``; empty when valid."""
    out = domain_violations(raw.domain) + cost_violations(raw.cost)
    cost_ok = not cost_violations(raw.cost)
    if not raw.products:
        out.append("products must be nonempty")
    seen: dict[str, int] = {}
    for i, p in enumerate(raw.products):
        where = f"products[{i}] (id={p.id!r})"
        if p.id in seen:
            out.append(
                f"{where}: duplicate id {p.id!r} also used by products[{seen[p.id]}]"
            )
        else:
            seen[p.id] = i
        if not _finite(p.delta):
            out.append(f"{where}.delta must be a finite number")
        if not _finite(p.omega) or not p.omega >= 0:
            out.append(f"{where}.omega must be a finite number >= 0")
        if not _finite(p.h):
            out.append(f"{where}.h must be a finite number")
        elif cost_ok and not raw.cost.h_lo <= p.h <= raw.cost.h_hi:
            out.append(
                f"{where}.h={p.h} must lie in [h_lo, h_hi] = "
                f"[{raw.cost.h_lo}, {raw.cost.h_hi}]"
            )
    return out


def validate_scenario(raw: Scenario) -> Scenario:
    """Return ``raw`` unchanged if valid, else raise with all violations."""
    violations = scenario_violations(raw)
    if violations:
        raise ScenarioValidationError(violations)
    return raw
