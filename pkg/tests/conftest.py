import numpy as np
import pytest
from hypothesis import strategies as st

from hallucination_standards.core import CostFamily, CostModel, DomainParams, Product, Scenario

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def inverse11():
    return CostModel("inverse", 1.0, 1.0)


@pytest.fixture
def two_products(inverse11):
    """alpha=1, theta=3, zeta=1 so theta/alpha + zeta = 4 and H* = 0.5."""
    return Scenario(
        DomainParams(alpha=1.0, theta=3.0, rho=0.5, zeta=1.0),
        inverse11,
        (Product("a", 1.0, 0.1, 0.3), Product("b", 0.0, 0.2, 0.8)),
    )


# --- hypothesis strategies --------------------------------------------------

def _unit(lo, hi):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


@st.composite
def cost_models(draw, family=None):
    fam = CostFamily(family) if family else draw(st.sampled_from(list(CostFamily)))
    if fam is CostFamily.EXP:
        a, b = draw(_unit(0.5, 5.0)), draw(_unit(0.3, 5.0))
    else:
        a, b = draw(_unit(0.0, 3.0)), draw(_unit(0.05, 3.0))
    return CostModel(fam, a, b, 0.01, 1.0)


@st.composite
def domains(draw):
    return DomainParams(draw(_unit(0.2, 4.0)), draw(_unit(0.0, 6.0)),
                        draw(_unit(0.0, 1.0)), draw(_unit(0.0, 4.0)))


@st.composite
def scenarios(draw, max_products=8, h_range=(0.05, 0.95)):
    n = draw(st.integers(1, max_products))
    products = tuple(
        Product(f"p{i}", draw(_unit(-3.0, 3.0)), draw(_unit(0.0, 2.0)), draw(_unit(*h_range)))
        for i in range(n)
    )
    return Scenario(draw(domains()), draw(cost_models()), products)
