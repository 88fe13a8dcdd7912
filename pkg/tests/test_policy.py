import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hallucination_standards.core import (
    ConvergenceError,
    CostModel,
    DomainError,
    DomainParams,
    Product,
    Scenario,
    cost,
    cost_prime,
)
from hallucination_standards.oracle import (
    OracleConfig,
    grid_search_nw,
    grid_step_variation,
    random_scenario,
)
from hallucination_standards.policy import (
    MandateMethod,
    apply_standard,
    bisect,
    closed_form_mandate,
    decompose,
    optimal_uniform_mandate,
    perfect_info_mandate,
    safeguarded_newton,
    sweep_standard,
    unconstrained_optimum,
)
from hallucination_standards.welfare import net_welfare
from conftest import scenarios

DOMAIN_M4 = DomainParams(alpha=1.0, theta=3.0, rho=0.5, zeta=1.0)


# --- root finders -------------------------------------------------------------

def test_bisect_and_newton_on_known_root():
    f = lambda x: x * x - 2.0
    root, _ = bisect(f, 0.0, 2.0)
    assert root == pytest.approx(math.sqrt(2), abs=1e-15)
    root, iters = safeguarded_newton(f, lambda x: 2 * x, 0.0, 2.0)
    assert root == pytest.approx(math.sqrt(2), abs=1e-15)
    assert iters < 15
    with pytest.raises(ValueError):
        bisect(f, 2.0, 3.0)


# --- perfect-information mandate ------------------------------------------------

def test_mandate_inverse_example():
    sol = perfect_info_mandate(DOMAIN_M4, CostModel("inverse", 1, 1))
    assert sol.h_star == pytest.approx(0.5, abs=1e-15)
    assert abs(sol.residual) < 1e-10
    assert sol.method is MandateMethod.CLOSED_FORM and not sol.clamped


def test_mandate_log_example():
    sol = perfect_info_mandate(DOMAIN_M4, CostModel("log", 0, 2))
    assert sol.h_star == pytest.approx(0.5, abs=1e-15)


def test_mandate_exp_example():
    # a b / m = 3 so H* = ln 3
    sol = perfect_info_mandate(DomainParams(1.0, 1.0, 0.5, 0.0), CostModel("exp", 3, 1, 0.01, 2.0))
    assert sol.h_star == pytest.approx(1.0986122886681096914, abs=1e-15)


def test_mandate_ignores_awareness():
    model = CostModel("inverse", 1, 1)
    low = perfect_info_mandate(replace(DOMAIN_M4, rho=0.1), model)
    high = perfect_info_mandate(replace(DOMAIN_M4, rho=0.9), model)
    assert low.h_star == high.h_star


@pytest.mark.parametrize("method", list(MandateMethod))
@pytest.mark.parametrize("family", ["inverse", "log", "exp"])
def test_mandate_methods_agree(method, family):
    model = CostModel(family, 2.0, 1.5)
    domain = DomainParams(1.0, 2.0, 0.3, 0.5)
    ref = closed_form_mandate(model, domain.marginal_social_value)
    sol = perfect_info_mandate(domain, model, method=method)
    assert sol.method is method
    assert sol.h_star == pytest.approx(ref, abs=1e-10)
    assert abs(sol.residual) < 1e-10


def test_mandate_corner_no_value_of_reduction():
    sol = perfect_info_mandate(DomainParams(1.0, 0.0, 0.5, 0.0), CostModel("inverse", 1, 1))
    assert sol.h_star == 1.0 and sol.clamped


def test_mandate_corner_exp_without_root():
    # a b / m = 0.5 <= 1: no positive solution, marginal cost never high enough
    sol = perfect_info_mandate(DomainParams(1.0, 4.0, 0.5, 0.0), CostModel("exp", 2, 1))
    assert sol.h_star == 0.01 and sol.clamped


def test_mandate_corner_zero_tolerance_domain():
    # huge marginal damage pushes the optimum below h_lo
    sol = perfect_info_mandate(DomainParams(1.0, 1.0, 0.5, 1e6), CostModel("inverse", 1, 1))
    assert sol.h_star == 0.01 and sol.clamped
    assert sol.residual < 0


@settings(max_examples=200, deadline=None)
@given(family=st.sampled_from(["inverse", "log", "exp"]),
       a=st.floats(0.5, 5), b=st.floats(0.1, 5), m=st.floats(0.05, 50))
def test_mandate_within_domain(family, a, b, m):
    model = CostModel(family, a, b)
    sol = perfect_info_mandate(DomainParams(1.0, m, 1.0, 0.0), model)
    assert model.h_lo <= sol.h_star <= model.h_hi
    if not sol.clamped:
        assert abs(sol.residual) < 1e-10 * max(1.0, m)


# --- uniform mandate -------------------------------------------------------------

def test_uniform_mandate_two_products(two_products):
    sol = optimal_uniform_mandate(two_products)
    assert sol.h_star == pytest.approx(0.5, abs=1e-8)
    assert abs(sol.residual) < 1e-10 and not sol.clamped


def test_uniform_mandate_invariant_to_delta_omega_rho(two_products):
    base = optimal_uniform_mandate(two_products).h_star
    shifted = replace(two_products, products=(
        Product("a", -1.0, 0.9, 0.3), Product("b", 2.5, 0.0, 0.8)))
    assert optimal_uniform_mandate(shifted).h_star == pytest.approx(base, abs=1e-8)
    for rho in (0.0, 0.1, 0.9, 1.0):
        sc = two_products.with_domain(rho=rho)
        assert optimal_uniform_mandate(sc).h_star == pytest.approx(base, abs=1e-8)


def test_uniform_mandate_single_product_matches_closed_form(rng):
    for _ in range(20):
        sc = random_scenario(rng, n_products=1, interior_mandate=True)
        exact = perfect_info_mandate(sc.domain, sc.cost).h_star
        assert optimal_uniform_mandate(sc).h_star == pytest.approx(exact, abs=1e-10)


def test_uniform_mandate_corner(two_products):
    sc = two_products.with_domain(theta=0.0, zeta=0.0)
    sol = optimal_uniform_mandate(sc)
    assert sol.h_star == 1.0 and sol.clamped


def test_uniform_mandate_iteration_budget(two_products):
    with pytest.raises(ConvergenceError):
        optimal_uniform_mandate(two_products, max_iter=5)


# --- unconstrained optimum ---------------------------------------------------------

def test_unconstrained_matches_uniform(rng):
    for _ in range(20):
        sc = random_scenario(rng, interior_mandate=True)
        opt = unconstrained_optimum(sc)
        h_star = perfect_info_mandate(sc.domain, sc.cost).h_star
        assert opt.interior and opt.converged
        np.testing.assert_allclose(opt.h, h_star, atol=1e-6)


def test_unconstrained_start_at_optimum(two_products):
    opt = unconstrained_optimum(two_products.with_h(0.5))
    assert opt.iterations == 0
    np.testing.assert_array_equal(opt.h, [0.5, 0.5])


def test_unconstrained_vs_grid(rng):
    config = OracleConfig(grid_points_per_dim=101)
    for _ in range(10):
        sc = random_scenario(rng, n_products=2)
        opt = unconstrained_optimum(sc)
        h_grid, nw_grid = grid_search_nw(sc, config)
        assert opt.nw >= nw_grid - grid_step_variation(sc, h_grid, config)


def test_unconstrained_reports_nonconvergence(two_products):
    with pytest.raises(ConvergenceError) as err:
        unconstrained_optimum(two_products, max_iter=1, n_starts=1)
    assert err.value.result.grad_norm > 1e-8


@settings(max_examples=60, deadline=None)
@given(sc=scenarios(max_products=5, h_range=(0.01, 1.0)))
def test_uniform_mandate_bounds_all_configurations(sc):
    # NW = sum_l s_l u_l + entropy/alpha <= logsum(alpha u)/alpha, and each u_l
    # peaks at the uniform mandate, so no configuration beats it
    best = net_welfare(sc.with_h(optimal_uniform_mandate(sc).h_star)).nw
    assert net_welfare(sc).nw <= best + 1e-9 * max(1.0, abs(best))


# --- maximum standards ------------------------------------------------------------

def test_nonbinding_cap_changes_nothing(two_products):
    out = apply_standard(two_products, 0.9)
    np.testing.assert_array_equal(out.h_bar, two_products.h)
    assert out.nw_bar == net_welfare(two_products).nw


def test_apply_standard_example(two_products):
    out = apply_standard(two_products, 0.5)
    np.testing.assert_array_equal(out.h_bar, [0.3, 0.5])
    new_price = cost(two_products.cost, out.h_bar[1]) + two_products.products[1].omega
    assert new_price == pytest.approx(3.0 + 0.2, abs=1e-15)
    assert out.s_bar.sum() == pytest.approx(1.0, abs=1e-12)


def test_cap_at_floor_homogenises(two_products):
    out = apply_standard(two_products, 0.01)
    assert np.all(out.h_bar == 0.01)
    gap = (two_products.delta - two_products.omega)
    expected = np.exp(gap - gap.max()) / np.exp(gap - gap.max()).sum()
    np.testing.assert_allclose(out.s_bar, expected, rtol=1e-12)


def test_cap_outside_domain(two_products):
    with pytest.raises(DomainError):
        apply_standard(two_products, 1.5)


def test_decompose_nonbinding_is_zero(two_products):
    rep = decompose(two_products, 0.8)
    assert (rep.comp_i, rep.comp_ii, rep.comp_iii, rep.delta_nw) == (0.0, 0.0, 0.0, 0.0)


def test_decompose_full_awareness(two_products):
    sc = two_products.with_domain(rho=1.0)
    assert decompose(sc, 0.4).comp_ii == 0.0
    sc = sc.with_domain(zeta=0.0)
    rep = decompose(sc, 0.4)
    assert rep.comp_iii == 0.0
    assert rep.delta_nw == pytest.approx(rep.comp_i, abs=1e-12)


def test_binding_cap_cuts_externality(two_products):
    rep = decompose(two_products, 0.5)
    assert rep.avg_h_decreased
    assert rep.comp_iii > 0 and rep.comp_ii > 0


@settings(max_examples=200, deadline=None)
@given(sc=scenarios(h_range=(0.01, 1.0)), u=st.floats(0.0, 1.0))
def test_decomposition_identity_and_signs(sc, u):
    cap = sc.cost.h_lo + u * (sc.cost.h_hi - sc.cost.h_lo)
    rep = decompose(sc, cap)
    assert rep.components_total == pytest.approx(rep.delta_nw, abs=1e-10)
    if rep.avg_h_decreased:
        assert rep.comp_ii >= 0
        assert rep.comp_iii >= 0


def test_sweep_shapes(two_products):
    (cap, rep), = sweep_standard(two_products, [0.9])
    assert cap == 0.9 and rep.delta_nw == 0.0
    grid = list(np.linspace(0.1, 1.0, 10))
    assert [c for c, _ in sweep_standard(two_products, grid)] == grid
    with pytest.raises(ValueError):
        sweep_standard(two_products, [])
    with pytest.raises(ValueError):
        sweep_standard(two_products, [0.5, 0.5])
    with pytest.raises(DomainError):
        sweep_standard(two_products, [0.5, 2.0])


def test_sweep_peaks_at_mandate(rng):
    for _ in range(20):
        sc = random_scenario(rng, interior_mandate=True)
        h_star = perfect_info_mandate(sc.domain, sc.cost).h_star
        # everyone starts above the mandate, so capping at H* reaches it
        sc = sc.with_h(rng.uniform(h_star, sc.cost.h_hi, sc.n_products))
        grid = sorted(set(np.linspace(sc.cost.h_lo, sc.cost.h_hi, 25).tolist() + [h_star]))
        by_cap = dict(sweep_standard(sc, grid))
        best = by_cap[h_star].delta_nw
        assert all(best >= rep.delta_nw - 1e-12 for rep in by_cap.values())
