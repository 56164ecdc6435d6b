import numpy as np
import pytest

from widthlab.balls import BallIntersection, WidthQuery
from widthlab.norms import LpNorm
from widthlab.oracle import (
    DeskScaleError, OracleBudget, OracleEstimate, SubspaceBasis,
    duality_gap, gelfand_direct, gelfand_estimate, kolmogorov_estimate, radius,
)

def test_budget_rejects():
    with pytest.raises(ValueError):
        OracleBudget(restarts=0)
    assert(OracleBudget().replace(restarts=2).restarts == 2)

def test_subspace_basis():
    rng = np.random.default_rng(0)
    basis = SubspaceBasis.random(5, 2, rng)
    assert((basis.N, basis.n) == (5, 2))
    assert(np.allclose(basis.basis.T @ basis.basis, np.eye(2)))
    assert(SubspaceBasis.from_matrix(np.zeros((4, 0))).basis.shape == (4, 0))
    with pytest.raises(ValueError):
        SubspaceBasis(np.ones((3, 1)))

def test_from_matrix_is_a_function():
    M = np.arange(6.0).reshape(3, 2) + np.eye(3, 2)
    assert(np.array_equal(
        SubspaceBasis.from_matrix(M).basis, SubspaceBasis.from_matrix(M.copy()).basis))

def test_relative_spread():
    assert(OracleEstimate(0.0, 1, True, 0.0, [0.0]).relative_spread == 0)
    assert(OracleEstimate(1.0, 2, False, 0.5, [1.0, 1.5]).relative_spread == pytest.approx(1 / 3))

def test_desk_scale():
    query = WidthQuery(BallIntersection.of(17, (2, 1)), 1, 2)
    with pytest.raises(DeskScaleError):
        gelfand_estimate(query)
    with pytest.raises(DeskScaleError):
        gelfand_direct(query)

def test_full_codimension_is_zero():
    query = WidthQuery(BallIntersection.of(4, (2, 1), ('inf', 0.5)), 4, 3)
    estimate = gelfand_estimate(query)
    assert(estimate.value == 0)
    assert(estimate.restarts_used == 0)

def test_radius_cross_polytope():
    estimate = kolmogorov_estimate(LpNorm(1, 3), LpNorm(2, 3), 0)
    assert(estimate.inner_max_exact)
    assert(estimate.restarts_used == 1)
    assert(estimate.value == pytest.approx(1))
    assert(radius(LpNorm(1, 3, 2), LpNorm(2, 3)) == pytest.approx(2))

@pytest.mark.slow
def test_euclidean_gelfand(small_budget):
    query = WidthQuery(BallIntersection.of(4, (2, 1)), 2, 2)
    assert(gelfand_estimate(query, budget=small_budget).value == pytest.approx(1, rel=1e-6))

@pytest.mark.slow
def test_reproducible(small_budget):
    budget = small_budget.replace(restarts=2, iterations=60)
    first = kolmogorov_estimate(LpNorm(3, 3), LpNorm(2, 3), 1, seed=5, budget=budget)
    second = kolmogorov_estimate(LpNorm(3, 3), LpNorm(2, 3), 1, seed=5, budget=budget)
    assert(first.restart_values == second.restart_values)

@pytest.mark.slow
def test_circle_in_max_norm(small_budget):
    # The best line is a diagonal; the farthest points sit at distance 1/√2.
    budget = small_budget.replace(restarts=2, iterations=80, search_starts=2)
    estimate = kolmogorov_estimate(LpNorm(2, 2), LpNorm('inf', 2), 1, budget=budget)
    assert(estimate.value == pytest.approx(2 ** -0.5, rel=0.05))

@pytest.mark.slow
def test_direct_max_norm(small_budget):
    query = WidthQuery(BallIntersection.of(3, (2, 1)), 0, 'inf')
    estimate = gelfand_direct(query, budget=small_budget)
    assert(estimate.inner_max_exact)
    assert(estimate.value == pytest.approx(1, rel=1e-4))

def test_duality_gap_full_codimension():
    query = WidthQuery(BallIntersection.of(3, (2, 1), (1, 2)), 3, 2)
    assert(duality_gap(query) == 0)

@pytest.mark.slow
def test_duality_gap_euclidean(small_budget):
    query = WidthQuery(BallIntersection.of(2, (2, 1)), 1, 2)
    assert(duality_gap(query, 0, small_budget) < 0.05)

@pytest.mark.slow
def test_estimates_non_increasing_in_n(small_budget):
    set = BallIntersection.of(3, ('3/2', 1))
    values = [
        gelfand_estimate(WidthQuery(set, n, 2), budget=small_budget).value
        for n in range(4)
    ]
    assert(values[-1] == 0)
    # The search is heuristic; allow 2% noise between neighbours.
    for previous, current in zip(values, values[1:]):
        assert(current <= previous * 1.02)
