import math

import numpy as np
import pytest

from rowsample.dense_core import svd
from rowsample.errors import InvalidInputError, NumericalFailureError
from rowsample.generate import generate_matrix
from rowsample.regression import (
    exact_least_squares,
    relative_error_factor,
    sampled_least_squares,
    sketch_conditions,
    verify_structural_conditions,
)
from rowsample.row_sampler import (
    RowSampleOperator,
    SamplingDistribution,
    draw_sample_operator,
    leverage_probabilities_exact,
    regression_probabilities_exact,
)
from rowsample.tail_bounds import sample_size_regression


@pytest.fixture(scope="module")
def problem():
    rng = np.random.default_rng(8)
    a = generate_matrix(2000, 5, np.linspace(5, 1, 5), seed=8)
    y = a @ rng.standard_normal(5) + 0.1 * rng.standard_normal(2000)
    return a, y


def test_exact_identity():
    y = np.array([1.0, -2.0, 3.0])
    sol = exact_least_squares(np.eye(3), y)
    np.testing.assert_allclose(sol.x, y)
    assert sol.objective == 0.0 and sol.r_used is None


def test_exact_hand_example():
    sol = exact_least_squares(np.array([[1.0], [1.0]]), np.array([0.0, 2.0]))
    np.testing.assert_allclose(sol.x, [1.0])
    np.testing.assert_allclose(sol.residual, [-1.0, 1.0])
    assert sol.objective == pytest.approx(math.sqrt(2))


def test_exact_orthogonality_and_numpy_agreement(rng):
    a, y = rng.standard_normal((50, 4)), rng.standard_normal(50)
    sol = exact_least_squares(a, y)
    assert np.linalg.norm(a.T @ sol.residual) <= 1e-8 * np.linalg.norm(a, 2) * np.linalg.norm(sol.residual)
    np.testing.assert_allclose(sol.x, np.linalg.lstsq(a, y, rcond=None)[0], rtol=1e-10)
    assert sol.objective == pytest.approx(np.linalg.norm(a @ sol.x - y), rel=1e-10)


def test_exact_optimal_against_perturbations(rng):
    a, y = rng.standard_normal((30, 3)), rng.standard_normal(30)
    sol = exact_least_squares(a, y)
    for _ in range(100):
        eta = rng.standard_normal(3) * rng.uniform(1e-6, 1)
        assert np.linalg.norm(a @ (sol.x + eta) - y) >= sol.objective - 1e-10


def test_exact_rank_deficient_min_norm(rng):
    a = rng.standard_normal((20, 2)) @ rng.standard_normal((2, 4))
    y = rng.standard_normal(20)
    np.testing.assert_allclose(exact_least_squares(a, y).x, np.linalg.pinv(a) @ y, atol=1e-10)


def test_relative_error_factor():
    assert relative_error_factor(0.5) == pytest.approx(1 + 0.5 + 0.5 * math.sqrt(3))


def test_sampled_r_matches_formula(problem):
    a, y = problem
    sol = sampled_least_squares(a, y, 0.5, 0.05, 0)
    assert sol.r_used == math.ceil(8 * 6 / ((1 / 3) * 0.25) * math.log(2 * 6 / 0.05))
    assert sol.r_used == sample_size_regression(5, 1 / 3, 0.5, 0.05).r
    assert sol.objective == pytest.approx(np.linalg.norm(a @ sol.x - y), rel=1e-10)


def test_sampled_zero_residual_exact(rng):
    a = rng.standard_normal((400, 4))
    y = a @ np.array([1.0, 2.0, -1.0, 0.5])
    for seed in range(10):
        assert sampled_least_squares(a, y, 0.5, 0.1, seed).objective <= 1e-8 * np.linalg.norm(y)


def test_sampled_monte_carlo(problem):
    a, y = problem
    opt = exact_least_squares(a, y).objective
    bound = relative_error_factor(0.5) * opt
    ok = sum(sampled_least_squares(a, y, 0.5, 0.05, s).objective <= bound for s in range(200))
    assert ok >= 0.85 * 200


def test_sampled_rank_loss_retries_then_fails():
    a = np.vstack([np.eye(2), np.zeros((5, 2))])
    a[2, 0] = 1e-3
    y = np.ones(7)
    # r=1 can never recover rank 2
    with pytest.raises(NumericalFailureError):
        sampled_least_squares(a, y, 0.5, 0.1, 0, r_override=1)


def test_sampled_input_checks(rng):
    a, y = rng.standard_normal((10, 2)), rng.standard_normal(10)
    with pytest.raises(InvalidInputError):
        sampled_least_squares(a, y, 0.0, 0.1, 0)
    with pytest.raises(InvalidInputError):
        sampled_least_squares(a, y[:5], 0.5, 0.1, 0)


def _full_sample(m):
    dist = SamplingDistribution(p=np.full(m, 1 / m), family="uniform")
    # every row once with unit scale: Q = I
    return RowSampleOperator(indices=np.arange(m), scales=np.ones(m), r=m, seed=0, dist=dist)


def test_structural_identity_sample():
    u = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 6)))[0]
    rep = verify_structural_conditions(u, _full_sample(6), 1e-3)
    assert rep.all_hold
    assert rep.sigma_gap <= 1e-12 and rep.pinv_gap <= 1e-12


def test_structural_tiny_r_fails(rng):
    a = rng.standard_normal((50, 3))
    op = draw_sample_operator(leverage_probabilities_exact(a), 1, 0)
    rep = verify_structural_conditions(a, op, 0.5)
    assert not rep.rank_chain and not rep.all_hold
    assert rep.ranks[0] == 1


def test_structural_monte_carlo(problem):
    a, _ = problem
    dist = leverage_probabilities_exact(a)
    r = math.ceil(4 * 5 / 0.25 * math.log(2 * 5 / 0.1))
    ok = sum(verify_structural_conditions(a, draw_sample_operator(dist, r, s), 0.5).all_hold for s in range(100))
    assert ok >= 90


def test_sufficient_conditions_imply_bound(problem):
    a, y = problem
    opt = exact_least_squares(a, y).objective
    dist = regression_probabilities_exact(a, y)
    u = svd(a).u
    seen = 0
    for seed in range(100):
        op = draw_sample_operator(dist, 600, seed)
        cond = sketch_conditions(a, y, op)
        sol_obj = np.linalg.norm(a @ (np.linalg.pinv(a[op.indices] * op.scales[:, None])
                                      @ (y[op.indices] * op.scales)) - y)
        if cond.hold(0.5):
            seen += 1
            assert sol_obj <= relative_error_factor(0.5) * opt * (1 + 1e-12)
            qu = u[op.indices] * op.scales[:, None]
            sv2 = np.linalg.svd(qu, compute_uv=False) ** 2
            assert np.all((sv2 > 0.5) & (sv2 < 1.5))
    assert seen >= 50
