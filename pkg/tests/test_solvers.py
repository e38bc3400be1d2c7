import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from amprox import solvers
from amprox.errors import ConfigError, DomainError, IterationError
from amprox.framework import StoppingRule
from amprox.model import ProblemInstance

from conftest import normalized

HALF = np.array([[0.5], [0.5]])
Y13 = np.array([1.0, 3.0])
ONE = np.array([1.0])

# one-step values on the two-row, one-column instance, from f'(x) = 0 by hand
ONE_STEP = {
    "smart": 2 * math.sqrt(3),
    "emml": 4.0,
    "hellinger": 2 + math.sqrt(3),
    "pearson": 2 * math.sqrt(5),
}


@pytest.mark.parametrize("family,value", ONE_STEP.items())
def test_one_column_one_step(family, value):
    assert solvers.STEPS[family](HALF, Y13, ONE)[0] == pytest.approx(value, abs=1e-14)


@pytest.mark.parametrize("family", solvers.STEPS)
def test_consistent_data_is_fixed_point(rng, family):
    P = normalized(rng, 4, 3)
    x = rng.uniform(0.5, 2, 3)
    np.testing.assert_allclose(solvers.STEPS[family](P, P @ x, x), x, rtol=1e-13)


def test_smart_scalar_instance():
    assert solvers.smart_step([[1.0]], [2.0], ONE)[0] == pytest.approx(2.0)


def test_steps_require_normalized_columns():
    with pytest.raises(DomainError):
        solvers.smart_step([[1.0], [1.0]], Y13, ONE)


def test_landweber_examples():
    assert solvers.landweber_step([[1.0]], [2.0], [5.0], 1.0)[0] == pytest.approx(2.0)
    np.testing.assert_allclose(solvers.landweber_step([[1.0, 1.0]], [2.0], [0.0, 0.0], 0.5), [1.0, 1.0])
    with pytest.raises(ConfigError):
        solvers.landweber_step([[1.0, 1.0]], [2.0], [0.0, 0.0], 1.0)


def test_power_method_examples():
    assert solvers.power_method_rho(np.eye(3)).value == pytest.approx(1.0)
    assert solvers.power_method_rho(np.diag([1.0, 4.0])).value == pytest.approx(4.0, rel=1e-10)
    A = np.array([[1.0, 1.0]])
    assert solvers.power_method_rho(A.T @ A).value == pytest.approx(2.0, rel=1e-12)
    est = solvers.power_method_rho(np.diag([1.0, 0.9, 0.5]), iters=2, tol=1e-15)
    assert est.approximate


def test_gradient_and_quadratic_steps():
    np.testing.assert_allclose(solvers.gradient_descent_step(lambda x: x, np.array([3.0]), 1.0), [0.0])
    np.testing.assert_allclose(solvers.gradient_descent_step(lambda x: 0 * x, np.array([3.0]), 1.0), [3.0])
    B = np.array([[2.0, 0.5], [0.5, 1.0]])
    b = np.array([1.0, -1.0])
    x = solvers.quadratic_mm_step(lambda x: B @ x - b, lambda v: np.linalg.solve(B, v), np.array([5.0, 7.0]))
    np.testing.assert_allclose(x, np.linalg.solve(B, b), atol=1e-14)
    g = lambda x: np.array([2 * x[0], x[1]])  # noqa: E731
    x0 = np.array([1.0, 2.0])
    np.testing.assert_allclose(solvers.quadratic_mm_step(g, lambda v: 0.25 * v, x0),
                               solvers.gradient_descent_step(g, x0, 0.25))


def test_quadratic_majorizer_dominates(rng):
    A = rng.normal(size=(4, 3))
    b = rng.normal(size=4)
    f = solvers.objective("landweber", A, b)
    grad = lambda x: 2 * A.T @ (A @ x - b)  # noqa: E731
    mm = solvers.quadratic_majorizer(f, grad, 2 * np.linalg.norm(A, 2) ** 2 * np.eye(3))
    for _ in range(20):
        x, z = rng.normal(size=3), rng.normal(size=3)
        assert mm.g(x, z) >= f(x) - 1e-10
    assert f(mm.step(z)) <= f(z) + 1e-12


def test_euclid_L_examples():
    np.testing.assert_allclose(solvers.euclid_L_step([[1.0, 1.0]], [2.0], [0.0, 0.0]), [1.0, 1.0])
    x = solvers.euclid_L_step([[1.0, 2.0]], [3.0], [0.0, 0.0])
    np.testing.assert_allclose(x, [1.5, 0.75])
    np.testing.assert_allclose(solvers.euclid_L_step([[1.0, 2.0]], [3.0], x), x)


def test_equivalence_transform(rng):
    A = rng.normal(size=(3, 4))
    tf = solvers.landweber_equiv_transform(A)
    assert np.trace(tf.B.T @ tf.B) == pytest.approx(1.0, abs=1e-12)
    x = rng.normal(size=4)
    np.testing.assert_allclose(tf.back(tf.forward(x)), x)
    tf = solvers.landweber_equiv_transform([[1.0, 1.0]])
    np.testing.assert_allclose(tf.beta, [0.5, 0.5])


@pytest.mark.parametrize("family", ["smart", "emml", "hellinger", "pearson"])
def test_solve_one_column_to_optimum(family):
    sol = solvers.solve(ProblemInstance(family, HALF, Y13, ONE))
    assert sol.converged
    assert sol.limit[0] == pytest.approx(ONE_STEP[family], abs=1e-12)


def test_solve_reports_original_coordinates():
    sol = solvers.solve(ProblemInstance("emml", [[1.0], [1.0]], Y13, ONE))
    # P x = (x, x) so the minimizer of KL(y, Px) is x = 2
    assert sol.limit[0] == pytest.approx(2.0, abs=1e-12)


def test_solve_landweber_gamma_validation(rng):
    A = rng.normal(size=(3, 4))
    b = rng.normal(size=3)
    prob = ProblemInstance("landweber", A, b, np.zeros(4))
    with pytest.raises(ConfigError, match=r"2/rho\(A\^T A\)"):
        solvers.solve(prob, solvers.SolverConfig(gamma=100.0))
    sol = solvers.solve(prob, solvers.SolverConfig(rule=StoppingRule(5000, 0.0, 1e-30)))
    assert sol.gamma == pytest.approx(0.5 * solvers.landweber_gamma_bound(A))
    np.testing.assert_allclose(A @ sol.limit, b, atol=1e-8)


def test_solve_consistent_reaches_f_tol(rng):
    P = normalized(rng, 5, 3)
    x = rng.uniform(0.5, 2, 3)
    sol = solvers.solve(ProblemInstance("smart", P, P @ x, np.ones(3)),
                        solvers.SolverConfig(rule=StoppingRule(100000, 1e-14, 0.0)))
    assert sol.converged
    assert sol.trace.final_f < 1e-6


def test_solve_records_named_slacks(rng):
    P = normalized(rng, 4, 3)
    sol = solvers.solve(ProblemInstance("emml", P, rng.uniform(0.5, 2, 4), np.ones(3)),
                        solvers.SolverConfig(rule=StoppingRule(20, 0.0, 0.0)))
    assert sol.trace.slack_names() == ["first_monotonicity", "mass"]
    assert min(r.slacks["first_monotonicity"] for r in sol.trace.records) >= -1e-10


def test_singular_forward_product_surfaces_index():
    P = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.warns(RuntimeWarning):
        prob = ProblemInstance("smart", P, [1.0, 1.0], [1.0, 1.0])
    sol = solvers.solve(prob)
    assert sol.converged
    with pytest.raises(Exception):
        solvers.smart_step(P, [1.0, 1.0], np.array([1.0, 0.0]))
    with pytest.raises(IterationError):
        from amprox.framework import run_af

        run_af(lambda z: solvers.smart_step(P, [1.0, 1.0], z * np.array([1.0, 0.0])),
               lambda x: 0.0, np.ones(2), StoppingRule(3))


def test_step_distance_and_objective_reject_unknown():
    with pytest.raises(ConfigError):
        solvers.objective("nope", HALF, Y13)
    with pytest.raises(ConfigError):
        solvers.step_distance("nope")


pos_mat = arrays(float, (4, 3), elements=st.floats(0.05, 5.0))
pos3 = arrays(float, 3, elements=st.floats(0.05, 5.0))
pos4 = arrays(float, 4, elements=st.floats(0.05, 5.0))


@settings(max_examples=150, deadline=None)
@given(pos_mat, pos4, pos3)
def test_one_step_decreases_objective(P, y, x):
    P = P / P.sum(axis=0)
    for fam, op in solvers.STEPS.items():
        f = solvers.objective(fam, P, y)
        D = solvers.step_distance(fam, P)
        xn = op(P, y, x)
        assert f(x) - f(xn) >= D(x, xn) - 1e-9 * (1 + abs(f(x)))


@settings(max_examples=150, deadline=None)
@given(arrays(float, (3, 4), elements=st.floats(-5, 5)), arrays(float, 3, elements=st.floats(-5, 5)),
       arrays(float, 4, elements=st.floats(-5, 5)))
def test_L_step_descent(A, b, x):
    if np.any((A * A).sum(axis=0) < 1e-3):
        return
    f = solvers.objective("euclid", A, b)
    xn = solvers.euclid_L_step(A, b, x)
    assert f(x) - f(xn) >= solvers.step_distance("euclid", A)(x, xn) - 1e-9 * (1 + f(x))
