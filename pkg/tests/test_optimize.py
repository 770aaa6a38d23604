import numpy as np
import pytest

from nngp.optimize import CGResult, minimize_cg


def quad(A, b):
    def fun(x):
        return 0.5 * x @ A @ x - b @ x

    def grad(x):
        return A @ x - b

    return fun, grad


def test_quadratic_converges_to_solution():
    A = np.array([[3.0, 0.5, 0.0],
                  [0.5, 2.0, 0.3],
                  [0.0, 0.3, 1.0]])
    b = np.array([1.0, -2.0, 0.5])
    fun, grad = quad(A, b)
    res = minimize_cg(fun, grad, np.zeros(3), max_evals=200, gtol=1e-8)
    xstar = np.linalg.solve(A, b)
    assert res.converged
    assert res.n_evals < 50
    assert np.max(np.abs(res.x - xstar)) < 1e-6
    assert res.fun == pytest.approx(fun(xstar), abs=1e-10)


def test_already_at_minimum():
    fun, grad = quad(np.eye(2), np.zeros(2))
    res = minimize_cg(fun, grad, np.zeros(2), gtol=1e-8)
    assert res.converged
    assert res.n_evals == 1
    assert res.fun == 0.0


def test_budget_is_a_hard_cap():
    calls = []

    def fun(x):
        calls.append(np.array(x))
        return float(np.sum((x - 3.0) ** 4) + np.sum(x ** 2))

    def grad(x):
        return 4 * (x - 3.0) ** 3 + 2 * x

    res = minimize_cg(fun, grad, np.zeros(4), max_evals=7)
    assert len(calls) == 7
    assert res.n_evals == 7
    assert not res.converged


def test_returns_best_evaluated_point():
    evals = []

    def fun(x):
        f = float(np.sum(x ** 2))
        evals.append(f)
        return f

    def grad(x):
        return 2 * np.asarray(x)

    res = minimize_cg(fun, grad, np.full(3, 2.0), max_evals=30, gtol=1e-12)
    assert res.fun == min(evals)
    assert res.fun == pytest.approx(float(np.sum(res.x ** 2)))


def test_deterministic_runs_are_bit_identical():
    def rosen(x):
        return float(100 * (x[1] - x[0] ** 2) ** 2 + (1 - x[0]) ** 2)

    def rosen_grad(x):
        return np.array([
            -400 * x[0] * (x[1] - x[0] ** 2) - 2 * (1 - x[0]),
            200 * (x[1] - x[0] ** 2)])

    a = minimize_cg(rosen, rosen_grad, np.array([-1.2, 1.0]), max_evals=150)
    b = minimize_cg(rosen, rosen_grad, np.array([-1.2, 1.0]), max_evals=150)
    assert a.fun == b.fun
    assert np.array_equal(a.x, b.x)
    assert a.n_evals == b.n_evals and a.n_iters == b.n_iters
    assert a.fun < 1e-6    # the classic banana is solvable in this budget


def test_rosenbrock_harder_start():
    def rosen(x):
        return float(sum(100 * (x[i + 1] - x[i] ** 2) ** 2 + (1 - x[i]) ** 2
                         for i in range(len(x) - 1)))

    def rosen_grad(x):
        g = np.zeros_like(x)
        g[:-1] = -400 * x[:-1] * (x[1:] - x[:-1] ** 2) - 2 * (1 - x[:-1])
        g[1:] += 200 * (x[1:] - x[:-1] ** 2)
        return g

    res = minimize_cg(rosen, rosen_grad, np.zeros(4), max_evals=800,
                      gtol=1e-6, max_iters=500)
    assert res.fun < 1e-8
    assert np.max(np.abs(res.x - 1.0)) < 1e-3


def test_directional_derivative_hook():
    A = np.diag([4.0, 1.0, 0.25])
    b = np.array([1.0, 1.0, 1.0])
    fun, grad = quad(A, b)
    grad_calls = []

    def counted_grad(x):
        grad_calls.append(1)
        return grad(x)

    def dgrad(x, p):
        return float(np.dot(grad(x), p))

    with_hook = minimize_cg(fun, counted_grad, np.zeros(3), gtol=1e-8,
                            dgrad=dgrad)
    n_with = len(grad_calls)
    grad_calls.clear()
    without = minimize_cg(fun, counted_grad, np.zeros(3), gtol=1e-8)
    assert with_hook.converged and without.converged
    assert np.max(np.abs(with_hook.x - np.linalg.solve(A, b))) < 1e-6
    # the hook takes over the line-search slope queries, so the full
    # gradient is needed only once per accepted iterate (plus the start)
    assert n_with == with_hook.n_iters + 1
    assert n_with <= len(grad_calls)


def test_budget_smaller_than_one_eval():
    def fun(x):
        return float(np.sum(x ** 2))

    res = minimize_cg(fun, lambda x: 2 * np.asarray(x), np.ones(2),
                      max_evals=0)
    assert isinstance(res, CGResult)
    assert res.fun == np.inf
    assert not res.converged
