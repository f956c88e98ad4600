import numpy as np
import pytest

from bilinear_gramian.errors import ExistenceError, StabilityError, TruncationError
from bilinear_gramian.gramian import (
    discrete_lyapunov_solve,
    gramian_series,
    gramian_vec_solve,
    linear_gramian,
    linear_gramian_k_step,
    lyapunov_residual,
)
from bilinear_gramian.system import BilinearSystem, random_system

from conftest import fixed_point_gramian

# Reference Gramian of the five-state fixture, 4 decimals
EX3_W = np.array([
    [0.6505, 0.4572, 0.4741, 0.1945, 0.5342],
    [0.4572, 1.2846, -0.4169, -0.1165, -0.3682],
    [0.4741, -0.4169, 6.9412, 1.1619, 4.5490],
    [0.1945, -0.1165, 1.1619, 0.2708, 0.9262],
    [0.5342, -0.3682, 4.5490, 0.9262, 5.2681],
])


def scalar(a, f, b):
    return BilinearSystem([[a]], ([[f]],), [[b]])


def rel_fro(X, Y):
    return np.linalg.norm(X - Y) / np.linalg.norm(Y)


def test_scalar_closed_form():
    res = gramian_vec_solve(scalar(0.5, 0.3, 1.0))
    assert res.W[0, 0] == pytest.approx(1 / 0.66, rel=1e-14)
    assert res.method == "vec_solve" and res.truncation_order is None
    assert res.existence_rho == pytest.approx(0.34)


def test_five_state_matches_printed_matrix(ex3):
    res = gramian_vec_solve(ex3)
    np.testing.assert_allclose(res.W, EX3_W, rtol=0, atol=5e-4)
    assert res.residual <= 1e-10


def test_vec_solve_matches_fixed_point_oracle(ex3, rng):
    assert rel_fro(gramian_vec_solve(ex3).W, fixed_point_gramian(ex3)) <= 1e-10
    for _ in range(5):
        sys = random_system(rng, 4, 2, rho_target=0.7)
        assert rel_fro(gramian_vec_solve(sys).W, fixed_point_gramian(sys)) <= 1e-9


def test_linear_case_reduces_to_lyapunov(rng):
    A = 0.3 * rng.standard_normal((4, 4))
    B = rng.standard_normal((4, 2))
    W = gramian_vec_solve(BilinearSystem.linear(A, B)).W
    np.testing.assert_allclose(A @ W @ A.T - W + B @ B.T, 0.0, atol=1e-12)
    np.testing.assert_allclose(W, linear_gramian(A, B), atol=1e-12)


def test_existence_violation_raises():
    with pytest.raises(ExistenceError) as info:
        gramian_vec_solve(scalar(0.8, 0.7, 1.0))
    assert info.value.rho == pytest.approx(1.13)


def test_lyapunov_solve_trivial_cases():
    np.testing.assert_array_equal(discrete_lyapunov_solve(0.5 * np.eye(2), np.zeros((2, 2))), 0.0)
    assert discrete_lyapunov_solve([[0.6]], [[2.0]])[0, 0] == pytest.approx(2.0 / (1 - 0.36))


def test_lyapunov_solve_residual(rng):
    A = rng.standard_normal((4, 4))
    A *= 0.9 / np.abs(np.linalg.eigvals(A)).max()
    X = rng.standard_normal((4, 4))
    Q = X @ X.T
    S = discrete_lyapunov_solve(A, Q)
    assert np.linalg.norm(A @ S @ A.T - S + Q, 2) <= 1e-11 * max(1, np.linalg.norm(S, 2))
    np.testing.assert_array_equal(S, S.T)


def test_lyapunov_solve_requires_stability():
    with pytest.raises(StabilityError):
        discrete_lyapunov_solve(np.eye(2), np.eye(2))


def test_series_linear_converges_at_order_one(rng):
    A = 0.3 * rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 1))
    res = gramian_series(BilinearSystem.linear(A, B))
    assert res.truncation_order == 1
    np.testing.assert_allclose(res.W, linear_gramian(A, B), atol=1e-13)


def test_series_scalar_geometric():
    a, f = 0.5, 0.3
    res = gramian_series(scalar(a, f, 1.0))
    # partial sums (1/0.75) * sum_i (0.09/0.75)^i
    ratio = f * f / (1 - a * a)
    L = res.truncation_order
    partial = sum(ratio ** i for i in range(L)) / (1 - a * a)
    assert res.W[0, 0] == pytest.approx(partial, rel=1e-14)
    assert res.W[0, 0] == pytest.approx(1 / 0.66, rel=1e-11)


def test_series_matches_vec_solve_five_state(ex3):
    assert rel_fro(gramian_series(ex3).W, gramian_vec_solve(ex3).W) <= 1e-8


def test_series_truncation_error(ex3):
    with pytest.raises(TruncationError) as info:
        gramian_series(ex3, max_order=2, tol=1e-30)
    assert info.value.last_norm > 0


def test_residual_examples():
    sys = scalar(0.5, 0.3, 1.0)
    assert lyapunov_residual(sys, np.array([[1 / 0.66]])) <= 1e-15
    assert lyapunov_residual(sys, np.zeros((1, 1))) == pytest.approx(1.0)


def test_residual_random(rng):
    for _ in range(10):
        sys = random_system(rng, 5, 2)
        assert gramian_vec_solve(sys).residual <= 1e-10


def test_k_step_gramian():
    assert linear_gramian_k_step([[0.5]], [[1.0]], 3)[0, 0] == pytest.approx(1.3125)
    B = np.array([[1.0], [2.0]])
    np.testing.assert_array_equal(linear_gramian_k_step(np.eye(2) * 0.3, B, 1), B @ B.T)


def test_k_step_monotone_and_limit(rng):
    A = rng.standard_normal((3, 3))
    A *= 0.8 / np.abs(np.linalg.eigvals(A)).max()
    B = rng.standard_normal((3, 1))
    prev = linear_gramian_k_step(A, B, 1)
    for K in range(2, 30):
        cur = linear_gramian_k_step(A, B, K)
        assert np.linalg.eigvalsh(cur - prev).min() >= -1e-12
        prev = cur
    np.testing.assert_allclose(linear_gramian_k_step(A, B, 400), linear_gramian(A, B), atol=1e-10)


def test_finite_horizon_energy_exceeds_infinite(rng):
    A = rng.standard_normal((3, 3))
    A *= 0.8 / np.abs(np.linalg.eigvals(A)).max()
    B = rng.standard_normal((3, 2))
    W1 = linear_gramian(A, B)
    for K in (3, 5, 10):
        WK = linear_gramian_k_step(A, B, K)
        for _ in range(5):
            x = rng.standard_normal(3)
            assert x @ np.linalg.solve(WK, x) > x @ np.linalg.solve(W1, x)


def test_psd_and_positive_when_controllable(rng):
    for _ in range(10):
        sys = random_system(rng, 4, 2)
        W = gramian_vec_solve(sys).W
        ev = np.linalg.eigvalsh(W)
        assert ev[0] >= -1e-10 * ev[-1]
        if np.linalg.eigvalsh(linear_gramian(sys.A, sys.B))[0] > 0:
            assert ev[0] > 0


def test_adding_bilinear_term_increases_gramian(rng):
    for _ in range(10):
        sys = random_system(rng, 4, 2, rho_target=0.8)
        partial = BilinearSystem(sys.A, (sys.F[0], np.zeros((4, 4))), sys.B)
        D = gramian_vec_solve(sys).W - gramian_vec_solve(partial).W
        assert np.linalg.eigvalsh(D).min() >= -1e-10 * np.linalg.norm(D, 2)
