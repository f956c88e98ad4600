import itertools
import math

import numpy as np
import pytest

from bilinear_gramian.errors import InputError
from bilinear_gramian.gramian import gramian_vec_solve, linear_gramian_k_step
from bilinear_gramian.networks import (
    FamilyKind,
    NetworkFamily,
    canonical_columns,
    dtc_sweep,
    expand_to_linear,
    line_network,
    replay_expansion,
    selfloop_modulated_system,
    subdiag_modulated_system,
    theorem8_bound,
    theorem8_prefactor,
    tm,
)
from bilinear_gramian.system import BilinearSystem, gramian_exists, random_system, simulate


def test_line_network():
    np.testing.assert_array_equal(line_network(1, 0.3), [[0.3]])
    A = line_network(3, 0.25)
    assert np.abs(np.linalg.eigvals(A)).max() == pytest.approx(0.25 + 0.5 * math.cos(math.pi / 4))
    # tridiagonal spectrum a + 2a cos(k pi / (n + 1))
    expected = sorted(0.25 + 0.5 * math.cos(k * math.pi / 16) for k in range(1, 16))
    np.testing.assert_allclose(np.linalg.eigvalsh(line_network(15, 0.25)), expected, atol=1e-14)
    assert np.abs(expected).max() < 0.75


def test_selfloop_system_layout():
    A = line_network(5, 0.25)
    B = canonical_columns(5, (0, 2))
    sys = selfloop_modulated_system(A, 0.18, B)
    assert sys.m == 3
    assert np.trace(sys.F[0]) == pytest.approx(0.9)
    np.testing.assert_array_equal(sys.B[:, 0], 0.0)
    assert not np.any(sys.F[1]) and not np.any(sys.F[2])
    assert selfloop_modulated_system(A, 0.0, B).is_linear


def test_selfloop_rejects_asymmetric():
    with pytest.raises(InputError):
        selfloop_modulated_system(np.array([[0.1, 0.2], [0.0, 0.1]]), 0.1, np.ones((2, 1)))


@pytest.mark.parametrize("n,m,expected", [(15, 3, 4), (5, 5, 0), (7, 3, 2), (1, 1, 0)])
def test_tm(n, m, expected):
    assert tm(n, m) == expected


def test_selfloop_bound_formula():
    assert theorem8_bound(0.5, 0.0, 4) == pytest.approx(2 * 0.00390625)
    assert theorem8_bound(0.9, 0.0, 4) is None  # 0.9 >= sqrt(3/4)
    assert theorem8_bound(0.5, 0.6, 4) is None  # T_m alpha^2 >= 1
    assert theorem8_bound(0.1, 0.0, 1) is None


def test_prefactor_decreases_with_n():
    m, budget = 3, 0.9
    values = []
    for n in range(10, 200):
        rho = 0.25 + 0.5 * math.cos(math.pi / (n + 1))
        values.append(theorem8_prefactor(rho, budget / n, tm(n, m)))
    # T_m is a step function of n, so compare at the steps
    steps = [values[i] for i in range(0, len(values), 3)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(steps, steps[1:]))
    assert steps[-1] == pytest.approx(1 / (1 - 0.75 ** 2), rel=0.05)


def test_bound_holds_at_n15_first_nodes():
    n = 15
    A = line_network(n, 0.25)
    sys = selfloop_modulated_system(A, 0.9 / n, canonical_columns(n, (0, 5, 10)))
    lam = np.linalg.eigvalsh(gramian_vec_solve(sys).W)[0]
    bound = theorem8_bound(np.abs(np.linalg.eigvalsh(A)).max(), 0.9 / n, tm(n, 3))
    assert bound is not None and lam <= bound + 1e-12


def test_sweep_single_record():
    recs = dtc_sweep(NetworkFamily.example5(), 4, 4)
    assert len(recs) == 1 and recs[0].n == 4


def test_sweep_exhaustive_placement_is_optimal():
    n = 6
    rec = dtc_sweep(NetworkFamily.example5(), n, n)[0]
    A = line_network(n, 0.25)
    best = -1.0
    for P in itertools.combinations(range(n), 3):
        sys = selfloop_modulated_system(A, 0.9 / n, canonical_columns(n, P))
        best = max(best, np.linalg.eigvalsh(gramian_vec_solve(sys).W)[0])
    assert rec.lambda_min_bilinear == pytest.approx(best, rel=1e-9)


def test_sweep_rejects_bad_range():
    with pytest.raises(InputError):
        dtc_sweep(NetworkFamily.example5(), 5, 3)


def test_subdiag_system():
    sys = subdiag_modulated_system(2)
    np.testing.assert_array_equal(sys.F[0], [[0, 0], [1, 0]])
    assert gramian_exists(subdiag_modulated_system(5))[0]
    lam5 = np.linalg.eigvalsh(gramian_vec_solve(subdiag_modulated_system(5)).W)[0]
    lam10 = np.linalg.eigvalsh(gramian_vec_solve(subdiag_modulated_system(10)).W)[0]
    assert 0.5 <= lam10 / lam5 <= 2


def test_expand_linear_system_unchanged(rng):
    sys = BilinearSystem.linear(0.3 * np.eye(3), rng.standard_normal((3, 2)))
    exp = expand_to_linear(sys)
    assert exp.M_F == 0
    np.testing.assert_array_equal(exp.B_ext, sys.B)


def test_expand_single_entry():
    F = np.zeros((4, 4))
    F[2, 0] = 0.7
    exp = expand_to_linear(BilinearSystem(0.2 * np.eye(4), (F,), np.ones((4, 1))))
    assert exp.M_F == 1
    np.testing.assert_array_equal(exp.B_ext[:, 1], np.eye(4)[2])
    assert exp.column_map == [{"input": 0, "row": 2, "col": 0, "weight": 0.7}]


def test_expand_subdiag_n4():
    sys = subdiag_modulated_system(4)
    exp = expand_to_linear(sys)
    assert exp.M_F == 3
    np.testing.assert_array_equal(exp.B_ext[:, 1:], np.eye(4)[:, 1:])
    WK = linear_gramian_k_step(sys.A, exp.B_ext, 4)
    assert np.linalg.matrix_rank(WK) == 4


def test_expansion_replay_matches(rng):
    for _ in range(20):
        sys = random_system(rng, int(rng.integers(2, 6)), int(rng.integers(1, 3)))
        U = rng.uniform(-1, 1, (15, sys.m))
        ref = simulate(sys, U).states
        np.testing.assert_allclose(replay_expansion(expand_to_linear(sys), U), ref, rtol=0,
                                   atol=1e-12 * max(1, np.abs(ref).max()))
