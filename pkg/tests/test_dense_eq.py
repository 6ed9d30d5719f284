import numpy as np
import pytest

from mateq import kron_oracle, solve_lyapunov_ldlt, solve_sylvester_dense
from mateq.errors import DimensionMismatchError, SingularOperatorError

from conftest import rng_for, spd_dense, stable_dense


def test_scalar_case():
    Y = solve_sylvester_dense(np.array([[2.0]]), np.array([[3.0]]), np.array([[5.0]]))
    assert np.allclose(Y, [[-1.0]])


def test_scalar_shift_closed_form():
    rng = rng_for(1)
    for _ in range(100):
        k, l = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        a, b = rng.uniform(0.2, 5.0, size=2)
        F = rng.standard_normal((k, l))
        Y = solve_sylvester_dense(a * np.eye(k), b * np.eye(l), F)
        assert np.allclose(Y, -F / (a + b), atol=1e-13)


def test_sylvester_matches_kron_oracle():
    rng = rng_for(2)
    H = stable_dense(rng, 7)
    G = stable_dense(rng, 5)
    F = rng.standard_normal((7, 5))
    Y = solve_sylvester_dense(H, G, F)
    # the oracle solves A X + X B + RHS = 0 with B = G^T here
    Yo = kron_oracle(H, G.T, F)
    assert np.linalg.norm(Y - Yo) <= 1e-10 * np.linalg.norm(Yo)


def test_sylvester_oracle_equivalence_sweep():
    rng = rng_for(3)
    for _ in range(15):
        k = int(rng.integers(1, 13))
        l = int(rng.integers(1, 13))
        H, G = stable_dense(rng, k), stable_dense(rng, l)
        F = rng.standard_normal((k, l))
        Y = solve_sylvester_dense(H, G, F)
        Yo = kron_oracle(H, G.T, F)
        assert np.linalg.norm(Y - Yo) <= 1e-9 * max(np.linalg.norm(Yo), 1e-30)


def test_sylvester_residual_contract():
    rng = rng_for(4)
    H, G = stable_dense(rng, 9), stable_dense(rng, 6)
    F = rng.standard_normal((9, 6))
    Y = solve_sylvester_dense(H, G, F)
    resid = np.linalg.norm(H @ Y + Y @ G.T + F)
    bound = 1e-10 * (np.linalg.norm(H) + np.linalg.norm(G)) * np.linalg.norm(Y) \
        + 1e-12 * np.linalg.norm(F)
    assert resid <= bound


def test_sylvester_detects_singular_operator():
    H = np.array([[1.0]])
    G = np.array([[-1.0]])  # lambda_H + lambda_G = 0
    with pytest.raises(SingularOperatorError):
        solve_sylvester_dense(H, G, np.array([[1.0]]))


def test_sylvester_shape_check():
    with pytest.raises(DimensionMismatchError):
        solve_sylvester_dense(np.eye(2), np.eye(2), np.ones((3, 2)))


def test_lyapunov_scalar():
    Y = solve_lyapunov_ldlt(np.array([[-1.0]]), np.array([[1.0]]), np.array([[2.0]]))
    assert np.allclose(Y, [[1.0]])


def test_lyapunov_zero_middle():
    rng = rng_for(5)
    H = -spd_dense(rng, 4)
    Y = solve_lyapunov_ldlt(H, rng.standard_normal((4, 2)), np.zeros((2, 2)))
    assert np.allclose(Y, 0.0)


def test_lyapunov_swap_middle_matches_oracle():
    rng = rng_for(6)
    H = -spd_dense(rng, 8)
    Ctil = rng.standard_normal((8, 4))
    S = np.zeros((4, 4))
    S[:2, 2:] = np.eye(2)
    S[2:, :2] = np.eye(2)
    Y = solve_lyapunov_ldlt(H, Ctil, S)
    Yo = kron_oracle(H, H.T, Ctil @ S @ Ctil.T)
    assert np.linalg.norm(Y - Yo) <= 1e-10 * np.linalg.norm(Yo)
    assert np.linalg.norm(Y - Y.T) <= 1e-12 * max(np.linalg.norm(Y), 1e-30)


def test_lyapunov_rejects_asymmetric_middle():
    with pytest.raises(ValueError):
        solve_lyapunov_ldlt(np.array([[-1.0]]), np.ones((1, 2)),
                            np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_kron_identity_pair():
    rng = rng_for(7)
    M = rng.standard_normal((4, 4))
    X = kron_oracle(np.eye(4), np.eye(4), M)
    assert np.allclose(X, -M / 2)


def test_kron_diagonal():
    X = kron_oracle(np.diag([1.0, 2.0]), np.zeros((2, 2)), np.eye(2))
    assert np.allclose(X, np.diag([-1.0, -0.5]))


def test_kron_self_check_by_substitution():
    rng = rng_for(8)
    A, B = stable_dense(rng, 10), stable_dense(rng, 7)
    RHS = rng.standard_normal((10, 7))
    X = kron_oracle(A, B, RHS)
    assert np.linalg.norm(A @ X + X @ B + RHS) <= 1e-11 * np.linalg.norm(RHS)


def test_kron_scale_guard():
    with pytest.raises(ValueError):
        kron_oracle(np.eye(65), np.eye(2), np.ones((65, 2)))


def test_kron_singular():
    with pytest.raises(SingularOperatorError):
        kron_oracle(np.eye(2), -np.eye(2), np.ones((2, 2)))
