import numpy as np
import pytest

from mateq import (
    LowRankFactorPair,
    SymLowRankFactor,
    TruncationRule,
    compress,
    compress_sym,
    psd_project,
)

from conftest import rng_for


def test_rule_validation():
    with pytest.raises(ValueError):
        TruncationRule(0.0)
    with pytest.raises(ValueError):
        TruncationRule(1e-8, "operator")


def test_pair_requires_equal_widths():
    with pytest.raises(ValueError):
        LowRankFactorPair(np.ones((4, 2)), np.ones((4, 3)))


def test_compress_duplicate_columns_to_rank_one():
    u = np.zeros((6, 1)); u[1] = 1.0
    v = np.zeros((6, 1)); v[3] = 1.0
    pair = LowRankFactorPair(np.hstack([u, u]), np.hstack([v, v]))
    out = compress(pair, TruncationRule(1e-12, "spectral"))
    assert out.rank == 1
    assert np.linalg.norm(out.to_dense() - 2 * u @ v.T) <= 1e-13


def test_compress_drops_below_spectral_tolerance():
    delta = 1e-8
    C = np.zeros((5, 2)); C[0, 0] = 1.0; C[1, 1] = delta / 10
    D = np.zeros((5, 2)); D[0, 0] = 1.0; D[1, 1] = 1.0
    out = compress(LowRankFactorPair(C, D), TruncationRule(delta, "spectral"))
    assert out.rank == 1
    ref = np.zeros((5, 5)); ref[0, 0] = 1.0
    assert np.allclose(out.to_dense(), ref)


def test_compress_recovers_true_rank():
    rng = rng_for(1)
    n, r, p = 40, 6, 12
    base_c = rng.standard_normal((n, r))
    base_d = rng.standard_normal((n, r))
    mix = rng.standard_normal((r, p))
    pair = LowRankFactorPair(base_c @ mix, base_d @ np.linalg.pinv(mix).T)
    out = compress(pair, TruncationRule(1e-8, "spectral"))
    assert out.rank == r
    # dense SVD oracle for the spectral truncation error
    err = np.linalg.norm(pair.to_dense() - out.to_dense(), 2)
    assert err <= 1e-8


def test_compress_zero_rank_when_product_below_tolerance():
    rng = rng_for(2)
    pair = LowRankFactorPair(1e-12 * rng.standard_normal((8, 2)),
                             1e-12 * rng.standard_normal((8, 2)))
    out = compress(pair, TruncationRule(1e-6, "spectral"))
    assert out.rank == 0
    assert out.to_dense().shape == (8, 8)


def test_compress_idempotent():
    rng = rng_for(3)
    pair = LowRankFactorPair(rng.standard_normal((20, 5)), rng.standard_normal((20, 5)))
    rule = TruncationRule(1e-3, "frobenius")
    once = compress(pair, rule)
    twice = compress(once, rule)
    assert twice.rank == once.rank
    assert np.linalg.norm(twice.to_dense() - once.to_dense()) <= 1e-13 * max(
        np.linalg.norm(once.to_dense()), 1e-30)


def test_compress_sym_swap_eigenvalues():
    rng = rng_for(4)
    Q, _ = np.linalg.qr(rng.standard_normal((7, 2)))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = compress_sym(SymLowRankFactor(Q, swap), TruncationRule(1e-12, "spectral"))
    assert np.allclose(np.sort(np.diagonal(out.S)), [-1.0, 1.0])
    assert np.linalg.norm(out.to_dense() - Q @ swap @ Q.T) <= 1e-13


def test_compress_sym_identity_passthrough():
    rng = rng_for(5)
    Q, _ = np.linalg.qr(rng.standard_normal((9, 3)))
    out = compress_sym(SymLowRankFactor(Q, np.eye(3)), TruncationRule(1e-12, "spectral"))
    assert out.rank == 3
    assert np.linalg.norm(out.to_dense() - Q @ Q.T) <= 1e-13


def test_compress_sym_error_bound_indefinite():
    rng = rng_for(6)
    C = rng.standard_normal((50, 10))
    S = rng.standard_normal((10, 10))
    S = 0.5 * (S + S.T)
    fac = SymLowRankFactor(C, S)
    out = compress_sym(fac, TruncationRule(1e-10, "spectral"))
    # dense eigendecomposition oracle
    err = np.linalg.norm(fac.to_dense() - out.to_dense(), 2)
    assert err <= 1e-10
    assert np.allclose(out.S, np.diag(np.diagonal(out.S)))
    assert np.linalg.norm(out.C.T @ out.C - np.eye(out.rank)) <= 1e-12 * out.rank


def test_compress_sym_rejects_asymmetric_middle():
    with pytest.raises(ValueError):
        SymLowRankFactor(np.ones((4, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_project_sign_split():
    fac = SymLowRankFactor(np.eye(2), np.diag([1.0, -1.0]))
    out = psd_project(fac)
    assert np.allclose(out.to_dense(), np.diag([1.0, 0.0]))


def test_psd_project_fixed_point_on_spsd():
    rng = rng_for(7)
    B = rng.standard_normal((10, 4))
    fac = SymLowRankFactor(B, np.eye(4))
    out = psd_project(fac)
    assert np.linalg.norm(out.to_dense() - fac.to_dense()) <= 1e-12 * np.linalg.norm(fac.to_dense())


def test_psd_project_distance_is_most_negative_eigenvalue():
    rng = rng_for(8)
    M = rng.standard_normal((12, 12))
    M = 0.5 * (M + M.T)
    fac = SymLowRankFactor(np.eye(12), M)
    out = psd_project(fac)
    lam_min = np.linalg.eigvalsh(M).min()
    assert lam_min < 0
    dist = np.linalg.norm(M - out.to_dense(), 2)
    assert abs(dist - abs(lam_min)) <= 1e-12 * abs(lam_min)
