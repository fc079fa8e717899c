# test_baselines.py
import numpy as np
import pytest

from src.baselines.matching import cosine_matrix, match_components, zero_leakage, zero_leakage_or_none
from src.baselines.mcr_als import mcr_als_fit, nnls_rows, solve_concentrations
from src.baselines.nmf import nmf_fit, sparse_nmf_fit
from src.evaluation.metrics import r_squared
from src.numerics.rng import Rng
from src.synth.generator import generate_dataset
from src.utils.config import SynthSettings
from src.utils.errors import ArgumentError, MetricUndefinedError


def rank_one(n=20, d=15, seed=0):
    rng = Rng(seed)
    c = rng.uniform(1.0, 5.0, (n, 1))
    s = rng.random((1, d)) * (rng.random((1, d)) > 0.3)
    s[0, 0] = 1.0
    return c @ s, s


def test_nmf_rank_one_exact():
    X, _ = rank_one()
    pair = nmf_fit(X, 1, 500, Rng(1))
    error = np.linalg.norm(X - pair.reconstruct()) / np.linalg.norm(X)
    assert error <= 1e-6


def test_nmf_objective_non_increasing():
    truth = generate_dataset(SynthSettings(n_true=4, d=40, sparsity_ratio=0.7, dataset_multiple=4,
                                           active_per_sample=(1, 3)))
    pair = nmf_fit(truth.X_noisy, 4, 200, Rng(2))
    trace = np.asarray(pair.loss_trace)
    assert np.all(np.diff(trace) <= 1e-9 * trace[:-1])


def test_nmf_zero_input():
    pair = nmf_fit(np.zeros((6, 5)), 2, 50, Rng(0))
    assert np.allclose(pair.reconstruct(), 0.0)
    assert pair.final_loss == pytest.approx(0.0)


def test_factors_stay_nonnegative():
    X = Rng(3).random((12, 10)) * 10.0
    for pair in (nmf_fit(X, 3, 100, Rng(4)), sparse_nmf_fit(X, 3, 100, Rng(4), alpha=0.5),
                 mcr_als_fit(X, 3, 20, Rng(4))):
        assert np.all(pair.C_hat >= 0)
        assert np.all(pair.S_hat >= 0)
        assert pair.rank == 3


def test_sparse_nmf_penalty_shrinks_concentrations():
    X = Rng(5).random((20, 12)) * 10.0
    plain = sparse_nmf_fit(X, 3, 300, Rng(6), alpha=0.0)
    sparse = sparse_nmf_fit(X, 3, 300, Rng(6), alpha=50.0)
    assert sparse.C_hat.sum() < plain.C_hat.sum()
    assert np.allclose(np.linalg.norm(sparse.S_hat, axis=1), 1.0)
    assert sparse.method == "sparse-nmf"


def test_rank_out_of_range():
    with pytest.raises(ArgumentError):
        nmf_fit(np.ones((3, 4)), 4, 10, Rng(0))
    with pytest.raises(ArgumentError):
        mcr_als_fit(-np.ones((3, 4)), 1, 10, Rng(0))


def test_solve_concentrations_with_known_components():
    truth = generate_dataset(SynthSettings(n_true=5, d=60, sparsity_ratio=0.8, dataset_multiple=3,
                                           active_per_sample=(1, 3), snr_db=None))
    C = solve_concentrations(truth.X_clean, truth.S_true)
    error = np.linalg.norm(C - truth.C_true) / np.linalg.norm(truth.C_true)
    assert error <= 1e-6


def test_mcr_als_rank_one_direction():
    X, s = rank_one(seed=7)
    pair = mcr_als_fit(X, 1, 20, Rng(8))
    assert cosine_matrix(pair.S_hat, s)[0, 0] >= 0.9999


def test_mcr_als_zero_input():
    pair = mcr_als_fit(np.zeros((5, 4)), 2, 10, Rng(0))
    assert np.all(pair.C_hat == 0)
    assert np.all(pair.S_hat == 0)
    assert pair.final_loss == 0.0


def test_nnls_rank_deficient_uses_ridge():
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    B = np.array([[2.0], [4.0]])
    x = nnls_rows(A, B)
    assert np.all(x >= 0)
    assert A @ x == pytest.approx(B, abs=1e-4)


def test_zero_leakage_exact_match():
    S = np.array([[0.0, 1.0, 0.0, 2.0], [3.0, 0.0, 0.0, 0.0]])
    assert zero_leakage(S, S) == 0.0
    assert zero_leakage(S[::-1], S) == 0.0


def test_zero_leakage_mean_over_true_zeros():
    S_true = np.zeros((1, 12))
    S_true[0, :2] = [1.0, 2.0]
    S_hat = S_true.copy()
    S_hat[0, 5] += 0.001
    assert zero_leakage(S_hat, S_true) == pytest.approx(0.0001, rel=1e-12)


def test_zero_leakage_undefined_without_matches():
    S_true = np.array([[0.0, 1.0, 0.0]])
    with pytest.raises(MetricUndefinedError):
        zero_leakage(np.zeros((0, 3)), S_true)
    assert zero_leakage_or_none(np.zeros((0, 3)), S_true) is None
    assert zero_leakage_or_none(S_true, S_true) == 0.0


def test_zero_leakage_undefined_without_true_zeros():
    S_true = np.ones((2, 3))
    with pytest.raises(MetricUndefinedError):
        zero_leakage(S_true, S_true)


def test_match_components_permutation():
    S = np.eye(3)
    rows, cols = match_components(S[[2, 0, 1]], S)
    assert dict(zip(rows.tolist(), cols.tolist())) == {0: 2, 1: 0, 2: 1}


@pytest.mark.slow
def test_baselines_reach_high_r2_noise_free():
    truth = generate_dataset(SynthSettings(n_true=8, d=128, sparsity_ratio=0.95, dataset_multiple=8,
                                           snr_db=None, seed=3))
    X = truth.X_clean
    assert r_squared(X, nmf_fit(X, 8, 2000, Rng(1)).reconstruct()) >= 0.99
    assert r_squared(X, mcr_als_fit(X, 8, 2000, Rng(1), tol=1e-12).reconstruct()) >= 0.99


@pytest.mark.slow
def test_baselines_leak_into_true_zeros():
    truth = generate_dataset(SynthSettings(n_true=8, d=128, dataset_multiple=8, snr_db=30.0, seed=4))
    assert zero_leakage(nmf_fit(truth.X_noisy, 8, 2000, Rng(1)).S_hat, truth.S_true) > 0
    assert zero_leakage(mcr_als_fit(truth.X_noisy, 8, 200, Rng(1)).S_hat, truth.S_true) > 0
