"""Tests for constraint learning: ER-SpUD, row matching and the exhaustive oracle."""

import numpy as np
import pytest

from submem_core import (
    ERSpUDConfig,
    InsufficientSamples,
    LearningFailed,
    NoSparseBasis,
    WeightLaw,
    canonicalize_row,
    er_spud,
    exhaustive_sparse_basis,
    generate_B,
    learn_constraints,
    match_rows,
    sample_dataset,
    sample_until_stable,
)
from submem_core.errors import InstanceTooLarge

INT3 = WeightLaw.uniform_integers(3)


def mixed(B, seed):
    D = np.random.default_rng(seed).normal(size=(B.shape[0], B.shape[0]))
    return D @ B


def row_sparsity(B):
    return int(np.count_nonzero(B, axis=1).max())


def private_column_rows(seed):
    """3 x 10 matrix whose rows are the unique sparsest basis of its row space.

    Each row owns three columns with same-sign weights in {1, 2, 3}; the last column is
    shared by all rows with weight +-1. Any combination of two or more rows keeps at
    least six nonzeros, against four per row.
    """
    rng = np.random.default_rng(seed)
    B = np.zeros((3, 10))
    columns = rng.permutation(10)
    for i in range(3):
        B[i, columns[3 * i : 3 * i + 3]] = rng.choice([-1.0, 1.0]) * rng.integers(1, 4, size=3)
    B[:, columns[9]] = rng.choice([-1.0, 1.0], size=3)
    return B


def test_canonicalize_row():
    row = canonicalize_row(np.array([0.0, -2.0, 1e-12, 4.0]), 1e-8)
    assert row.tolist() == [0.0, 0.5, 0.0, -1.0]
    assert canonicalize_row(np.zeros(3), 1e-8) is None


def test_match_rows_self_match():
    B = generate_B(5, 30, 3, INT3, seed=1).to_dense()
    match = match_rows(B, B)
    assert match.permutation == list(range(5))
    assert np.allclose(match.scales, 1.0)
    assert match.max_residual == 0.0


def test_match_rows_reversed_and_doubled():
    B = generate_B(5, 30, 3, INT3, seed=1).to_dense()
    match = match_rows(2.0 * B[::-1], B)
    assert match.permutation == [4, 3, 2, 1, 0]
    assert np.allclose(match.scales, 0.5)
    assert match.max_residual == 0.0


def test_match_rows_of_unrelated_matrices():
    rng = np.random.default_rng(0)
    match = match_rows(rng.normal(size=(4, 20)), rng.normal(size=(4, 20)))
    assert match.max_residual > 1e-3


def test_match_rows_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        match_rows(np.eye(3), np.eye(4))


def test_er_spud_on_the_constraint_matrix_itself():
    B = generate_B(5, 120, 3, INT3, seed=3).to_dense()
    result = er_spud(B)
    assert result.V_hat.shape == (5, 120)
    assert match_rows(result.V_hat, B).max_residual <= 1e-7
    assert result.lp_count == 120 * 119 // 2
    assert np.allclose(result.D_hat @ result.V_hat, B, atol=1e-6 * np.abs(B).max())


def test_er_spud_is_invariant_to_mixing():
    B = generate_B(5, 120, 3, INT3, seed=3).to_dense()
    plain = er_spud(B)
    mixed_result = er_spud(mixed(B, seed=4))
    assert match_rows(mixed_result.V_hat, plain.V_hat).max_residual <= 1e-7


def test_er_spud_is_invariant_to_row_scaling():
    B = generate_B(4, 60, 3, INT3, seed=8).to_dense()
    plain = er_spud(B)
    scaled = er_spud(np.diag([2.0, -0.5, 3.0, 1.5]) @ B)
    assert match_rows(scaled.V_hat, plain.V_hat).max_residual <= 1e-9


def test_er_spud_single_row():
    row = np.array([[0.0, 3.0, -6.0, 0.0]])
    result = er_spud(row)
    assert result.V_hat.tolist() == [[0.0, 0.5, -1.0, 0.0]]
    assert result.D_hat.shape == (1, 1)
    assert np.allclose(result.D_hat @ result.V_hat, row)


def test_er_spud_parallel_matches_serial():
    B = generate_B(4, 50, 3, INT3, seed=6).to_dense()
    serial = er_spud(B)
    parallel = er_spud(B, ERSpUDConfig(parallel=True, threads=4))
    assert np.array_equal(serial.V_hat, parallel.V_hat)
    assert serial.pool_size == parallel.pool_size


def test_er_spud_pair_budget():
    B = generate_B(4, 50, 3, INT3, seed=6).to_dense()
    result = er_spud(B, ERSpUDConfig(pair_budget=1000, seed=1))
    assert result.lp_count == 1000
    with pytest.raises(ValueError, match="pair_budget"):
        er_spud(B, ERSpUDConfig(pair_budget=50 * 49 // 2 + 1))


def test_er_spud_fails_on_dense_rank_one_pool():
    # A single pair only yields one candidate, too few for two rows.
    with pytest.raises(LearningFailed, match="learning failed"):
        er_spud(np.array([[1.0, 2.0], [3.0, 5.0]]))


def test_er_spud_rejects_rank_deficient_input():
    with pytest.raises(ValueError, match="full row rank"):
        er_spud(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))


def test_learn_constraints_end_to_end():
    B = generate_B(5, 120, 3, INT3, seed=10)
    samples = sample_dataset(B, 130, seed=11)
    report = learn_constraints(samples, 5, reference=B.to_dense())
    assert report.exact
    assert report.max_residual <= 1e-7
    assert sorted(report.permutation) == list(range(5))
    assert report.wall_time_ms > 0
    assert np.all(np.max(np.abs(report.B_hat), axis=1) == 1.0)


def test_learn_constraints_without_reference():
    B = generate_B(4, 40, 3, INT3, seed=2)
    report = learn_constraints(sample_until_stable(B, seed=3), 4)
    assert report.exact is None
    assert report.permutation is None
    assert report.B_hat.shape == (4, 40)


def test_learn_constraints_needs_enough_samples():
    B = generate_B(5, 120, 3, INT3, seed=10)
    with pytest.raises(InsufficientSamples, match="insufficient samples"):
        learn_constraints(sample_dataset(B, 3, seed=11), 5)


def test_learn_constraints_rejects_zero_rows():
    with pytest.raises(ValueError):
        learn_constraints(np.ones((2, 3)), 0)


def test_exhaustive_search_recovers_mixed_rows():
    B = private_column_rows(seed=4)
    basis = exhaustive_sparse_basis(mixed(B, seed=5), row_sparsity(B))
    assert match_rows(basis, B).max_residual <= 1e-7


@pytest.mark.parametrize("seed", range(100, 110))
def test_exhaustive_search_spans_generated_row_space(seed):
    B = generate_B(3, 10, 3, INT3, seed=seed).to_dense()
    A = mixed(B, seed=seed + 100)
    basis = exhaustive_sparse_basis(A, row_sparsity(B))
    assert basis.shape == (3, 10)
    assert np.linalg.matrix_rank(np.vstack([A, basis])) == 3
    assert row_sparsity(basis) <= row_sparsity(B)


def test_exhaustive_search_on_dense_row():
    with pytest.raises(NoSparseBasis, match="no sparse basis"):
        exhaustive_sparse_basis(np.array([[1.0, 1.0, 1.0, 1.0]]), 2)


def test_exhaustive_search_on_one_sparse_row():
    basis = exhaustive_sparse_basis(np.array([[0.0, 0.0, 5.0, 0.0]]), 1)
    assert basis.tolist() == [[0.0, 0.0, 1.0, 0.0]]


def test_exhaustive_search_guard():
    with pytest.raises(InstanceTooLarge):
        exhaustive_sparse_basis(np.ones((2, 60)), 6)


@pytest.mark.parametrize("seed", range(10))
def test_exhaustive_search_agrees_with_er_spud(seed):
    B = private_column_rows(seed=100 + seed)
    A = mixed(B, seed=200 + seed)
    oracle = exhaustive_sparse_basis(A, row_sparsity(B))
    assert match_rows(oracle, B).max_residual <= 1e-7
    assert match_rows(er_spud(A).V_hat, oracle).max_residual <= 1e-7


@pytest.mark.slow
def test_exact_learning_frequency():
    exact = 0
    for seed in range(20):
        B = generate_B(8, 240, 3, INT3, seed=seed)
        samples = sample_until_stable(B, seed=seed + 1000)
        exact += bool(learn_constraints(samples, 8, reference=B.to_dense()).exact)
    assert exact >= 19
