"""Unit tests for the seeded generators and the binary null-space scan."""

from itertools import product

import numpy as np
import pytest

from submem_core import (
    DegenerateParameters,
    InstanceTooLarge,
    SparseConstraintMatrix,
    TrivialDataset,
    WeightLaw,
    enumerate_binary_nullspace,
    generate_B,
    generate_error,
    rank,
    sample_dataset,
    sample_until_stable,
)


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("int:3", WeightLaw.uniform_integers(3)),
        ("gauss:0.5", WeightLaw.gaussian(0.5)),
        ("rademacher", WeightLaw.rademacher()),
    ],
)
def test_weight_law_parse_round_trips_through_str(text, expected):
    law = WeightLaw.parse(text)
    assert law == expected
    assert WeightLaw.parse(str(law)) == law


def test_weight_law_rejects_unknown_kind():
    with pytest.raises(ValueError, match="Unknown weight law"):
        WeightLaw.parse("poisson:2")


def test_single_draw_columns_are_singletons():
    B = generate_B(5, 10, 1, WeightLaw.rademacher(), seed=4)
    assert np.all(B.degrees == 1)
    assert set(np.abs(B.matrix.data)) == {1.0}


def test_integer_weights_and_degrees():
    B = generate_B(10, 100, 3, WeightLaw.uniform_integers(3), seed=1)
    assert B.degrees.min() >= 1 and B.degrees.max() <= 3
    assert set(np.abs(B.matrix.data)) <= {1.0, 2.0, 3.0}
    assert B.is_integral


def test_generate_b_is_deterministic_per_seed():
    first = generate_B(20, 50, 3, WeightLaw.gaussian(), seed=9)
    second = generate_B(20, 50, 3, WeightLaw.gaussian(), seed=9)
    other = generate_B(20, 50, 3, WeightLaw.gaussian(), seed=10)
    assert first.checksum() == second.checksum()
    assert np.array_equal(first.to_dense(), second.to_dense())
    assert first.checksum() != other.checksum()


def test_generate_b_rejects_degenerate_parameters():
    with pytest.raises(DegenerateParameters):
        generate_B(0, 10, 3, WeightLaw.rademacher(), seed=0)
    with pytest.raises(DegenerateParameters):
        generate_B(2, 10, 129, WeightLaw.rademacher(), seed=0)


def test_column_occupancy_matches_closed_form():
    m, n, d = 50, 100_000, 3
    B = generate_B(m, n, d, WeightLaw.rademacher(), seed=21)
    p = 1 - (1 - 1 / m) ** d
    # Per-row fraction of columns touching that row.
    freq = np.bincount(B.matrix.indices, minlength=m) / n
    stderr = np.sqrt(p * (1 - p) / n)
    assert np.all(np.abs(freq - p) <= 4 * stderr)


def test_from_dense_round_trip():
    dense = np.array([[1.0, 0.0, -2.0], [0.0, 3.0, 1.0]])
    B = SparseConstraintMatrix.from_dense(dense)
    assert (B.m, B.n, B.d) == (2, 3, 2)
    assert np.array_equal(B.to_dense(), dense)
    rows, weights = B.column(2)
    assert list(rows) == [0, 1]
    assert list(weights) == [-2.0, 1.0]


def test_constraint_matrix_rejects_empty_column():
    with pytest.raises(ValueError, match="column degrees"):
        SparseConstraintMatrix.from_dense([[1.0, 0.0]], d=1)


def test_dataset_on_the_diagonal():
    B = SparseConstraintMatrix.from_dense([[1.0, -1.0]])
    samples = sample_dataset(B, 3, seed=1)
    assert samples.shape == (3, 2)
    assert np.allclose(samples[:, 0], samples[:, 1])


def test_dataset_rows_are_annihilated():
    B = generate_B(5, 20, 3, WeightLaw.uniform_integers(3), seed=3)
    samples = sample_dataset(B, 25, seed=4)
    assert samples.shape == (25, 20)
    assert np.max(np.abs(B.matvec(samples.T))) <= 1e-9 * max(1.0, np.max(np.abs(samples)))
    assert rank(samples) == 20 - rank(B.to_dense())


def test_empty_dataset_request():
    B = generate_B(5, 20, 3, WeightLaw.uniform_integers(3), seed=3)
    assert sample_dataset(B, 0).shape == (0, 20)


def test_trivial_dataset_raises():
    B = SparseConstraintMatrix.from_dense(np.eye(3))
    with pytest.raises(TrivialDataset, match="dataset is"):
        sample_dataset(B, 4)


def test_dataset_draws_are_prefix_stable():
    B = generate_B(5, 20, 3, WeightLaw.uniform_integers(3), seed=3)
    small = sample_dataset(B, 10, seed=8)
    large = sample_dataset(B, 40, seed=8)
    assert np.array_equal(small, large[:10])


def test_integer_coefficient_draws_are_prefix_stable():
    B = generate_B(5, 20, 3, WeightLaw.uniform_integers(3), seed=3)
    law = WeightLaw.uniform_integers(2)
    small = sample_dataset(B, 7, coeff_law=law, seed=8)
    large = sample_dataset(B, 30, coeff_law=law, seed=8)
    assert np.array_equal(small, large[:7])


@pytest.mark.parametrize("law", [WeightLaw.uniform_integers(3), WeightLaw.gaussian(), WeightLaw.rademacher()])
def test_generated_columns_are_prefix_stable(law):
    narrow = generate_B(6, 12, 3, law, seed=21).to_dense()
    wide = generate_B(6, 40, 3, law, seed=21).to_dense()
    assert np.array_equal(narrow, wide[:, :12])


def test_integer_law_covers_its_support():
    values = WeightLaw.uniform_integers(2).draw(np.random.default_rng(0), 4000)
    assert set(values.tolist()) == {-2.0, -1.0, 1.0, 2.0}


def test_sample_until_stable_reaches_full_rank():
    B = generate_B(6, 40, 3, WeightLaw.uniform_integers(3), seed=12)
    samples = sample_until_stable(B, seed=13)
    assert rank(samples) == 40 - rank(B.to_dense())
    assert samples.shape[0] <= 4 * 40


def test_error_vectors():
    assert not generate_error(8, 0, 4, seed=1).any()
    full = generate_error(8, 8, 1, seed=1)
    assert set(full) <= {-1.0, 1.0}
    assert np.count_nonzero(full) == 8
    e = generate_error(1000, 37, 4, seed=2)
    assert np.count_nonzero(e) == 37
    assert set(np.abs(e[e != 0])) <= {1.0, 2.0, 3.0, 4.0}


def test_error_weight_above_n_raises():
    with pytest.raises(ValueError):
        generate_error(5, 6, 4, seed=0)


def test_binary_nullspace_of_equality_constraints():
    equal = SparseConstraintMatrix.from_dense([[1.0, -1.0]])
    assert sorted(map(tuple, enumerate_binary_nullspace(equal))) == [(-1, -1), (1, 1)]
    opposite = SparseConstraintMatrix.from_dense([[1.0, 1.0]])
    assert sorted(map(tuple, enumerate_binary_nullspace(opposite))) == [(-1, 1), (1, -1)]


def test_binary_nullspace_matches_direct_scan():
    B = generate_B(2, 10, 2, WeightLaw.rademacher(), seed=6)
    dense = B.to_dense()
    expected = sorted(x for x in product((1, -1), repeat=10) if not np.any(dense @ np.array(x)))
    assert sorted(map(tuple, enumerate_binary_nullspace(B).tolist())) == expected


def test_binary_nullspace_guard():
    B = generate_B(2, 25, 2, WeightLaw.rademacher(), seed=6)
    with pytest.raises(InstanceTooLarge):
        enumerate_binary_nullspace(B)
