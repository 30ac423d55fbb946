"""Tests for the experiment harness (small, fast configurations)."""

import pytest
from submem_core import FormatError, ReportWriteError, WeightLaw

from app.schema.experiment import ExperimentConfig, ExperimentResult, ExperimentRow
from app.util.experiment import (
    crossing_threshold,
    derive_seed,
    emit_csv,
    read_csv,
    run_learning_sweep,
    run_recall_experiment,
    smooth_failure_curve,
)


def small_config(**overrides) -> ExperimentConfig:
    fields = {
        "m": 20,
        "n": 80,
        "d": 3,
        "error_counts": [0, 1, 2, 6],
        "trials_per_E": 5,
        "seed": 11,
        "true_B": True,
        "timing": False,
    }
    fields.update(overrides)
    return ExperimentConfig(**fields)


def rows_of(*fractions, trials=10):
    return [
        ExperimentRow(E=E, trials=trials, failures=round(f * trials), failure_fraction=round(f * trials) / trials)
        for E, f in enumerate(fractions)
    ]


def test_derive_seed_is_stable_and_keyed():
    assert derive_seed(7, 3, 1, 0) == derive_seed(7, 3, 1, 0)
    assert derive_seed(7, 3, 1, 0) != derive_seed(7, 3, 1, 1)
    assert derive_seed(7, 0) != derive_seed(8, 0)
    assert 0 <= derive_seed(2**64 - 1, 0) < 2**64


def test_zero_errors_never_fail():
    result = run_recall_experiment(small_config(error_counts=[0]))
    (row,) = result.rows
    assert row.failures == 0
    assert row.failure_fraction == 0.0
    assert row.mean_iterations == 0.0


def test_rows_follow_the_error_counts():
    result = run_recall_experiment(small_config())
    assert [row.E for row in result.rows] == [0, 1, 2, 6]
    for row in result.rows:
        assert row.trials == 5
        assert row.failure_fraction == row.failures / row.trials
        assert row.mean_decode_ms == 0.0
    assert result.meta.learn_exact is None
    assert result.meta.B_hat_checksum is None


def test_same_seed_same_result():
    first = run_recall_experiment(small_config())
    second = run_recall_experiment(small_config())
    assert first.model_dump_json() == second.model_dump_json()


def test_threads_do_not_change_rows():
    serial = run_recall_experiment(small_config(threads=1))
    threaded = run_recall_experiment(small_config(threads=3))
    assert serial.rows == threaded.rows


def test_adding_error_counts_keeps_earlier_rows():
    short = run_recall_experiment(small_config(error_counts=[1, 2]))
    longer = run_recall_experiment(small_config(error_counts=[1, 2, 3]))
    assert longer.rows[:2] == short.rows


def test_identical_csv_bytes(tmp_path):
    emit_csv(run_recall_experiment(small_config()), tmp_path / "a.csv")
    emit_csv(run_recall_experiment(small_config()), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_learned_matrix_is_recorded():
    cfg = small_config(m=5, n=120, true_B=False, error_counts=[0, 1], trials_per_E=3)
    result = run_recall_experiment(cfg)
    assert not result.meta.aborted
    assert result.meta.learn_exact is True
    assert result.meta.learn_max_residual <= 1e-7
    assert result.meta.B_hat_checksum is not None
    assert result.rows[0].failures == 0

    reference = run_recall_experiment(cfg.model_copy(update={"true_B": True}))
    assert [row.E for row in result.rows] == [0, 1]
    assert result.rows[1].trials == 3
    assert [row.failures for row in result.rows] == [row.failures for row in reference.rows]


def test_learning_failure_aborts_with_a_report():
    result = run_recall_experiment(small_config(true_B=False, pair_budget=0))
    assert result.meta.aborted
    assert "learning failed" in result.meta.learn_error
    assert result.rows == []


def test_csv_layout(tmp_path):
    path = tmp_path / "one.csv"
    row = ExperimentRow(E=0, trials=4, failures=1, failure_fraction=0.25, mean_iterations=1.5)
    result = run_recall_experiment(small_config(error_counts=[0]))
    emit_csv(ExperimentResult(rows=[row], meta=result.meta), path)
    assert path.read_bytes() == (
        b"E,trials,failures,failure_fraction,mean_iterations,mean_decode_ms\n0,4,1,0.25,1.5,0.0\n"
    )


def test_empty_result_is_header_only(tmp_path):
    result = run_recall_experiment(small_config(true_B=False, pair_budget=0))
    path = tmp_path / "empty.csv"
    sidecar = emit_csv(result, path)
    assert path.read_text() == "E,trials,failures,failure_fraction,mean_iterations,mean_decode_ms\n"
    assert '"aborted": true' in sidecar.read_text()
    assert read_csv(path) == []


def test_csv_round_trip(tmp_path):
    cfg = small_config(timing=True)
    result = run_recall_experiment(cfg)
    emit_csv(result, tmp_path / "r.csv")
    assert read_csv(tmp_path / "r.csv") == result.rows


def test_read_csv_rejects_foreign_header(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(FormatError, match="unexpected header"):
        read_csv(path)


def test_unwritable_path_names_the_path(tmp_path):
    target = tmp_path / "missing" / "r.csv"
    result = run_recall_experiment(small_config(error_counts=[0]))
    with pytest.raises(ReportWriteError, match="missing"):
        emit_csv(result, target)


def test_smoothing_pools_violations():
    curve = smooth_failure_curve(rows_of(0.0, 0.2, 0.1, 0.6, 0.5))
    assert [E for E, _ in curve] == [0, 1, 2, 3, 4]
    assert [value for _, value in curve] == pytest.approx([0.0, 0.15, 0.15, 0.55, 0.55])


def test_crossing_threshold():
    rows = rows_of(0.0, 0.2, 0.1, 0.6, 0.5)
    assert crossing_threshold(rows) == 3
    assert crossing_threshold(rows, level=0.9) is None
    assert crossing_threshold([]) is None


def test_learning_sweep_row():
    (row,) = run_learning_sweep([4], [3.0], 3, WeightLaw.uniform_integers(3), trials=2, seed=0)
    assert row.n == 17
    assert row.trials == 2
    assert row.exact + row.failed <= 2
    assert row.exact_frequency == row.exact / 2
    again = run_learning_sweep([4], [3.0], 3, WeightLaw.uniform_integers(3), trials=2, seed=0)[0]
    assert (again.exact, again.failed) == (row.exact, row.failed)


def test_learning_sweep_needs_values():
    with pytest.raises(ValueError):
        run_learning_sweep([], [1.0], 3, WeightLaw.uniform_integers(3), trials=1, seed=0)
