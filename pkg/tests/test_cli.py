"""Tests for the command line."""

import argparse
import json

import numpy as np
import pytest
from submem_core import SparseConstraintMatrix, WeightLaw, generate_B, sample_dataset
from submem_core.formats import (
    loads_dense,
    loads_sparse,
    read_dense,
    read_vector,
    write_dense,
    write_sparse,
    write_vector,
)

from app.cli import main, parse_counts
from app.core.config import settings
from app.util.experiment import derive_seed, read_csv


def test_parse_counts():
    assert parse_counts("0-2,5") == [0, 1, 2, 5]
    assert parse_counts("7") == [7]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_counts("1-x")


def test_gen_writes_the_seeded_matrix(capsys):
    assert main(["--seed", "1", "gen", "--m", "6", "--n", "15", "--d", "3"]) == 0
    B = loads_sparse(capsys.readouterr().out)
    expected = generate_B(6, 15, 3, WeightLaw.uniform_integers(3), derive_seed(1, 0))
    assert B.checksum() == expected.checksum()


def test_gen_with_samples(tmp_path):
    out, samples = tmp_path / "b.sparse", tmp_path / "x.dense"
    args = ["--out", str(out), "gen", "--m", "6", "--n", "15", "--d", "3"]
    code = main([*args, "--samples", "4", "--samples-out", str(samples)])
    assert code == 0
    B = loads_sparse(out.read_text())
    X = read_dense(samples)  # noqa: N806
    assert X.shape == (4, 15)
    assert np.allclose(B.to_dense() @ X.T, 0.0, atol=1e-9)


def test_decode_corrects_a_single_error(tmp_path, capsys):
    B = generate_B(20, 80, 3, WeightLaw.uniform_integers(3), seed=4)
    j = int(np.flatnonzero(B.degrees == 3)[0])
    x = sample_dataset(B, 1, seed=5)[0]
    y = x.copy()
    y[j] += 2.0
    write_sparse(tmp_path / "b.sparse", B)
    write_vector(tmp_path / "y.vec", y)

    args = ["--out", str(tmp_path / "x.vec"), "decode"]
    code = main([*args, "--B", str(tmp_path / "b.sparse"), "--y", str(tmp_path / "y.vec")])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["status"] == "success"
    assert np.allclose(read_vector(tmp_path / "x.vec"), x, atol=1e-9)


def test_expand_check_prints_a_report(tmp_path, capsys):
    B = SparseConstraintMatrix.from_dense([[1.0, 0.0, 1.0], [1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    write_sparse(tmp_path / "b.sparse", B)
    assert main(["expand-check", "--B", str(tmp_path / "b.sparse"), "--t", "1", "--l", "2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["is_expander"] is True
    assert report["witness"] is None
    assert report["sets_checked"] == 3


def test_learn_from_a_generator_spec(tmp_path, capsys):
    out = tmp_path / "b_hat.sparse"
    assert main(["--seed", "3", "--out", str(out), "learn", "--m", "4", "--n", "40", "--d", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert (report["m"], report["n"]) == (4, 40)
    assert report["lp_count"] == 40 * 39 // 2
    assert report["exact"] is not None
    assert out.read_text().split()[0] in {"sparse", "dense"}


def test_learn_from_samples_without_reference(tmp_path, capsys):
    B = generate_B(4, 40, 3, WeightLaw.uniform_integers(3), seed=2)
    write_dense(tmp_path / "x.dense", sample_dataset(B, 60, seed=3))
    out = tmp_path / "b_hat.sparse"
    assert main(["--out", str(out), "learn", "--m", "4", "--samples", str(tmp_path / "x.dense")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["exact"] is None
    assert report["permutation"] is None
    assert out.exists()


def test_learn_needs_input():
    assert main(["learn", "--m", "4"]) == 2


def test_simulate_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "r.csv"
    args = ["--seed", "5", "--out", str(out), "simulate", "--m", "20", "--n", "80", "--d", "3"]
    code = main([*args, "--E", "0-2", "--trials", "3", "--true-B", "--no-timing"])
    assert code == 0
    assert [row.E for row in read_csv(out)] == [0, 1, 2]
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["config"]["true_B"] is True
    assert meta["config"]["seed"] == 5
    assert meta["config"]["timing"] is False


def test_simulate_from_config_file(tmp_path):
    config = tmp_path / "cfg.json"
    fields = {"m": 20, "n": 80, "d": 3, "error_counts": [0, 1], "trials_per_E": 2, "true_B": True}
    config.write_text(json.dumps(fields))
    out = tmp_path / "r.csv"
    assert main(["--out", str(out), "simulate", "--config", str(config), "--trials", "4"]) == 0
    assert [row.trials for row in read_csv(out)] == [4, 4]


def test_simulate_rejects_invalid_config(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["--out", str(out), "simulate", "--m", "5", "--n", "10", "--E", "11", "--true-B"]) == 2
    assert not out.exists()


def test_simulate_reports_aborted_learning(tmp_path):
    out = tmp_path / "r.csv"
    args = ["--out", str(out), "simulate", "--m", "20", "--n", "80"]
    code = main([*args, "--E", "0", "--trials", "2", "--pair-budget", "0"])
    assert code == 1
    assert read_csv(out) == []
    assert json.loads(out.with_suffix(".json").read_text())["aborted"] is True


def test_sparse_search(tmp_path, capsys):
    write_dense(tmp_path / "a.dense", [[0.0, 0.0, 5.0, 0.0]])
    assert main(["sparse-search", "--A", str(tmp_path / "a.dense"), "--d", "1"]) == 0
    assert loads_dense(capsys.readouterr().out).tolist() == [[0.0, 0.0, 1.0, 0.0]]


def test_enumerate_binary(tmp_path, capsys):
    write_sparse(tmp_path / "b.sparse", SparseConstraintMatrix.from_dense([[1.0, -1.0]]))
    assert main(["enumerate-binary", "--B", str(tmp_path / "b.sparse")]) == 0
    assert capsys.readouterr().out == "dense 2 2\n1 1\n-1 -1\n"


def test_missing_input_is_an_error(tmp_path):
    assert main(["expand-check", "--B", str(tmp_path / "absent"), "--t", "1", "--l", "1"]) == 2


def test_tolerance_flags_override_settings(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "ZERO_TOL", settings.ZERO_TOL)
    write_sparse(tmp_path / "b.sparse", SparseConstraintMatrix.from_dense([[1.0, -1.0]]))
    assert main(["--zero-tol", "1e-6", "enumerate-binary", "--B", str(tmp_path / "b.sparse")]) == 0
    assert settings.ZERO_TOL == 1e-6


def test_decode_rejects_a_message_of_the_wrong_length(tmp_path):
    write_sparse(tmp_path / "b.sparse", SparseConstraintMatrix.from_dense([[1.0, -1.0, 2.0]]))
    write_vector(tmp_path / "y.vec", [1.0, 2.0])
    args = ["--out", str(tmp_path / "x.vec"), "decode", "--B", str(tmp_path / "b.sparse")]
    assert main([*args, "--y", str(tmp_path / "y.vec")]) == 2
    assert not (tmp_path / "x.vec").exists()


def test_out_of_range_tolerance_flag_is_an_error(tmp_path):
    before = settings.RANK_TOL
    write_sparse(tmp_path / "b.sparse", SparseConstraintMatrix.from_dense([[1.0, -1.0]]))
    assert main(["--rank-tol", "2", "enumerate-binary", "--B", str(tmp_path / "b.sparse")]) == 2
    assert settings.RANK_TOL == before


def test_unknown_command_exits():
    with pytest.raises(SystemExit) as exc:
        main(["compress"])
    assert exc.value.code == 2
