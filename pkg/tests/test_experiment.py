import numpy as np
import pytest

from samap.errors import ConfigError, DenseCapError
from samap.experiment import (
    RUN_COLUMNS,
    ExperimentConfig,
    read_run_csv,
    run_closure_check,
    run_exactmap_study,
    run_experiment,
)
from samap.mmio import write_matrix_market, write_sequence
from samap.problems import ShiftedConfig, closure_example_pair
from samap.sparse import MatrixSequence, SparseMatrix

from conftest import random_sparse


def test_same_matrix_twice(rng, tmp_path):
    A = random_sparse(rng, 10, 0.3, diag=3.0)
    cfg = ExperimentConfig(MatrixSequence([A, A]), recipes=["target"], output_dir=tmp_path)
    rows = run_experiment(cfg)
    assert len(rows) == 1
    assert rows[0].k == 1 and rows[0].recipe_label == "target"
    assert rows[0].relative_residual < 1e-13
    on_disk = read_run_csv(tmp_path / "run.csv")
    assert list(on_disk[0]) == list(RUN_COLUMNS)
    assert float(on_disk[0]["rel_residual"]) == rows[0].relative_residual


def test_rows_are_k_major_and_skip_target(rng):
    A = random_sparse(rng, 8, 0.3, diag=3.0)
    seq = MatrixSequence([SparseMatrix.from_dense(A.to_dense() + s * np.eye(8)) for s in (0.0, 1.0, 2.0)])
    cfg = ExperimentConfig(seq, target_index=1, recipes=["target", "lfil:2@level1"])
    rows = run_experiment(cfg)
    assert [(r.k, r.recipe_label) for r in rows] == [
        (0, "target"), (0, "lfil:2@level1"), (2, "target"), (2, "lfil:2@level1")]


def test_config_validation():
    seq = MatrixSequence([SparseMatrix.identity(2)])
    with pytest.raises(ConfigError):
        ExperimentConfig(seq, recipes=[])
    with pytest.raises(ConfigError):
        ExperimentConfig(seq, recipes=["target", "target"])
    with pytest.raises(ConfigError):
        ExperimentConfig(seq, recipes=["nonsense"])
    with pytest.raises(ConfigError):
        ExperimentConfig(seq, target_index=3).load_sequence()
    with pytest.raises(ConfigError):
        ExperimentConfig(seq, drop_tols=[-1.0])


def test_sequence_from_manifest(tmp_path, example_pair):
    manifest = write_sequence(MatrixSequence(list(example_pair)), tmp_path)
    seq = ExperimentConfig(manifest).load_sequence()
    assert len(seq) == 2 and seq[0] == example_pair[0]


def test_closure_check_worked_example(example_pair, tmp_path):
    A_0, A_1 = example_pair
    verdict = run_closure_check(A_1, A_0)
    assert verdict.subset_holds and verdict.patterns_equal and verdict.passed
    assert verdict.closure_pattern.nnz == 49  # the graph of A_1 is strongly connected
    assert "verdict: PASS" in verdict.summary()
    write_matrix_market(A_1, tmp_path / "a1.mtx")
    write_matrix_market(A_0, tmp_path / "a0.mtx")
    assert run_closure_check(tmp_path / "a1.mtx", tmp_path / "a0.mtx").passed


@pytest.mark.parametrize("seed", range(20))
def test_closure_check_many_seeds(seed):
    A_0, A_1 = closure_example_pair(seed)
    assert run_closure_check(A_1, A_0).passed


def test_closure_check_reports_failure():
    # reversed roles: A_1 is not inside S(A_0)
    A_0, A_1 = closure_example_pair(0)
    verdict = run_closure_check(A_0, A_1)
    assert not verdict.subset_holds and not verdict.passed
    assert "verdict: FAIL" in verdict.summary()


def test_closure_check_shape_mismatch():
    with pytest.raises(ConfigError):
        run_closure_check(SparseMatrix.identity(2), SparseMatrix.identity(3))


def test_exactmap_study_identity_rows(tmp_path):
    cfg = ExperimentConfig(ShiftedConfig(m=5, shifts=[0.0, 50.0]), drop_tols=[1e-2, 1e-4], output_dir=tmp_path)
    rows = run_exactmap_study(cfg)
    # k = 0 maps the target to itself: exactly the identity
    assert rows[:2] == [(0, 1e-2, 25), (0, 1e-4, 25)]
    assert rows[3][2] >= rows[2][2] > 25
    lines = (tmp_path / "exactmap.csv").read_text().splitlines()
    assert lines[0] == "k,drop_tol,nnz" and len(lines) == 5


def test_exactmap_study_dense_cap():
    cfg = ExperimentConfig(ShiftedConfig(m=5, shifts=[0.0]), dense_cap=10)
    with pytest.raises(DenseCapError):
        run_exactmap_study(cfg)


def test_exactmap_study_matches_numpy(rng):
    A = random_sparse(rng, 12, 0.3, diag=3.0)
    B = SparseMatrix.from_dense(A.to_dense() + np.diag(rng.random(12)))
    rows = run_exactmap_study(ExperimentConfig(MatrixSequence([A, B]), drop_tols=[1e-3]))
    ref = np.linalg.solve(B.to_dense(), A.to_dense())
    assert rows[1] == (1, 1e-3, int(np.count_nonzero(np.abs(ref) > 1e-3)))
