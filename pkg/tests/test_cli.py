import subprocess
import sys

import pytest

from samap.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_config, main
from samap.errors import ConfigError
from samap.experiment import read_run_csv
from samap.mmio import read_pattern, read_sequence, write_matrix_market
from samap.problems import Cd2dConfig, ShiftedConfig, closure_example_pair
from samap.sparse import SparseMatrix


@pytest.fixture
def shifted_dir(tmp_path):
    out = tmp_path / "shifted"
    assert main(["gen", "shifted", "--m", "6", "--shifts", "0,10,20", "--out", str(out)]) == EXIT_OK
    return out


def test_gen_shifted(shifted_dir, capsys):
    seq = read_sequence(shifted_dir / "sequence.txt")
    assert len(seq) == 3 and seq.n == 36


def test_gen_cd2d(tmp_path, capsys):
    assert main(["gen", "cd2d", "--m", "6", "--out", str(tmp_path)]) == EXIT_OK
    assert "nested patterns: holds" in capsys.readouterr().out
    seq = read_sequence(tmp_path / "sequence.txt")
    assert all(A.nnz == 5 * 36 - 24 for A in seq)


def test_run_writes_csv(shifted_dir, tmp_path, capsys):
    out = tmp_path / "res"
    code = main(["run", "--seq", str(shifted_dir / "sequence.txt"), "--recipe", "target",
                 "--recipe", "col:0.8@level1", "--out", str(out)])
    assert code == EXIT_OK
    rows = read_run_csv(out / "run.csv")
    assert [(r["k"], r["recipe"]) for r in rows] == [
        ("1", "target"), ("1", "col:0.8@level1"), ("2", "target"), ("2", "col:0.8@level1")]
    assert "rel_residual" in capsys.readouterr().out


def test_run_default_recipes(shifted_dir, tmp_path):
    assert main(["run", "--seq", str(shifted_dir / "sequence.txt"), "--out", str(tmp_path)]) == EXIT_OK
    labels = [r["recipe"] for r in read_run_csv(tmp_path / "run.csv")]
    assert labels[:3] == ["target", "col:0.8@level1", "lfil:5@level1"]


def test_run_from_config_file(tmp_path):
    ini = tmp_path / "exp.ini"
    ini.write_text(f"[shifted]\nm = 5\nshifts = 0, 5\n\n[run]\nrecipes = target, lfil:3\nout = {tmp_path / 'o'}\n")
    assert main(["run", "--config", str(ini)]) == EXIT_OK
    assert len(read_run_csv(tmp_path / "o" / "run.csv")) == 2


def test_closure_check_cli(tmp_path, capsys):
    A_0, A_1 = closure_example_pair(0)
    write_matrix_market(A_0, tmp_path / "a0.mtx")
    write_matrix_market(A_1, tmp_path / "a1.mtx")
    assert main(["closure-check", str(tmp_path / "a1.mtx"), str(tmp_path / "a0.mtx")]) == EXIT_OK
    assert "verdict: PASS" in capsys.readouterr().out


def test_exactmap_study_cli(shifted_dir, tmp_path, capsys):
    code = main(["exactmap-study", "--seq", str(shifted_dir / "sequence.txt"),
                 "--drop-tol", "1e-2", "--drop-tol", "1e-4", "--out", str(tmp_path)])
    assert code == EXIT_OK
    lines = (tmp_path / "exactmap.csv").read_text().splitlines()
    assert lines[1:3] == ["0,0.01,36", "0,0.0001,36"]


def test_sparsify_cli(tmp_path, capsys):
    A = SparseMatrix.from_dense([[4.0, 1.0, 0.0], [0.1, 5.0, 2.0], [0.0, 3.0, 6.0]])
    write_matrix_market(A, tmp_path / "a.mtx")
    out = tmp_path / "p.mtx"
    assert main(["sparsify", "--matrix", str(tmp_path / "a.mtx"), "--recipe", "lfil:2", "--out", str(out)]) == 0
    # two largest per column: all of column 0, column 1 loses the 1.0, column 2 keeps 6 and 2
    assert read_pattern(out).to_dense().tolist() == [[True, False, False], [True, True, True], [False, True, True]]
    assert "lfil:2: n=3 nnz=6" in capsys.readouterr().out


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["run", "--seq", str(tmp_path / "none.txt")]) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_bad_recipe_exit_code(shifted_dir):
    assert main(["run", "--seq", str(shifted_dir / "sequence.txt"), "--recipe", "bogus:1"]) == EXIT_CONFIG


def test_no_sequence_exit_code():
    assert main(["run"]) == EXIT_CONFIG


def test_singular_exit_code(tmp_path, capsys):
    write_matrix_market(SparseMatrix(2, 2, [0, 1, 1], [0], [1.0]), tmp_path / "s.mtx")
    write_matrix_market(SparseMatrix.identity(2), tmp_path / "i.mtx")
    assert main(["closure-check", str(tmp_path / "s.mtx"), str(tmp_path / "i.mtx")]) == EXIT_NUMERICAL
    assert "numerical failure" in capsys.readouterr().err


def test_dense_cap_exit_code(shifted_dir):
    code = main(["exactmap-study", "--seq", str(shifted_dir / "sequence.txt"), "--dense-cap", "10"])
    assert code == EXIT_CONFIG


def test_build_config_coercion(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[cd2d]\nm = 12\neta = 0.5\n[shifted]\nshifts = 1, 2, 3\nmass_kind = tridiagonal\n")
    cfg = build_config(Cd2dConfig, ini, "cd2d", eta=0.25)
    assert cfg.m == 12 and cfg.eta == 0.25
    sh = build_config(ShiftedConfig, ini, "shifted")
    assert sh.shifts == [1.0, 2.0, 3.0] and sh.mass_kind == "tridiagonal"
    ini.write_text("[cd2d]\nbogus = 1\n")
    with pytest.raises(ConfigError):
        build_config(Cd2dConfig, ini, "cd2d")
    ini.write_text("[cd2d]\nm = many\n")
    with pytest.raises(ConfigError):
        build_config(Cd2dConfig, ini, "cd2d")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "samap", "gen", "shifted", "--m", "3", "--shifts", "0",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "sequence.txt").exists()
