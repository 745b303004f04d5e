import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from samap.errors import ConfigError, MatrixMarketError
from samap.mmio import (
    read_manifest,
    read_matrix_market,
    read_pattern,
    read_sequence,
    write_matrix_market,
    write_sequence,
)
from samap.sparse import MatrixSequence, SparseMatrix, from_dense


def test_identity_round_trip(tmp_path):
    A = SparseMatrix.identity(2)
    write_matrix_market(A, tmp_path / "I.mtx")
    assert read_matrix_market(tmp_path / "I.mtx") == A


def test_one_based_indices_on_disk(tmp_path):
    write_matrix_market(from_dense([[0.0, 2.5], [0.0, 0.0]]), tmp_path / "a.mtx")
    lines = (tmp_path / "a.mtx").read_text().splitlines()
    assert lines[0] == "%%MatrixMarket matrix coordinate real general"
    assert lines[-2:] == ["2 2 1", "1 2 2.5"]


def test_pattern_file_reads_as_ones(tmp_path):
    p = tmp_path / "p.mtx"
    p.write_text("%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 2\n1 1\n3 2\n")
    A = read_matrix_market(p)
    assert A.nnz == 2
    np.testing.assert_array_equal(A.values, [1.0, 1.0])
    assert A.to_dense()[2, 1] == 1.0


def test_symmetric_expansion(tmp_path):
    p = tmp_path / "s.mtx"
    # three lower-triangle entries, one on the diagonal: 1 + 2 * 2 = 5 stored
    p.write_text("%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 4\n2 1 -1\n3 2 -2\n")
    A = read_matrix_market(p)
    assert A.nnz == 5
    d = A.to_dense()
    np.testing.assert_array_equal(d, d.T)
    assert d[0, 1] == -1 and d[1, 2] == -2


def test_integer_field(tmp_path):
    p = tmp_path / "i.mtx"
    p.write_text("%%MatrixMarket matrix coordinate integer general\n2 2 2\n1 1 3\n2 2 -7\n")
    np.testing.assert_array_equal(read_matrix_market(p).to_dense(), [[3, 0], [0, -7]])


@pytest.mark.parametrize(
    "body, line",
    [
        ("%%MatrixMarket matrix array real general\n2 2\n", 1),
        ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", 1),
        ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 x 2.0\n", 4),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1\n", 3),
        ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n", 3),
    ],
)
def test_malformed_files_report_line(tmp_path, body, line):
    p = tmp_path / "bad.mtx"
    p.write_text(body)
    with pytest.raises(MatrixMarketError) as info:
        read_matrix_market(p)
    assert info.value.line == line


def test_declared_count_mismatch(tmp_path):
    p = tmp_path / "short.mtx"
    p.write_text("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n")
    with pytest.raises(MatrixMarketError, match="declared 3"):
        read_matrix_market(p)


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError):
        read_matrix_market(tmp_path / "nope.mtx")


def test_pattern_round_trip(tmp_path):
    A = from_dense([[1.0, 0.0, 2.0], [0.0, 3.0, 0.0], [4.0, 0.0, 0.0]])
    write_matrix_market(A.pattern, tmp_path / "p.mtx")
    assert read_pattern(tmp_path / "p.mtx") == A.pattern


def test_manifest_comments_and_relative_paths(tmp_path):
    (tmp_path / "sub").mkdir()
    m = tmp_path / "sub" / "seq.txt"
    m.write_text("# header\nA.mtx\n\n  B.mtx  # trailing\n")
    assert read_manifest(m) == [tmp_path / "sub" / "A.mtx", tmp_path / "sub" / "B.mtx"]


def test_empty_manifest(tmp_path):
    m = tmp_path / "seq.txt"
    m.write_text("# nothing\n")
    with pytest.raises(ConfigError):
        read_manifest(m)


def test_sequence_round_trip(tmp_path, example_pair):
    seq = MatrixSequence(list(example_pair))
    manifest = write_sequence(seq, tmp_path / "out")
    back = read_sequence(manifest)
    assert len(back) == 2
    assert all(a == b for a, b in zip(seq, back))


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-1e300, 1e300, allow_nan=False, allow_subnormal=True)))
@settings(max_examples=60, deadline=None)
def test_round_trip_lossless(tmp_path_factory, a):
    A = from_dense(a)
    path = tmp_path_factory.mktemp("mm") / "a.mtx"
    write_matrix_market(A, path)
    B = read_matrix_market(path)
    assert B.shape == A.shape and B.nnz == A.nnz
    assert B == A
