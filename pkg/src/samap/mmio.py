"""Matrix Market coordinate files and sequence manifests.

Only the coordinate layout is handled, with ``real``, ``integer`` or
``pattern`` fields and ``general`` or ``symmetric`` storage.  Files carry
1-based indices; everything in memory is 0-based.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import ConfigError, MatrixMarketError
from .sparse import MatrixSequence, SparseMatrix, SparsityPattern, from_coo

_FIELDS = ("real", "integer", "pattern")
_SYMMETRIES = ("general", "symmetric")


def _parse_header(line, path):
    tokens = line.split()
    if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
        raise MatrixMarketError("missing or malformed %%MatrixMarket header", path, 1)
    obj, fmt, fld, sym = (t.lower() for t in tokens[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported object/format '{obj} {fmt}'", path, 1)
    if fld not in _FIELDS:
        raise MatrixMarketError(f"unsupported field '{fld}'", path, 1)
    if sym not in _SYMMETRIES:
        raise MatrixMarketError(f"unsupported symmetry '{sym}'", path, 1)
    return fld, sym


def read_matrix_market(path) -> SparseMatrix:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read matrix {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty file", path, 1)
    fld, sym = _parse_header(lines[0], path)

    lineno = 1
    size = None
    rows, cols, vals = [], [], []
    expected = None
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        parts = line.split()
        if size is None:
            if len(parts) != 3:
                raise MatrixMarketError("size line must read 'nrows ncols nnz'", path, lineno)
            try:
                size = tuple(int(p) for p in parts)
            except ValueError:
                raise MatrixMarketError(f"non-integer size line '{line}'", path, lineno) from None
            if min(size) < 0:
                raise MatrixMarketError("negative size", path, lineno)
            expected = size[2]
            continue
        if len(rows) == expected:
            raise MatrixMarketError(f"more than the declared {expected} entries", path, lineno)
        want = 2 if fld == "pattern" else 3
        if len(parts) != want:
            raise MatrixMarketError(f"expected {want} fields, got {len(parts)}", path, lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            v = 1.0 if fld == "pattern" else (float(int(parts[2])) if fld == "integer" else float(parts[2]))
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry '{line}'", path, lineno) from None
        if not (1 <= i <= size[0] and 1 <= j <= size[1]):
            raise MatrixMarketError(f"index ({i}, {j}) outside {size[0]}x{size[1]}", path, lineno)
        if sym == "symmetric" and i < j:
            raise MatrixMarketError("symmetric storage must list the lower triangle only", path, lineno)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(v)
    if size is None:
        raise MatrixMarketError("missing size line", path, lineno)
    if len(rows) != expected:
        raise MatrixMarketError(f"declared {expected} entries, found {len(rows)}", path, lineno)

    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return from_coo(size[0], size[1], rows, cols, vals)


def write_matrix_market(A: SparseMatrix | SparsityPattern, path, comment: str | None = None) -> None:
    """Write ``A`` in general coordinate storage; patterns use the ``pattern`` field."""
    path = Path(path)
    is_pattern = isinstance(A, SparsityPattern)
    fld = "pattern" if is_pattern else "real"
    cols = np.repeat(np.arange(A.ncols), np.diff(A.col_ptr)) + 1
    rows = A.row_idx + 1
    out = [f"%%MatrixMarket matrix coordinate {fld} general"]
    if comment:
        out.extend(f"% {c}" for c in comment.splitlines())
    out.append(f"{A.nrows} {A.ncols} {A.nnz}")
    if is_pattern:
        out.extend(f"{i} {j}" for i, j in zip(rows.tolist(), cols.tolist()))
    else:
        out.extend(f"{i} {j} {v:.17g}" for i, j, v in zip(rows.tolist(), cols.tolist(), A.values.tolist()))
    path.write_text("\n".join(out) + "\n")


def read_pattern(path) -> SparsityPattern:
    return read_matrix_market(path).pattern


def read_manifest(path) -> list[Path]:
    """Matrix paths listed in a manifest, resolved relative to its directory."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    base = path.parent
    entries = []
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if line:
            p = Path(line)
            entries.append(p if p.is_absolute() else base / p)
    if not entries:
        raise ConfigError(f"manifest {path} lists no matrices")
    return entries


def write_sequence(seq: MatrixSequence, out_dir, stem: str = "A", manifest: str = "sequence.txt") -> Path:
    """Write every matrix of ``seq`` plus a manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(3, len(str(len(seq) - 1)))
    names = []
    for k, (A, label) in enumerate(zip(seq.entries, seq.labels)):
        name = f"{stem}_{k:0{width}d}.mtx"
        write_matrix_market(A, out_dir / name, comment=label)
        names.append(name)
    mpath = out_dir / manifest
    mpath.write_text("# one matrix per line, in sequence order\n" + "\n".join(names) + "\n")
    return mpath


def read_sequence(manifest) -> MatrixSequence:
    paths = read_manifest(manifest)
    return MatrixSequence([read_matrix_market(p) for p in paths], [os.fspath(p.name) for p in paths])
