"""Compressed-column sparse matrices, sparsity patterns and matrix sequences.

Indices are 0-based throughout.  Both containers are immutable: their index
arrays are flagged read-only at construction, and explicit zeros are never
stored, so the pattern of a matrix is its numerical support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DenseCapError

DEFAULT_DENSE_CAP = 4000

_INDEX = np.int64


def _frozen(a, dtype):
    if isinstance(a, np.ndarray) and a.dtype == dtype and not a.flags.writeable:
        return a
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _check_structure(nrows, ncols, col_ptr, row_idx):
    if nrows < 0 or ncols < 0:
        raise ValueError(f"negative dimensions {nrows}x{ncols}")
    if col_ptr.shape != (ncols + 1,):
        raise ValueError(f"col_ptr must have length ncols+1={ncols + 1}, got {col_ptr.shape}")
    if col_ptr[0] != 0 or col_ptr[-1] != len(row_idx):
        raise ValueError("col_ptr must start at 0 and end at nnz")
    counts = np.diff(col_ptr)
    if np.any(counts < 0):
        raise ValueError("col_ptr must be non-decreasing")
    if len(row_idx) == 0:
        return
    if row_idx.min() < 0 or row_idx.max() >= nrows:
        raise ValueError("row index out of range")
    col_of = np.repeat(np.arange(ncols, dtype=_INDEX), counts)
    same = col_of[1:] == col_of[:-1]
    if np.any(np.diff(row_idx)[same] <= 0):
        raise ValueError("row indices must be strictly increasing within each column")


@dataclass(frozen=True, eq=False)
class SparsityPattern:
    """Boolean compressed-column index set."""

    nrows: int
    ncols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nrows", int(self.nrows))
        object.__setattr__(self, "ncols", int(self.ncols))
        object.__setattr__(self, "col_ptr", _frozen(self.col_ptr, _INDEX))
        object.__setattr__(self, "row_idx", _frozen(self.row_idx, _INDEX))
        _check_structure(self.nrows, self.ncols, self.col_ptr, self.row_idx)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    def column(self, j: int) -> np.ndarray:
        return self.row_idx[self.col_ptr[j]:self.col_ptr[j + 1]]

    def col_counts(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def keys(self) -> np.ndarray:
        """Linear keys ``col * nrows + row``, sorted ascending."""
        cols = np.repeat(np.arange(self.ncols, dtype=_INDEX), self.col_counts())
        return cols * self.nrows + self.row_idx

    def __eq__(self, other):
        if not isinstance(other, SparsityPattern):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.col_ptr, other.col_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparsityPattern({self.nrows}x{self.ncols}, nnz={self.nnz})"

    def to_scipy(self) -> sp.csc_matrix:
        data = np.ones(self.nnz)
        return sp.csc_matrix((data, self.row_idx, self.col_ptr), shape=self.shape)

    def to_dense(self, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        _check_cap(self.shape, cap)
        out = np.zeros(self.shape, dtype=bool)
        cols = np.repeat(np.arange(self.ncols), self.col_counts())
        out[self.row_idx, cols] = True
        return out

    @classmethod
    def from_scipy(cls, M) -> "SparsityPattern":
        M = sp.csc_matrix(M)
        M.eliminate_zeros()
        M.sort_indices()
        M.sum_duplicates()
        return cls(M.shape[0], M.shape[1], M.indptr, M.indices)

    @classmethod
    def from_keys(cls, nrows: int, ncols: int, keys: np.ndarray) -> "SparsityPattern":
        keys = np.unique(np.asarray(keys, dtype=_INDEX))
        cols, rows = np.divmod(keys, nrows) if nrows else (keys, keys)
        counts = np.bincount(cols, minlength=ncols)
        col_ptr = np.concatenate([[0], np.cumsum(counts)])
        return cls(nrows, ncols, col_ptr, rows)

    @classmethod
    def from_dense(cls, mask) -> "SparsityPattern":
        mask = np.asarray(mask, dtype=bool)
        rows, cols = np.nonzero(mask.T)[::-1]
        return cls.from_keys(mask.shape[0], mask.shape[1], cols.astype(_INDEX) * mask.shape[0] + rows)

    @classmethod
    def diagonal(cls, n: int) -> "SparsityPattern":
        return cls(n, n, np.arange(n + 1), np.arange(n))

    @classmethod
    def full(cls, n: int) -> "SparsityPattern":
        return cls(n, n, np.arange(0, n * n + 1, n), np.tile(np.arange(n), n))

    @classmethod
    def empty(cls, nrows: int, ncols: int) -> "SparsityPattern":
        return cls(nrows, ncols, np.zeros(ncols + 1), np.zeros(0))


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Real compressed-column matrix with no explicitly stored zeros."""

    nrows: int
    ncols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        col_ptr = np.asarray(self.col_ptr, dtype=_INDEX)
        row_idx = np.asarray(self.row_idx, dtype=_INDEX)
        values = np.asarray(self.values, dtype=float)
        if values.shape != row_idx.shape:
            raise ValueError("values and row_idx must have equal length")
        zero = values == 0.0
        if np.any(zero):
            keep = ~zero
            cols = np.repeat(np.arange(int(self.ncols), dtype=_INDEX), np.diff(col_ptr))
            counts = np.bincount(cols[keep], minlength=int(self.ncols))
            col_ptr = np.concatenate([[0], np.cumsum(counts)])
            row_idx = row_idx[keep]
            values = values[keep]
        object.__setattr__(self, "nrows", int(self.nrows))
        object.__setattr__(self, "ncols", int(self.ncols))
        object.__setattr__(self, "col_ptr", _frozen(col_ptr, _INDEX))
        object.__setattr__(self, "row_idx", _frozen(row_idx, _INDEX))
        object.__setattr__(self, "values", _frozen(values, float))
        _check_structure(self.nrows, self.ncols, self.col_ptr, self.row_idx)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.col_ptr[-1])

    @property
    def pattern(self) -> SparsityPattern:
        return SparsityPattern(self.nrows, self.ncols, self.col_ptr, self.row_idx)

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        return self.row_idx[lo:hi], self.values[lo:hi]

    def diagonal(self) -> np.ndarray:
        return self.to_scipy().diagonal()

    def to_scipy(self) -> sp.csc_matrix:
        return sp.csc_matrix((self.values, self.row_idx, self.col_ptr), shape=self.shape)

    def to_dense(self, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        return to_dense(self, cap)

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.pattern == other.pattern and np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"

    @classmethod
    def from_scipy(cls, M) -> "SparseMatrix":
        M = sp.csc_matrix(M, dtype=float, copy=True)
        M.sum_duplicates()
        M.sort_indices()
        return cls(M.shape[0], M.shape[1], M.indptr, M.indices, M.data)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2:
            raise ValueError("from_dense expects a 2-D array")
        cols, rows = np.nonzero(a.T)
        counts = np.bincount(cols, minlength=a.shape[1])
        col_ptr = np.concatenate([[0], np.cumsum(counts)])
        return cls(a.shape[0], a.shape[1], col_ptr, rows, a[rows, cols])

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, np.arange(n + 1), np.arange(n), np.ones(n))


def from_coo(nrows: int, ncols: int, rows, cols, vals) -> SparseMatrix:
    """Build a canonical matrix from coordinate arrays, summing duplicates."""
    rows = np.asarray(rows, dtype=_INDEX).ravel()
    cols = np.asarray(cols, dtype=_INDEX).ravel()
    vals = np.asarray(vals, dtype=float).ravel()
    if not (len(rows) == len(cols) == len(vals)):
        raise ValueError("coordinate arrays must have equal length")
    bad = (rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"triplet {i} ({int(rows[i])}, {int(cols[i])}, {vals[i]!r}) out of range for {nrows}x{ncols}"
        )
    if len(vals) == 0:
        return SparseMatrix(nrows, ncols, np.zeros(ncols + 1), np.zeros(0), np.zeros(0))
    # duplicates are summed in value order so the result does not depend on input order
    order = np.lexsort((vals, rows, cols))
    rows, cols, vals = rows[order], cols[order], vals[order]
    keys = cols * nrows + rows
    starts = np.flatnonzero(np.concatenate([[True], keys[1:] != keys[:-1]]))
    summed = np.add.reduceat(vals, starts)
    rows, cols = rows[starts], cols[starts]
    counts = np.bincount(cols, minlength=ncols)
    col_ptr = np.concatenate([[0], np.cumsum(counts)])
    return SparseMatrix(nrows, ncols, col_ptr, rows, summed)


def from_triplets(nrows: int, ncols: int, triplets: Iterable[tuple[int, int, float]]) -> SparseMatrix:
    triplets = list(triplets)
    if not triplets:
        return from_coo(nrows, ncols, [], [], [])
    for t in triplets:
        r, c = int(t[0]), int(t[1])
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise ValueError(f"triplet {tuple(t)!r} out of range for {nrows}x{ncols}")
    rows, cols, vals = zip(*triplets)
    return from_coo(nrows, ncols, rows, cols, vals)


def from_dense(a) -> SparseMatrix:
    return SparseMatrix.from_dense(a)


def _check_cap(shape, cap):
    if max(shape) > cap:
        raise DenseCapError(f"refusing dense {shape[0]}x{shape[1]} array above cap {cap}")


def to_dense(A: SparseMatrix, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    _check_cap(A.shape, cap)
    out = np.zeros(A.shape)
    cols = np.repeat(np.arange(A.ncols), np.diff(A.col_ptr))
    out[A.row_idx, cols] = A.values
    return out


def pattern_of(A: SparseMatrix) -> SparsityPattern:
    return A.pattern


def is_subset(P: SparsityPattern, Q: SparsityPattern) -> bool:
    if P.shape != Q.shape:
        raise ConfigError(f"pattern dimensions differ: {P.shape} vs {Q.shape}")
    if P.nnz > Q.nnz:
        return False
    return bool(np.all(np.isin(P.keys(), Q.keys(), assume_unique=True)))


@dataclass(frozen=True)
class ChainVerdict:
    """Outcome of the nested-pattern check on a sequence.

    ``violated_at`` is the first index k with S(A_{k-1}) not contained in S(A_k).
    """

    holds: bool
    violated_at: int | None = None

    def __str__(self):
        return "holds" if self.holds else f"violated at index {self.violated_at}"


@dataclass(eq=False)
class MatrixSequence:
    entries: list[SparseMatrix]
    labels: list[str] = field(default_factory=list)
    subset_chain: ChainVerdict | None = None

    def __post_init__(self):
        self.entries = list(self.entries)
        if not self.entries:
            raise ConfigError("a matrix sequence needs at least one matrix")
        n = self.entries[0].nrows
        for k, A in enumerate(self.entries):
            if A.shape != (n, n):
                raise ConfigError(f"sequence entry {k} has shape {A.shape}, expected {(n, n)}")
        if not self.labels:
            self.labels = [f"A_{k}" for k in range(len(self.entries))]
        if len(self.labels) != len(self.entries):
            raise ConfigError("labels and entries differ in length")

    @property
    def n(self) -> int:
        return self.entries[0].nrows

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k) -> SparseMatrix:
        return self.entries[k]

    def __iter__(self):
        return iter(self.entries)


def check_sequence(seq: MatrixSequence) -> ChainVerdict:
    verdict = ChainVerdict(True)
    for k in range(1, len(seq)):
        if not is_subset(seq[k - 1].pattern, seq[k].pattern):
            verdict = ChainVerdict(False, k)
            break
    seq.subset_chain = verdict
    return verdict


def patterns_of(matrices: Sequence[SparseMatrix]) -> list[SparsityPattern]:
    return [A.pattern for A in matrices]
