"""Sparse approximate maps.

Given a source ``A_k``, a target ``A_0`` and a sparsity pattern ``S``, the
map ``N`` minimises ``||A_k N - A_0||_F`` over matrices supported on ``S``.
The Frobenius objective separates into one least-squares problem per column
of ``N``: column ``j`` only involves the columns ``J`` of ``A_k`` listed in
``S[:, j]`` and the rows ``I`` those columns touch.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .dense import lstsq_pivoted, lstsq_stack, lu_factor, lu_solve
from .errors import ConfigError
from .sparse import DEFAULT_DENSE_CAP, SparseMatrix, SparsityPattern, _check_cap


@dataclass(frozen=True, eq=False)
class ColumnProblem:
    col: int
    J: np.ndarray
    I: np.ndarray
    rhs_rows: np.ndarray
    submatrix: np.ndarray  # dense A_k[I, J]
    rhs: np.ndarray  # A_0[I, col]
    rhs_outside_sq: float  # squared norm of A_0[:, col] off I

    @property
    def shape(self) -> tuple[int, int]:
        return self.submatrix.shape


def build_column_problem(A_k: SparseMatrix, A_0: SparseMatrix, S: SparsityPattern, j: int) -> ColumnProblem:
    J = S.column(j)
    starts = A_k.col_ptr[J]
    lens = A_k.col_ptr[J + 1] - starts
    total = int(lens.sum())
    # positions of every stored entry of A_k[:, J] in row_idx/values
    offsets = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
    pos = offsets + np.arange(total)
    rows = A_k.row_idx[pos]
    I = np.unique(rows)
    M = np.zeros((len(I), len(J)))
    M[np.searchsorted(I, rows), np.repeat(np.arange(len(J)), lens)] = A_k.values[pos]

    rhs_rows, rhs_vals = A_0.column(j)
    loc = np.searchsorted(I, rhs_rows)
    inside = (loc < len(I)) & (I[np.minimum(loc, len(I) - 1)] == rhs_rows) if len(I) else np.zeros(len(rhs_rows), bool)
    b = np.zeros(len(I))
    b[loc[inside]] = rhs_vals[inside]
    out = rhs_vals[~inside]
    return ColumnProblem(int(j), J, I, rhs_rows, M, b, float(out @ out))


@dataclass(frozen=True)
class ColumnDiagnostic:
    col: int
    rows_used: int
    cols_used: int
    local_residual: float
    rank_deficient: bool


@dataclass(frozen=True, eq=False)
class SamResult:
    map: SparseMatrix
    residual_fro: float
    relative_residual: float
    nnz_pattern: int
    rows_used: np.ndarray
    cols_used: np.ndarray
    local_residual: np.ndarray
    column_residual: np.ndarray  # ||A_k n_j - A_0[:, j]|| over all rows
    rank_deficient: np.ndarray

    @property
    def nnz_map(self) -> int:
        return self.map.nnz

    @property
    def rank_deficient_cols(self) -> int:
        return int(np.count_nonzero(self.rank_deficient))

    @property
    def per_column(self) -> list[ColumnDiagnostic]:
        return [
            ColumnDiagnostic(j, int(r), int(c), float(res), bool(flag))
            for j, (r, c, res, flag) in enumerate(
                zip(self.rows_used, self.cols_used, self.local_residual, self.rank_deficient)
            )
        ]


def _check_inputs(A_k, A_0, S):
    n = A_k.nrows
    for name, X in (("A_k", A_k), ("A_0", A_0), ("S", S)):
        if X.shape != (n, n):
            raise ConfigError(f"{name} has shape {X.shape}, expected {(n, n)}")


def solve_columns(A_k: SparseMatrix, A_0: SparseMatrix, S: SparsityPattern, columns=None):
    """Solve the column subproblems listed in ``columns`` (default: all).

    Problems of equal shape are solved together; the answer for a column
    does not depend on which other columns are requested or their order.
    Returns ``{j: (x, ColumnDiagnostic)}``.
    """
    _check_inputs(A_k, A_0, S)
    cols = range(S.ncols) if columns is None else [int(j) for j in columns]
    problems = {j: build_column_problem(A_k, A_0, S, j) for j in cols}

    groups = defaultdict(list)
    for j in sorted(problems):
        groups[problems[j].shape].append(j)

    out = {}
    for (r, c), members in groups.items():
        if c == 0:
            for j in members:
                out[j] = (np.zeros(0), ColumnDiagnostic(j, r, 0, float(np.linalg.norm(problems[j].rhs)), False))
            continue
        M = np.stack([problems[j].submatrix for j in members])
        b = np.stack([problems[j].rhs for j in members])
        if r >= c and r > 0:
            X, suspect = lstsq_stack(M, b)
        else:
            X, suspect = np.zeros((len(members), c)), np.ones(len(members), dtype=bool)
        for idx, j in enumerate(members):
            p = problems[j]
            x = X[idx]
            deficient = False
            if suspect[idx]:
                x, rank = lstsq_pivoted(p.submatrix, p.rhs)
                deficient = rank < c
            res = p.submatrix @ x - p.rhs
            out[j] = (x, ColumnDiagnostic(j, r, c, float(np.sqrt(res @ res)), deficient))
    return out, problems


def compute_sam(A_k: SparseMatrix, A_0: SparseMatrix, S: SparsityPattern) -> SamResult:
    """Approximate map from ``A_k`` to ``A_0`` supported on ``S``."""
    solved, problems = solve_columns(A_k, A_0, S)
    n = S.ncols
    values = np.concatenate([solved[j][0] for j in range(n)]) if n else np.zeros(0)
    N = SparseMatrix(S.nrows, n, S.col_ptr, S.row_idx, values)

    diags = [solved[j][1] for j in range(n)]
    local = np.array([d.local_residual for d in diags])
    outside = np.array([problems[j].rhs_outside_sq for j in range(n)])
    residual_fro, relative = residual_norms(A_k, A_0, N)
    return SamResult(
        map=N,
        residual_fro=residual_fro,
        relative_residual=relative,
        nnz_pattern=S.nnz,
        rows_used=np.array([d.rows_used for d in diags], dtype=np.int64),
        cols_used=np.array([d.cols_used for d in diags], dtype=np.int64),
        local_residual=local,
        column_residual=np.sqrt(local**2 + outside),
        rank_deficient=np.array([d.rank_deficient for d in diags], dtype=bool),
    )


def residual_norms(A_k: SparseMatrix, A_0: SparseMatrix, N) -> tuple[float, float]:
    """``(||A_k N - A_0||_F, ||A_k N - A_0||_F / ||A_0||_F)``.

    ``N`` may be a :class:`SparseMatrix` (product formed sparsely) or a dense
    array.
    """
    if isinstance(N, SparseMatrix):
        if N.nrows != A_k.ncols or N.ncols != A_0.ncols or A_k.nrows != A_0.nrows:
            raise ConfigError("residual_norms: non-conformable operands")
        R = (A_k.to_scipy() @ N.to_scipy() - A_0.to_scipy()).tocsc()
        fro = float(np.linalg.norm(R.data))
    else:
        N = np.asarray(N, dtype=float)
        R = A_k.to_scipy() @ N - A_0.to_scipy().toarray()
        fro = float(np.linalg.norm(R))
    ref = A_0.fro_norm()
    if ref == 0.0:
        return fro, 0.0 if fro == 0.0 else float("inf")
    return fro, fro / ref


def exact_map(A_k: SparseMatrix, A_0: SparseMatrix, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense ``A_k^{-1} A_0`` by LU with partial pivoting."""
    if A_k.shape != A_0.shape or A_k.nrows != A_k.ncols:
        raise ConfigError(f"exact_map needs equal square shapes, got {A_k.shape} and {A_0.shape}")
    _check_cap(A_k.shape, cap)
    LU, piv = lu_factor(A_k.to_dense(cap))
    return lu_solve(LU, piv, A_0.to_dense(cap))


def sparsify_dense_map(Nhat, drop_tol: float) -> SparsityPattern:
    """Pattern of the entries with ``|entry| > drop_tol``."""
    if drop_tol < 0:
        raise ConfigError(f"drop_tol must be >= 0, got {drop_tol}")
    return SparsityPattern.from_dense(np.abs(np.asarray(Nhat)) > drop_tol)
