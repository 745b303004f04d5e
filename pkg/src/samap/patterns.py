"""A-priori sparsity patterns for approximate maps.

Three ways of sparsifying a matrix (global scaled threshold, per-column
relative threshold, fixed number of entries per column), neighbour-level
expansion through boolean powers, and transitive closure.  Every
sparsification keeps the full diagonal.

Level naming: ``expand_level(P, l)`` is the boolean power ``P**(l + 1)`` of
the diagonal-augmented pattern, so level 0 is the sparsified pattern itself,
level 1 its square and level 2 its cube.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DenseCapError
from .sparse import SparseMatrix, SparsityPattern

DEFAULT_CLOSURE_CAP = 2048

GLOBAL = "global_threshold"
COLUMN = "column_threshold"
FIXED = "fixed_nnz"


@dataclass(frozen=True)
class SparsificationStrategy:
    kind: str
    thresh: float = 0.0
    tau: float = 0.0
    lfil: int = 1
    scaling_mode: str = "normalized"

    def __post_init__(self):
        if self.kind not in (GLOBAL, COLUMN, FIXED):
            raise ConfigError(f"unknown sparsification kind {self.kind!r}")
        if self.kind == GLOBAL:
            if not self.thresh >= 0:
                raise ConfigError(f"thresh must be >= 0, got {self.thresh}")
            if self.scaling_mode not in ("normalized", "literal"):
                raise ConfigError(f"scaling_mode must be normalized or literal, got {self.scaling_mode!r}")
        elif self.kind == COLUMN and not 0.0 <= self.tau <= 1.0:
            raise ConfigError(f"tau must lie in [0, 1], got {self.tau}")
        elif self.kind == FIXED and self.lfil < 1:
            raise ConfigError(f"lfil must be >= 1, got {self.lfil}")

    def apply(self, A: SparseMatrix) -> SparsityPattern:
        if self.kind == GLOBAL:
            return sparsify_global(A, self.thresh, self.scaling_mode)
        if self.kind == COLUMN:
            return sparsify_column_threshold(A, self.tau)
        return sparsify_lfil(A, self.lfil)

    @property
    def label(self) -> str:
        if self.kind == GLOBAL:
            suffix = ":literal" if self.scaling_mode == "literal" else ""
            return f"global:{self.thresh:g}{suffix}"
        if self.kind == COLUMN:
            return f"col:{self.tau:g}"
        return f"lfil:{self.lfil}"


SOURCE = "source"
TARGET = "target"


@dataclass(frozen=True)
class PatternRecipe:
    """How to build the map pattern for one (source, target) pair.

    ``strategy=None`` uses the raw pattern of ``source``; otherwise the
    strategy sparsifies the chosen matrix.  The result is then expanded to
    neighbour ``level``.
    """

    strategy: SparsificationStrategy | None = None
    level: int = 0
    source: str = SOURCE

    def __post_init__(self):
        if self.level < 0:
            raise ConfigError(f"level must be >= 0, got {self.level}")
        if self.source not in (SOURCE, TARGET):
            raise ConfigError(f"source must be 'source' or 'target', got {self.source!r}")

    @property
    def label(self) -> str:
        if self.strategy is None:
            base = self.source
        else:
            base = self.strategy.label if self.source == SOURCE else f"target/{self.strategy.label}"
        return base if self.level == 0 else f"{base}@level{self.level}"

    def build(self, A_k: SparseMatrix, A_0: SparseMatrix) -> SparsityPattern:
        B = A_k if self.source == SOURCE else A_0
        P = B.pattern if self.strategy is None else self.strategy.apply(B)
        return expand_level(P, self.level)


_LEVEL = re.compile(r"^(?P<base>.+?)@level(?P<level>\d+)$")


def parse_recipe(text: str) -> PatternRecipe:
    """Parse ``target``, ``source``, ``global:<t>[:literal]``, ``col:<tau>`` or
    ``lfil:<k>``, each optionally prefixed with ``target/`` (sparsify A_0
    instead of A_k) and suffixed with ``@level<l>``.
    """
    spec = text.strip()
    level = 0
    m = _LEVEL.match(spec)
    if m:
        spec, level = m["base"], int(m["level"])
    source = SOURCE
    if spec in (TARGET, SOURCE):
        return PatternRecipe(None, level, spec)
    if spec.startswith("target/"):
        source, spec = TARGET, spec[len("target/"):]
    parts = spec.split(":")
    try:
        if parts[0] == "global" and len(parts) in (2, 3):
            mode = "normalized"
            if len(parts) == 3:
                if parts[2] != "literal":
                    raise ConfigError(f"unknown global modifier {parts[2]!r} in {text!r}")
                mode = "literal"
            strategy = SparsificationStrategy(GLOBAL, thresh=float(parts[1]), scaling_mode=mode)
        elif parts[0] == "col" and len(parts) == 2:
            strategy = SparsificationStrategy(COLUMN, tau=float(parts[1]))
        elif parts[0] == "lfil" and len(parts) == 2:
            strategy = SparsificationStrategy(FIXED, lfil=int(parts[1]))
        else:
            raise ConfigError(f"cannot parse recipe {text!r}")
    except ValueError:
        raise ConfigError(f"bad numeric parameter in recipe {text!r}") from None
    return PatternRecipe(strategy, level, source)


def _require_square(A):
    if A.nrows != A.ncols:
        raise ConfigError(f"expected a square matrix, got {A.nrows}x{A.ncols}")


def _columns_of(A):
    return np.repeat(np.arange(A.ncols, dtype=np.int64), np.diff(A.col_ptr))


def _keep(A, mask) -> SparsityPattern:
    """Pattern of the entries of ``A`` selected by ``mask``, plus the diagonal."""
    cols = _columns_of(A)
    keys = cols[mask] * A.nrows + A.row_idx[mask]
    diag = np.arange(A.ncols, dtype=np.int64) * (A.nrows + 1)
    return SparsityPattern.from_keys(A.nrows, A.ncols, np.concatenate([keys, diag]))


def sparsify_global(A: SparseMatrix, thresh: float, scaling_mode: str = "normalized") -> SparsityPattern:
    """Keep off-diagonals whose diagonally scaled magnitude exceeds ``thresh``.

    The scaling uses ``d_i = |a_ii|`` (1 where the diagonal vanishes).
    ``normalized`` compares ``|a_ij| / sqrt(d_i d_j)``, which gives the
    scaled matrix a unit diagonal; ``literal`` compares
    ``|a_ij| * sqrt(d_i d_j)``.
    """
    _require_square(A)
    d = np.abs(A.diagonal())
    d[d == 0] = 1.0
    cols = _columns_of(A)
    s = np.sqrt(d[A.row_idx] * d[cols])
    if scaling_mode == "normalized":
        scaled = np.abs(A.values) / s
    elif scaling_mode == "literal":
        scaled = np.abs(A.values) * s
    else:
        raise ConfigError(f"unknown scaling_mode {scaling_mode!r}")
    return _keep(A, scaled > thresh)


def _column_max(A):
    """Largest stored magnitude in each column (0 for empty columns)."""
    out = np.zeros(A.ncols)
    if A.nnz:
        np.maximum.at(out, _columns_of(A), np.abs(A.values))
    return out


def sparsify_column_threshold(A: SparseMatrix, tau: float) -> SparsityPattern:
    """Keep ``|a_ij| > (1 - tau) * max_i |a_ij|`` column by column."""
    _require_square(A)
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    cutoff = (1.0 - tau) * _column_max(A)
    return _keep(A, np.abs(A.values) > cutoff[_columns_of(A)])


def sparsify_lfil(A: SparseMatrix, lfil: int) -> SparsityPattern:
    """Keep the ``lfil`` largest-magnitude entries of each column.

    Equal magnitudes go to the smaller row index.  Columns with at most
    ``lfil`` stored entries are kept whole.
    """
    _require_square(A)
    if lfil < 1:
        raise ConfigError(f"lfil must be >= 1, got {lfil}")
    cols = _columns_of(A)
    # sort within each column by decreasing magnitude, then row
    order = np.lexsort((A.row_idx, -np.abs(A.values), cols))
    rank = np.empty(A.nnz, dtype=np.int64)
    rank[order] = np.arange(A.nnz) - A.col_ptr[cols[order]]
    return _keep(A, rank < lfil)


def _check_conformable(P, Q):
    if P.ncols != Q.nrows:
        raise ConfigError(f"patterns not conformable: {P.shape} x {Q.shape}")


def pattern_multiply(P: SparsityPattern, Q: SparsityPattern) -> SparsityPattern:
    """Boolean product: (i, j) present iff some m has (i, m) in P and (m, j) in Q."""
    _check_conformable(P, Q)
    # counts of paths are positive integers, exact in floating point for any n we can hold
    C = (P.to_scipy() @ Q.to_scipy()).tocsc()
    C.sort_indices()
    return SparsityPattern(C.shape[0], C.shape[1], C.indptr, C.indices)


def union_with_diagonal(P: SparsityPattern) -> SparsityPattern:
    if P.nrows != P.ncols:
        raise ConfigError(f"expected a square pattern, got {P.shape}")
    n = P.nrows
    diag = np.arange(n, dtype=np.int64) * (n + 1)
    if P.nnz and np.all(np.isin(diag, P.keys(), assume_unique=True)):
        return P
    return SparsityPattern.from_keys(n, n, np.concatenate([P.keys(), diag]))


def expand_level(P: SparsityPattern, level: int) -> SparsityPattern:
    """Neighbour level ``level``: the boolean power ``(P + I)**(level + 1)``."""
    if level < 0:
        raise ConfigError(f"level must be >= 0, got {level}")
    base = union_with_diagonal(P)
    out = base
    for _ in range(level):
        out = pattern_multiply(out, base)
    return out


def transitive_closure(P: SparsityPattern, cap: int = DEFAULT_CLOSURE_CAP) -> SparsityPattern:
    """Reachability pattern of the adjacency graph, by repeated squaring."""
    if P.nrows != P.ncols:
        raise ConfigError(f"expected a square pattern, got {P.shape}")
    if P.nrows > cap:
        raise DenseCapError(f"refusing transitive closure for n={P.nrows} above cap {cap}")
    cur = union_with_diagonal(P)
    while True:
        nxt = pattern_multiply(cur, cur)
        if nxt.nnz == cur.nnz:
            # cur contains the diagonal, so cur is a subset of nxt; equal counts mean equal sets
            return cur
        cur = nxt
