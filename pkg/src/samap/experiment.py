"""Experiment runners behind the CLI: map sweeps, closure check, exact-map study."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError, DenseCapError
from .mmio import read_matrix_market, read_sequence
from .patterns import DEFAULT_CLOSURE_CAP, PatternRecipe, parse_recipe, transitive_closure
from .problems import Cd2dConfig, ShiftedConfig, generate_cd2d_sequence, generate_shifted_sequence
from .sam import compute_sam, exact_map, sparsify_dense_map
from .sparse import DEFAULT_DENSE_CAP, MatrixSequence, SparseMatrix, SparsityPattern, check_sequence, is_subset

DEFAULT_RECIPES = ("target", "col:0.8@level1", "lfil:5@level1")
RUN_COLUMNS = ("k", "recipe", "nnz_pattern", "nnz_map", "rel_residual", "rank_def_cols", "wall_ms")
STUDY_COLUMNS = ("k", "drop_tol", "nnz")

SequenceSource = Union[Cd2dConfig, ShiftedConfig, MatrixSequence, str, Path]


@dataclass
class ExperimentConfig:
    sequence_source: SequenceSource
    target_index: int = 0
    recipes: list = field(default_factory=lambda: list(DEFAULT_RECIPES))
    output_dir: Path | None = None
    dense_cap: int = DEFAULT_DENSE_CAP
    drop_tols: list[float] = field(default_factory=lambda: [1e-2, 1e-4])

    def __post_init__(self):
        if not self.recipes:
            raise ConfigError("at least one recipe is required")
        self.recipes = [r if isinstance(r, PatternRecipe) else parse_recipe(r) for r in self.recipes]
        labels = [r.label for r in self.recipes]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate recipes: {labels}")
        if any(t < 0 for t in self.drop_tols):
            raise ConfigError("drop tolerances must be >= 0")
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)

    def load_sequence(self) -> MatrixSequence:
        src = self.sequence_source
        if isinstance(src, MatrixSequence):
            seq = src
        elif isinstance(src, Cd2dConfig):
            seq = generate_cd2d_sequence(src)
        elif isinstance(src, ShiftedConfig):
            seq = generate_shifted_sequence(src)
        else:
            seq = read_sequence(src)
        if not 0 <= self.target_index < len(seq):
            raise ConfigError(f"target index {self.target_index} outside sequence of length {len(seq)}")
        return seq


@dataclass(frozen=True)
class ReportRow:
    k: int
    recipe_label: str
    nnz_pattern: int
    nnz_map: int
    relative_residual: float
    rank_deficient_cols: int
    wall_ms: float

    def csv_fields(self) -> list[str]:
        return [
            str(self.k),
            self.recipe_label,
            str(self.nnz_pattern),
            str(self.nnz_map),
            f"{self.relative_residual:.17g}",
            str(self.rank_deficient_cols),
            f"{self.wall_ms:.3f}",
        ]


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def run_experiment(cfg: ExperimentConfig, seq: MatrixSequence | None = None) -> list[ReportRow]:
    """Map every non-target matrix to the target under every recipe.

    Rows come out k-major, recipe-minor.  With ``cfg.output_dir`` set the
    rows are also written to ``run.csv`` there.
    """
    seq = cfg.load_sequence() if seq is None else seq
    check_sequence(seq)
    A_0 = seq[cfg.target_index]
    rows = []
    for k, A_k in enumerate(seq):
        if k == cfg.target_index:
            continue
        for recipe in cfg.recipes:
            t0 = time.perf_counter()
            S = recipe.build(A_k, A_0)
            res = compute_sam(A_k, A_0, S)
            ms = 1e3 * (time.perf_counter() - t0)
            rows.append(
                ReportRow(k, recipe.label, res.nnz_pattern, res.nnz_map, res.relative_residual,
                          res.rank_deficient_cols, ms)
            )
    if cfg.output_dir is not None:
        _write_csv(cfg.output_dir / "run.csv", RUN_COLUMNS, [r.csv_fields() for r in rows])
    return rows


@dataclass(frozen=True, eq=False)
class ClosureVerdict:
    subset_holds: bool  # S(target) within S(source)
    map_pattern: SparsityPattern
    closure_pattern: SparsityPattern
    drop_tol: float = 1e-12

    @property
    def patterns_equal(self) -> bool:
        return self.map_pattern == self.closure_pattern

    @property
    def passed(self) -> bool:
        return self.subset_holds and self.patterns_equal

    def summary(self) -> str:
        return "\n".join([
            f"subset S(target) <= S(source): {'yes' if self.subset_holds else 'no'}",
            f"nnz exact map (|x| > {self.drop_tol:g}): {self.map_pattern.nnz}",
            f"nnz transitive closure: {self.closure_pattern.nnz}",
            f"patterns equal: {'yes' if self.patterns_equal else 'no'}",
            f"verdict: {'PASS' if self.passed else 'FAIL'}",
        ])


def _as_matrix(x) -> SparseMatrix:
    return x if isinstance(x, SparseMatrix) else read_matrix_market(x)


def run_closure_check(source, target, drop_tol: float = 1e-12, cap: int = DEFAULT_CLOSURE_CAP) -> ClosureVerdict:
    """Compare the support of ``source^{-1} target`` with the closure of S(source)."""
    A, B = _as_matrix(source), _as_matrix(target)
    if A.shape != B.shape:
        raise ConfigError(f"shapes differ: {A.shape} vs {B.shape}")
    closure = transitive_closure(A.pattern, cap=cap)
    Nhat = exact_map(A, B, cap=cap)
    return ClosureVerdict(is_subset(B.pattern, A.pattern), sparsify_dense_map(Nhat, drop_tol), closure, drop_tol)


def run_exactmap_study(cfg: ExperimentConfig, seq: MatrixSequence | None = None) -> list[tuple[int, float, int]]:
    """nnz of the exact map to the target, thresholded at each drop tolerance."""
    seq = cfg.load_sequence() if seq is None else seq
    if seq.n > cfg.dense_cap:
        raise DenseCapError(f"exact-map study needs n <= dense cap {cfg.dense_cap}, got n={seq.n}")
    A_0 = seq[cfg.target_index]
    rows = []
    for k, A_k in enumerate(seq):
        Nhat = exact_map(A_k, A_0, cap=cfg.dense_cap)
        mag = np.abs(Nhat)
        for tol in cfg.drop_tols:
            rows.append((k, float(tol), int(np.count_nonzero(mag > tol))))
    if cfg.output_dir is not None:
        _write_csv(cfg.output_dir / "exactmap.csv", STUDY_COLUMNS,
                   [[str(k), f"{t:.17g}", str(c)] for k, t, c in rows])
    return rows


def read_run_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
