"""Sparse approximate maps (SAMs) between matrices of a sequence of sparse linear systems."""

from .errors import (
    ConfigError,
    DenseCapError,
    LineSearchError,
    MatrixMarketError,
    NumericalError,
    SamError,
    SingularMatrixError,
)
from .experiment import ExperimentConfig, ReportRow, run_closure_check, run_exactmap_study, run_experiment
from .mmio import read_matrix_market, read_sequence, write_matrix_market, write_sequence
from .patterns import (
    PatternRecipe,
    SparsificationStrategy,
    expand_level,
    parse_recipe,
    pattern_multiply,
    sparsify_column_threshold,
    sparsify_global,
    sparsify_lfil,
    transitive_closure,
    union_with_diagonal,
)
from .problems import Cd2dConfig, ShiftedConfig, generate_cd2d_sequence, generate_shifted_sequence
from .sam import SamResult, build_column_problem, compute_sam, exact_map, residual_norms, sparsify_dense_map
from .sparse import (
    MatrixSequence,
    SparseMatrix,
    SparsityPattern,
    check_sequence,
    from_dense,
    from_triplets,
    is_subset,
    pattern_of,
    to_dense,
)

__version__ = "0.1.0"
