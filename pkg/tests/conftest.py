import numpy as np
import pytest

from samap.problems import EXAMPLE_A0, EXAMPLE_A1, closure_example_pair
from samap.sparse import SparseMatrix

_CRITERIA = []


def record_criterion(number, name, passed, detail=""):
    line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
    _CRITERIA.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def example_boolean():
    """The worked-example matrices with unit values (A_1 is singular this way)."""
    return SparseMatrix.from_dense(EXAMPLE_A0.astype(float)), SparseMatrix.from_dense(EXAMPLE_A1.astype(float))


@pytest.fixture
def example_pair():
    return closure_example_pair(seed=0)


def random_sparse(rng, n, density, diag=None, ncols=None):
    """Random sparse matrix; ``diag`` adds that value times a random sign-free factor on the diagonal."""
    ncols = n if ncols is None else ncols
    mask = rng.random((n, ncols)) < density
    vals = rng.standard_normal((n, ncols)) * mask
    if diag is not None:
        idx = np.arange(min(n, ncols))
        vals[idx, idx] = diag * (1.0 + rng.random(len(idx)))
    return SparseMatrix.from_dense(vals)


def random_pattern_dense(rng, n, density, with_diagonal=True):
    mask = rng.random((n, n)) < density
    if with_diagonal:
        mask[np.arange(n), np.arange(n)] = True
    return mask
