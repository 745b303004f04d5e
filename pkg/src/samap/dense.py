"""Small dense kernels: Householder least squares and LU with partial pivoting.

Column subproblems of an approximate map are tiny (tens of rows), so the
least-squares path is written for stacks of equally shaped problems solved
in lockstep.  Each problem in a stack is processed with exactly the same
sequence of elementwise operations, so its solution does not depend on
which other problems share the stack.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError

RANK_TOL = 1e-12
SINGULAR_TOL = 1e-14
# unpivoted solves whose smallest |R_kk| falls below this fraction of the
# largest column norm are re-solved with column pivoting
SUSPECT_TOL = 1e-8

_BLOCK = 64


def _reflector(x):
    """Householder vector for each row of ``x`` (shape (B, m)).

    Returns ``v, beta, alpha`` with ``(I - beta v v^T) x = alpha e_1``.
    ``beta`` is 0 where ``x`` is identically zero.
    """
    norm = np.sqrt(np.sum(x * x, axis=1))
    sign = np.where(x[:, 0] >= 0, 1.0, -1.0)
    alpha = -sign * norm
    v = x.copy()
    v[:, 0] -= alpha
    vv = np.sum(v * v, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(vv > 0, 2.0 / vv, 0.0)
    return v, beta, alpha


def householder_qr_stack(M, b):
    """Unpivoted Householder QR applied to a stack of problems.

    ``M`` has shape (B, r, c) with r >= c and ``b`` shape (B, r).  Returns
    the upper-triangular factors (B, c, c) and ``Q^T b`` (B, r).
    """
    R = np.array(M, dtype=float)
    qtb = np.array(b, dtype=float)
    nb, r, c = R.shape
    for k in range(min(r, c)):
        v, beta, alpha = _reflector(R[:, k:, k])
        block = R[:, k:, k + 1:]
        w = np.sum(v[:, :, None] * block, axis=1)
        block -= (beta[:, None] * v)[:, :, None] * w[:, None, :]
        R[:, k, k] = alpha
        R[:, k + 1:, k] = 0.0
        tb = qtb[:, k:]
        tb -= (beta * np.sum(v * tb, axis=1))[:, None] * v
    return R[:, :c, :c], qtb


def _back_substitute_stack(R, y):
    nb, c, _ = R.shape
    x = np.zeros((nb, c))
    for k in range(c - 1, -1, -1):
        s = y[:, k] - np.sum(R[:, k, k + 1:] * x[:, k + 1:], axis=1)
        x[:, k] = s / R[:, k, k]
    return x


def lstsq_stack(M, b):
    """Least-squares solutions of a stack of full-column-rank problems.

    Returns ``x`` (B, c) and a boolean mask of problems whose triangular
    factor looks close to singular; those need :func:`lstsq_pivoted`.
    """
    M = np.asarray(M, dtype=float)
    nb, r, c = M.shape
    if r < c:
        return np.zeros((nb, c)), np.ones(nb, dtype=bool)
    colnorm = np.sqrt(np.max(np.sum(M * M, axis=1), axis=1))
    R, qtb = householder_qr_stack(M, b)
    diag = np.abs(np.diagonal(R, axis1=1, axis2=2))
    suspect = np.min(diag, axis=1) <= SUSPECT_TOL * colnorm
    safe = np.where(suspect[:, None, None], np.eye(c), R)
    x = _back_substitute_stack(safe, qtb[:, :c])
    x[suspect] = 0.0
    return x, suspect


def _qr_pivoted(M, b):
    A = np.array(M, dtype=float)
    qtb = np.array(b, dtype=float)
    r, c = A.shape
    perm = np.arange(c)
    for k in range(min(r, c)):
        norms = np.sum(A[k:, k:] ** 2, axis=0)
        p = k + int(np.argmax(norms))
        if p != k:
            A[:, [k, p]] = A[:, [p, k]]
            perm[[k, p]] = perm[[p, k]]
        v, beta, alpha = _reflector(A[None, k:, k])
        v, beta = v[0], beta[0]
        A[k:, k + 1:] -= beta * np.outer(v, v @ A[k:, k + 1:])
        A[k, k] = alpha[0]
        A[k + 1:, k] = 0.0
        qtb[k:] -= beta * (v @ qtb[k:]) * v
    return A, qtb, perm


def lstsq_pivoted(M, b, rank_tol=RANK_TOL):
    """Minimum-norm least-squares solution via column-pivoted Householder QR.

    The numerical rank counts the leading pivots with
    ``|R_kk| > rank_tol * max_j ||M[:, j]||``.  When the rank is deficient
    the trailing block is eliminated with a second QR (complete orthogonal
    decomposition) so the returned solution has minimum 2-norm.

    Returns ``(x, rank)``.
    """
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    r, c = M.shape
    x = np.zeros(c)
    if r == 0 or c == 0:
        return x, 0
    colmax = float(np.sqrt(np.max(np.sum(M * M, axis=0))))
    if colmax == 0.0:
        return x, 0
    A, qtb, perm = _qr_pivoted(M, b)
    d = np.abs(np.diag(A))
    rank = 0
    while rank < len(d) and d[rank] > rank_tol * colmax:
        rank += 1
    if rank == 0:
        return x, 0
    T = A[:rank, :]
    if rank == c:
        y = _back_substitute_stack(T[None], qtb[None, :rank])[0]
    else:
        # T = [R11 R12] has full row rank; T^T = Q2 [L^T; 0] gives y = Q2[:, :rank] L^{-1} d
        Q2, R2 = _explicit_qr(T.T)
        L = R2.T
        z = _forward_substitute(L, qtb[:rank])
        y = Q2[:, :rank] @ z
    x[perm] = y
    return x, rank


def _explicit_qr(A):
    """Householder QR of ``A`` (m x n, m >= n) with explicit square ``Q``."""
    m, n = A.shape
    work = np.array(A, dtype=float)
    Q = np.eye(m)
    for k in range(n):
        v, beta, alpha = _reflector(work[None, k:, k])
        v, beta = v[0], beta[0]
        work[k:, k + 1:] -= beta * np.outer(v, v @ work[k:, k + 1:])
        work[k, k] = alpha[0]
        work[k + 1:, k] = 0.0
        Q[:, k:] -= beta * np.outer(Q[:, k:] @ v, v)
    return Q, work[:n, :n]


def _forward_substitute(L, y, unit=False):
    n = L.shape[0]
    x = np.zeros_like(np.asarray(y, dtype=float))
    for k in range(n):
        s = y[k] - L[k, :k] @ x[:k]
        x[k] = s if unit else s / L[k, k]
    return x


def dense_least_squares(M, b) -> np.ndarray:
    """Minimiser of ``||M m - b||_2``; minimum-norm when ``M`` is rank deficient."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if M.shape[0] != b.shape[0]:
        raise ValueError(f"M has {M.shape[0]} rows but b has {b.shape[0]}")
    if M.shape[0] >= M.shape[1]:
        x, suspect = lstsq_stack(M[None], b[None])
        if not suspect[0]:
            return x[0]
    return lstsq_pivoted(M, b)[0]


# -- LU ------------------------------------------------------------------


def lu_factor(A, singular_tol=SINGULAR_TOL):
    """Blocked right-looking LU with partial pivoting: ``A[piv] = L U``.

    Returns ``(LU, piv)`` with unit-lower ``L`` and ``U`` packed into one
    array.  Raises :class:`SingularMatrixError` when a pivot magnitude is at
    or below ``singular_tol * ||A||_inf``.
    """
    LU = np.array(A, dtype=float)
    n = LU.shape[0]
    if LU.shape != (n, n):
        raise ValueError(f"lu_factor needs a square matrix, got {LU.shape}")
    piv = np.arange(n)
    scale = float(np.max(np.sum(np.abs(LU), axis=1))) if n else 0.0
    tol = singular_tol * scale
    for k0 in range(0, n, _BLOCK):
        k1 = min(k0 + _BLOCK, n)
        for j in range(k0, k1):
            p = j + int(np.argmax(np.abs(LU[j:, j])))
            if not abs(LU[p, j]) > tol:
                raise SingularMatrixError(
                    f"matrix is numerically singular: pivot {abs(LU[p, j]):.3e} at column {j} "
                    f"<= {singular_tol:g} * ||A||_inf"
                )
            if p != j:
                LU[[j, p]] = LU[[p, j]]
                piv[[j, p]] = piv[[p, j]]
            LU[j + 1:, j] /= LU[j, j]
            LU[j + 1:, j + 1:k1] -= np.outer(LU[j + 1:, j], LU[j, j + 1:k1])
        if k1 < n:
            L11 = LU[k0:k1, k0:k1]
            for j in range(k0 + 1, k1):
                LU[j, k1:] -= L11[j - k0, : j - k0] @ LU[k0:j, k1:]
            LU[k1:, k1:] -= LU[k1:, k0:k1] @ LU[k0:k1, k1:]
    return LU, piv


def _solve_lower_unit(LU, B):
    n = LU.shape[0]
    X = B
    for k0 in range(0, n, _BLOCK):
        k1 = min(k0 + _BLOCK, n)
        for j in range(k0 + 1, k1):
            X[j] -= LU[j, k0:j] @ X[k0:j]
        if k1 < n:
            X[k1:] -= LU[k1:, k0:k1] @ X[k0:k1]
    return X


def _solve_upper(LU, B):
    n = LU.shape[0]
    X = B
    starts = list(range(0, n, _BLOCK))
    for k0 in reversed(starts):
        k1 = min(k0 + _BLOCK, n)
        for j in range(k1 - 1, k0 - 1, -1):
            X[j] -= LU[j, j + 1:k1] @ X[j + 1:k1]
            X[j] /= LU[j, j]
        if k0 > 0:
            X[:k0] -= LU[:k0, k0:k1] @ X[k0:k1]
    return X


def lu_solve(LU, piv, B):
    """Solve ``A X = B`` given the factors of :func:`lu_factor`."""
    B = np.asarray(B, dtype=float)
    vec = B.ndim == 1
    X = np.array(B[piv], dtype=float)
    if vec:
        X = X[:, None]
    X = _solve_upper(LU, _solve_lower_unit(LU, X))
    return X[:, 0] if vec else X


def dense_solve(A, B, singular_tol=SINGULAR_TOL):
    LU, piv = lu_factor(A, singular_tol)
    return lu_solve(LU, piv, B)
