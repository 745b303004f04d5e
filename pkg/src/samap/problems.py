"""Matrix-sequence generators.

``cd2d``: Jacobians along a damped Newton iteration for the nonlinear
convection-diffusion problem

    -div((eta + gamma u^2) grad u) + r u_x + s u_y + t u = f

on the unit square, discretised with central differences on an m x m
interior grid (h = 1/(m+1)).  Diffusion is in conservative form with
face coefficients averaged arithmetically from the two adjacent nodes.
Unknowns are ordered with x varying fastest.

``shifted``: K + sigma_k M for the scaled five-point Laplacian K, a
stand-in for the shifted systems of transient hydraulic tomography.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, LineSearchError
from .sparse import MatrixSequence, SparseMatrix, from_coo

log = logging.getLogger(__name__)


def left_boundary(y):
    return 0.2 + y * (1.0 - y**2)


@dataclass
class Cd2dConfig:
    m: int = 64
    eta: float = 0.1
    gamma: float = 1.0
    r: float = 1.0
    s: float = 1.0
    t_coef: float = 0.0
    f_rhs: float = 0.0
    newton_tol: float = 1e-8
    max_newton: int = 100
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    min_step: float = 1e-12

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError(f"m must be >= 2, got {self.m}")
        if not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if not (self.newton_tol > 0 and self.armijo_c > 0 and 0 < self.backtrack_factor < 1):
            raise ConfigError("newton_tol and armijo_c must be positive, backtrack_factor in (0, 1)")
        if self.max_newton < 1:
            raise ConfigError(f"max_newton must be >= 1, got {self.max_newton}")

    @property
    def n(self) -> int:
        return self.m * self.m

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)


def _extended(u, cfg):
    """Grid values including the Dirichlet ring, shape (m+2, m+2), indexed [y, x]."""
    m = cfg.m
    u = np.asarray(u, dtype=float)
    if u.shape != (m * m,):
        raise ConfigError(f"state must have length {m * m}, got {u.shape}")
    U = np.zeros((m + 2, m + 2))
    U[1:-1, 1:-1] = u.reshape(m, m)
    y = np.arange(m + 2) * cfg.h
    U[1:-1, 0] = left_boundary(y[1:-1])
    return U


def _kappa(U, cfg):
    return cfg.eta + cfg.gamma * U**2


# neighbour offsets (dy, dx) and the sign of the central-difference convection term
_NEIGHBOURS = {
    "E": ((0, 1), "r", +1.0),
    "W": ((0, -1), "r", -1.0),
    "N": ((1, 0), "s", +1.0),
    "S": ((-1, 0), "s", -1.0),
}


def _shift(A, dy, dx):
    m = A.shape[0] - 2
    return A[1 + dy:1 + dy + m, 1 + dx:1 + dx + m]


def assemble_cd2d_residual(u, cfg: Cd2dConfig) -> np.ndarray:
    U = _extended(u, cfg)
    K = _kappa(U, cfg)
    h = cfg.h
    P, KP = _shift(U, 0, 0), _shift(K, 0, 0)
    F = cfg.t_coef * P - cfg.f_rhs
    for (dy, dx), coef, sgn in _NEIGHBOURS.values():
        Q, KQ = _shift(U, dy, dx), _shift(K, dy, dx)
        F = F - 0.5 * (KP + KQ) * (Q - P) / h**2
        F = F + sgn * getattr(cfg, coef) * Q / (2 * h)
    return F.ravel()


def assemble_cd2d_jacobian(u, cfg: Cd2dConfig) -> SparseMatrix:
    m, h = cfg.m, cfg.h
    U = _extended(u, cfg)
    K = _kappa(U, cfg)
    dK = 2.0 * cfg.gamma * U
    P, KP, dKP = _shift(U, 0, 0), _shift(K, 0, 0), _shift(dK, 0, 0)
    idx = np.arange(m * m).reshape(m, m)
    jy, ix = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")

    rows, cols, vals = [], [], []
    diag = np.full((m, m), cfg.t_coef)
    for (dy, dx), coef, sgn in _NEIGHBOURS.values():
        Q, KQ, dKQ = _shift(U, dy, dx), _shift(K, dy, dx), _shift(dK, dy, dx)
        face = 0.5 * (KP + KQ)
        diag -= (0.5 * dKP * (Q - P) - face) / h**2
        off = -(0.5 * dKQ * (Q - P) + face) / h**2 + sgn * getattr(cfg, coef) / (2 * h)
        ny, nx = jy + dy, ix + dx
        inside = (ny >= 0) & (ny < m) & (nx >= 0) & (nx < m)
        rows.append(idx[inside])
        cols.append(idx[ny[inside], nx[inside]])
        vals.append(off[inside])
    rows.append(idx.ravel())
    cols.append(idx.ravel())
    vals.append(diag.ravel())
    n = m * m
    return from_coo(n, n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


@dataclass
class NewtonTrace:
    u: np.ndarray
    residual_norms: list[float] = field(default_factory=list)
    step_lengths: list[float] = field(default_factory=list)
    jacobians: list[SparseMatrix] = field(default_factory=list)
    converged: bool = False


def newton_solve(cfg: Cd2dConfig, u0=None) -> NewtonTrace:
    """Damped Newton with Armijo backtracking on ``0.5 ||F||^2``.

    ``residual_norms[k]`` is ``||F(u_k)||_2`` for every accepted iterate,
    ``jacobians[k]`` the Jacobian at ``u_k`` used for the k-th step.
    """
    u = np.zeros(cfg.n) if u0 is None else np.array(u0, dtype=float)
    F = assemble_cd2d_residual(u, cfg)
    fnorm = float(np.linalg.norm(F))
    trace = NewtonTrace(u=u, residual_norms=[fnorm])
    for _ in range(cfg.max_newton):
        if fnorm < cfg.newton_tol:
            trace.converged = True
            break
        J = assemble_cd2d_jacobian(u, cfg)
        trace.jacobians.append(J)
        delta = spla.spsolve(J.to_scipy().tocsc(), -F)
        alpha = 1.0
        while True:
            trial = u + alpha * delta
            F_trial = assemble_cd2d_residual(trial, cfg)
            f_trial = float(np.linalg.norm(F_trial))
            # Armijo on 0.5||F||^2 with directional derivative -||F||^2
            if f_trial**2 <= (1.0 - 2.0 * cfg.armijo_c * alpha) * fnorm**2:
                break
            alpha *= cfg.backtrack_factor
            if alpha < cfg.min_step:
                raise LineSearchError(
                    f"line search failed at Newton step {len(trace.jacobians)}: "
                    f"step {alpha:.3e} < {cfg.min_step:g}, ||F|| = {fnorm:.6e}"
                )
        u, F, fnorm = trial, F_trial, f_trial
        trace.u = u
        trace.residual_norms.append(fnorm)
        trace.step_lengths.append(alpha)
    else:
        trace.converged = fnorm < cfg.newton_tol
    if not trace.converged:
        log.warning("Newton did not reach ||F|| < %g in %d steps (||F|| = %.3e); sequence is partial",
                    cfg.newton_tol, cfg.max_newton, fnorm)
    return trace


def generate_cd2d_sequence(cfg: Cd2dConfig) -> MatrixSequence:
    trace = newton_solve(cfg)
    labels = [f"cd2d_m{cfg.m}_newton{k}" for k in range(len(trace.jacobians))]
    return MatrixSequence(trace.jacobians, labels)


@dataclass
class ShiftedConfig:
    m: int = 30
    shifts: list[float] = field(default_factory=lambda: [10.0 * k for k in range(10)])
    mass_kind: str = "diagonal"

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError(f"m must be >= 2, got {self.m}")
        self.shifts = [float(s) for s in self.shifts]
        if not self.shifts:
            raise ConfigError("shifts must be non-empty")
        if any(s < 0 for s in self.shifts):
            raise ConfigError("shifts must be non-negative")
        if self.mass_kind not in ("diagonal", "tridiagonal"):
            raise ConfigError(f"mass_kind must be diagonal or tridiagonal, got {self.mass_kind!r}")

    @property
    def n(self) -> int:
        return self.m * self.m


def laplacian_2d(m: int) -> sp.csc_matrix:
    """Five-point Laplacian on an m x m interior grid, scaled by 1/h^2."""
    h = 1.0 / (m + 1)
    T = sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1])
    I = sp.identity(m)
    return ((sp.kron(I, T) + sp.kron(T, I)) / h**2).tocsc()


def mass_matrix(m: int, kind: str) -> sp.csc_matrix:
    if kind == "diagonal":
        return sp.identity(m * m, format="csc")
    # 1-D consistent mass along grid lines only, so the pattern stays inside K's
    T = sp.diags([np.full(m - 1, 1 / 6), np.full(m, 2 / 3), np.full(m - 1, 1 / 6)], [-1, 0, 1])
    return sp.kron(sp.identity(m), T).tocsc()


def generate_shifted_sequence(cfg: ShiftedConfig) -> MatrixSequence:
    K = laplacian_2d(cfg.m)
    M = mass_matrix(cfg.m, cfg.mass_kind)
    entries = [SparseMatrix.from_scipy(K + s * M) for s in cfg.shifts]
    labels = [f"shifted_m{cfg.m}_sigma{s:g}" for s in cfg.shifts]
    return MatrixSequence(entries, labels)


# 7x7 boolean patterns of the closure worked example; S(A_0) is contained in S(A_1)
EXAMPLE_A0 = np.array([
    [1, 1, 0, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 0, 1],
    [0, 0, 1, 0, 1, 1, 0],
    [0, 0, 0, 1, 1, 0, 1],
    [0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 0, 1],
], dtype=bool)
EXAMPLE_A1 = np.array([
    [1, 1, 0, 1, 0, 0, 1],
    [0, 1, 1, 0, 0, 0, 1],
    [0, 0, 1, 0, 1, 1, 0],
    [0, 0, 0, 1, 1, 0, 1],
    [1, 0, 1, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 1, 1],
    [1, 0, 0, 0, 0, 1, 1],
], dtype=bool)


def closure_example_pair(seed: int = 0, low: float = 0.5, high: float = 1.5) -> tuple[SparseMatrix, SparseMatrix]:
    """``(A_0, A_1)`` on the worked-example patterns with independent random values.

    The 0/1-valued ``A_1`` is singular, so each matrix gets its own values
    drawn uniformly from ``[low, high]``.
    """
    rng = np.random.default_rng(seed)
    A0 = np.where(EXAMPLE_A0, rng.uniform(low, high, EXAMPLE_A0.shape), 0.0)
    A1 = np.where(EXAMPLE_A1, rng.uniform(low, high, EXAMPLE_A1.shape), 0.0)
    return SparseMatrix.from_dense(A0), SparseMatrix.from_dense(A1)
