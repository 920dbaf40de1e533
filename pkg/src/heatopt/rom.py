"""Windowed reduced bases and Galerkin reduced solves for the dual surrogates.

Each equation (forward and adjoint) owns a basis V with orthonormal columns
and an upper-triangular factor R such that V @ R reconstructs the retained raw
snapshots. Appending a snapshot Gram-Schmidts it against V (classical GS with
one reorthogonalization pass). Once the window is full, the oldest snapshot is
dropped without losing the span of the remaining ones: append and
orthogonalize as usual, then QR-factorize the last r columns of the extended
R as Z S and contract V <- V Z, R <- S. The result has r orthonormal columns
spanning exactly the last r raw snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MorFailure
from .krylov import MOR, Criterion, SolveReport

# a snapshot whose orthogonal remainder falls below this times its norm is
# numerically in span(V); appending it would make the windowed R rank-deficient
DEPENDENT_SNAPSHOT_RTOL = 1e-12

_CONDITION_LIMIT = 1e14


@dataclass(frozen=True)
class ReducedBasis:
    """Orthonormal basis of the last <= r_max snapshots of one equation."""

    V: np.ndarray  # n x k, orthonormal columns
    R: np.ndarray  # k x k, upper triangular; raw snapshots = V @ R
    r_max: int
    snapshot_count: int = 0  # snapshots ever added over the basis lifetime

    @classmethod
    def empty(cls, n: int, r_max: int) -> "ReducedBasis":
        if r_max < 1:
            raise ValueError(f"window size must be >= 1, got {r_max}")
        return cls(V=np.zeros((n, 0)), R=np.zeros((0, 0)), r_max=r_max)

    @property
    def size(self) -> int:
        return self.V.shape[1]


def basis_append(basis: ReducedBasis, x: np.ndarray) -> tuple[ReducedBasis, bool]:
    """Add a snapshot to the window. Returns (basis, appended).

    A snapshot numerically in span(V) is rejected and the basis returned
    unchanged with ``appended=False``.
    """
    norm_x = np.linalg.norm(x)
    if norm_x == 0.0:
        raise ValueError("cannot append a zero snapshot")
    v_mat, r_mat = basis.V, basis.R
    k = basis.size

    h1 = v_mat.T @ x
    y = x - v_mat @ h1
    h2 = v_mat.T @ y
    y -= v_mat @ h2
    h = h1 + h2
    rho = np.linalg.norm(y)
    if rho < DEPENDENT_SNAPSHOT_RTOL * norm_x:
        return basis, False

    v_ext = np.column_stack([v_mat, y / rho])
    r_ext = np.zeros((k + 1, k + 1))
    r_ext[:k, :k] = r_mat
    r_ext[:k, k] = h
    r_ext[k, k] = rho

    if k + 1 <= basis.r_max:
        v_new, r_new = v_ext, r_ext
    else:
        # drop the oldest snapshot: refactor the last r_max columns of R
        z, s = np.linalg.qr(r_ext[:, 1:])
        v_new, r_new = v_ext @ z, s
    return ReducedBasis(v_new, r_new, basis.r_max, basis.snapshot_count + 1), True


def reduced_solve(basis: ReducedBasis, op, rhs: np.ndarray):
    """Galerkin solve on span(V): returns (x_tilde, coeffs, AV).

    AV is cached so the subsequent residual assessment costs no further full
    matvec. Raises MorFailure when the projected system is singular or too
    ill-conditioned to trust.
    """
    if basis.size < 1:
        raise MorFailure("empty basis")
    v_mat = basis.V
    av = op @ v_mat
    a_hat = v_mat.T @ av
    b_hat = v_mat.T @ rhs
    if np.linalg.cond(a_hat) > _CONDITION_LIMIT:
        raise MorFailure(f"projected operator condition exceeds {_CONDITION_LIMIT:.0e}")
    try:
        coeffs = np.linalg.solve(a_hat, b_hat)
    except np.linalg.LinAlgError as exc:
        raise MorFailure(f"projected solve failed: {exc}") from exc
    return v_mat @ coeffs, coeffs, av


def assess(
    x_tilde: np.ndarray,
    av: np.ndarray,
    coeffs: np.ndarray,
    rhs: np.ndarray,
    norm_a: float,
    tau_mor: float,
    criterion: Criterion,
) -> tuple[bool, float]:
    """Residual-based acceptance of a reduced solution (inclusive threshold)."""
    residual = rhs - av @ coeffs
    norm_r = float(np.linalg.norm(residual))
    norm_b = float(np.linalg.norm(rhs))
    norm_x = float(np.linalg.norm(x_tilde))
    denom = norm_b if criterion is Criterion.RELATIVE_RESIDUAL else norm_b + norm_a * norm_x
    measure = norm_r / denom
    return measure <= tau_mor, measure


def mor_report(
    basis: ReducedBasis,
    x_tilde: np.ndarray,
    av: np.ndarray,
    coeffs: np.ndarray,
    rhs: np.ndarray,
    norm_a: float,
    wall_time: float,
) -> SolveReport:
    """SolveReport for an accepted reduced solve (both measures, zero CG work)."""
    residual = rhs - av @ coeffs
    norm_r = float(np.linalg.norm(residual))
    norm_b = float(np.linalg.norm(rhs))
    norm_x = float(np.linalg.norm(x_tilde))
    return SolveReport(
        iterations=0,
        matvecs=basis.size,
        final_w1=norm_r / norm_b,
        final_w2=norm_r / (norm_b + norm_a * norm_x),
        norm_A=norm_a,
        norm_b=norm_b,
        norm_x=norm_x,
        wall_time=wall_time,
        converged=True,
        solver_kind=MOR,
    )
