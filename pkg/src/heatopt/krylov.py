"""Preconditioned conjugate gradient with two residual-based stopping measures.

The solver supports the plain relative residual ``|r| / |b|`` and the
normwise backward error ``|r| / (|b| + |A| * |x|)``. Both are computed on
every iterate from the same norms, so the identity

    relative_residual = (1 + |A| |x| / |b|) * backward_error

holds to rounding and each iterate's pair is recorded in the report history.
The operator norm is the infinity norm (max absolute row sum), exact and
cheap for CSR. ``max_iters=1`` realizes the one-shot mode.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import SolverBreakdownError

FOM_FULL = "fom_full"
FOM_ONESHOT = "fom_oneshot"
MOR = "mor"

# above this size the stopping test uses the recursive CG residual with a
# final true-residual confirmation instead of recomputing b - A x each step
_TRUE_RESIDUAL_MAX_N = 100_000

# the recursion residual shrinks geometrically past the attainable accuracy of
# the true residual (~eps * (|b| + |A||x|)); once it falls this far below that
# floor the Krylov process is exhausted and iterating further only underflows
_RECURSION_FLOOR = 1e-3 * np.finfo(float).eps


class Criterion(enum.Enum):
    """Residual measure used for stopping and for reduced-model assessment."""

    RELATIVE_RESIDUAL = "w1"
    BACKWARD_ERROR = "w2"


@dataclass(frozen=True)
class StopCriterion:
    kind: Criterion
    tol: float

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tol}")


def operator_inf_norm(op) -> float:
    """Infinity norm of a sparse operator: max over rows of sum |a_ij|."""
    n = op.shape[0]
    row = np.bincount(
        np.repeat(np.arange(n), np.diff(op.indptr)), weights=np.abs(op.data), minlength=n
    )
    return float(row.max()) if n else 0.0


def residual_measure(
    criterion: Criterion, norm_r: float, norm_b: float, norm_a: float, norm_x: float
) -> float:
    """Evaluate the chosen stopping measure from precomputed norms."""
    denom = norm_b if criterion is Criterion.RELATIVE_RESIDUAL else norm_b + norm_a * norm_x
    if denom <= 0.0:
        raise ValueError("degenerate system: stopping-measure denominator is zero")
    return norm_r / denom


@dataclass
class SolveReport:
    """Per-solve record: iteration/matvec counts, final measures, timing."""

    iterations: int
    matvecs: int
    final_w1: float
    final_w2: float
    norm_A: float
    norm_b: float
    norm_x: float
    wall_time: float
    converged: bool
    solver_kind: str
    # per-iterate (relative residual, backward error, |A||x|/|b|) triples
    history: list = field(default_factory=list, repr=False)
    # measure of the rejected/accepted reduced solve that preceded this one
    mor_measure: float | None = None


def _measures(norm_r, norm_b, norm_a, norm_x):
    ratio = norm_a * norm_x / norm_b
    w1 = norm_r / norm_b
    w2 = norm_r / (norm_b + norm_a * norm_x)
    return w1, w2, ratio


def pcg_solve(
    op,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    preconditioner=None,
    criterion: StopCriterion = StopCriterion(Criterion.BACKWARD_ERROR, 1e-13),
    max_iters: int = 5000,
    norm_a: float | None = None,
    solver_kind: str = FOM_FULL,
    callback=None,
):
    """Preconditioned CG for an SPD operator.

    The preconditioner is a fixed SPD linear map applied once per iteration
    (``None`` for unpreconditioned CG). Returns ``(x, SolveReport)``. A zero
    right-hand side returns x = 0 immediately; an already-converged initial
    guess returns with zero iterations. Matvec counts include the initial
    residual and any true-residual evaluations.
    """
    t0 = time.perf_counter()
    n = b.shape[0]
    if norm_a is None:
        norm_a = operator_inf_norm(op)
    norm_b = float(np.linalg.norm(b))

    if norm_b == 0.0:
        x = np.zeros(n)
        return x, SolveReport(
            iterations=0, matvecs=0, final_w1=0.0, final_w2=0.0, norm_A=norm_a,
            norm_b=0.0, norm_x=0.0, wall_time=time.perf_counter() - t0,
            converged=True, solver_kind=solver_kind,
        )

    apply_m = (lambda r: r) if preconditioner is None else preconditioner
    use_w1 = criterion.kind is Criterion.RELATIVE_RESIDUAL
    true_each = n <= _TRUE_RESIDUAL_MAX_N
    eps = np.finfo(float).eps

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    matvecs = 0
    r = b - op @ x
    matvecs += 1
    history = []

    norm_x = float(np.linalg.norm(x))
    w1, w2, ratio = _measures(float(np.linalg.norm(r)), norm_b, norm_a, norm_x)
    history.append((w1, w2, ratio))
    converged = (w1 if use_w1 else w2) <= criterion.tol
    it = 0

    if not converged:
        z = apply_m(r)
        p = z.copy()
        rz = float(r @ z)
        # rz = r' M^-1 r vanishes only when the recursion residual is exactly
        # zero: the Krylov space is exhausted and x is at attainable accuracy
        # (the true-residual measure may still sit above the tolerance)
        while rz > 0.0 and it < max_iters:
            ap = op @ p
            matvecs += 1
            pap = float(p @ ap)
            if pap <= 1e3 * eps * norm_a * float(p @ p):
                raise SolverBreakdownError(
                    f"non-positive curvature p'Ap = {pap:.3e} at iteration {it + 1}"
                )
            alpha = rz / pap
            x += alpha * p
            r -= alpha * ap
            it += 1

            norm_x = float(np.linalg.norm(x))
            if true_each:
                r_check = b - op @ x
                matvecs += 1
            else:
                r_check = r
            w1, w2, ratio = _measures(float(np.linalg.norm(r_check)), norm_b, norm_a, norm_x)
            history.append((w1, w2, ratio))
            if callback is not None:
                callback(it, x)

            if (w1 if use_w1 else w2) <= criterion.tol:
                if true_each:
                    converged = True
                else:
                    # confirm with the true residual before accepting convergence
                    r_true = b - op @ x
                    matvecs += 1
                    w1, w2, ratio = _measures(
                        float(np.linalg.norm(r_true)), norm_b, norm_a, norm_x
                    )
                    history.append((w1, w2, ratio))
                    converged = (w1 if use_w1 else w2) <= criterion.tol
            if converged or it >= max_iters:
                break
            if float(r @ r) <= (_RECURSION_FLOOR * (norm_b + norm_a * norm_x)) ** 2:
                break  # exhausted: x is at the attainable accuracy
            z = apply_m(r)
            rz_new = float(r @ z)
            if rz_new <= 0.0:
                break
            p = z + (rz_new / rz) * p
            rz = rz_new

        if not converged and not true_each:
            # final measures always from the true residual
            r_true = b - op @ x
            matvecs += 1
            w1, w2, ratio = _measures(float(np.linalg.norm(r_true)), norm_b, norm_a, norm_x)
            history.append((w1, w2, ratio))
            converged = (w1 if use_w1 else w2) <= criterion.tol

    report = SolveReport(
        iterations=it,
        matvecs=matvecs,
        final_w1=w1,
        final_w2=w2,
        norm_A=norm_a,
        norm_b=norm_b,
        norm_x=norm_x,
        wall_time=time.perf_counter() - t0,
        converged=converged,
        solver_kind=solver_kind,
        history=history,
    )
    return x, report
