"""Method of moving asymptotes for one inequality constraint on box-bounded designs.

Follows the classic construction of Svanberg's method: each iteration builds a
separable convex approximation from asymptotes that adapt to design
oscillation (widen by 1.2 on monotone progress, shrink by 0.7 on oscillation,
initial half-range offset), then solves the subproblem. With a single
constraint the subproblem is solved exactly by its dual: for a multiplier
lam >= 0 the minimizer over the move-limit box is a closed-form per-variable
expression, and the active multiplier is found by bracketing plus bisection on
the (monotone) constraint residual. Box bounds and move limits are honored
exactly by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

ASYMPTOTE_INIT = 0.5
ASYMPTOTE_INCREASE = 1.2
ASYMPTOTE_DECREASE = 0.7
ALBEFA = 0.1  # keep iterates off the asymptotes by this fraction
RAA0 = 1e-5  # baseline curvature so the approximation stays strictly convex
_LAMBDA_MAX = 1e12
_BISECTIONS = 128


@dataclass(frozen=True)
class MmaState:
    """Asymptotes and design history carried between iterations."""

    low: np.ndarray
    upp: np.ndarray
    x_prev1: np.ndarray | None = None
    x_prev2: np.ndarray | None = None
    iteration: int = 0
    move_limit: float = 0.1
    x_min: float = 0.0
    x_max: float = 1.0
    last_step_flagged: bool = field(default=False, compare=False)

    @classmethod
    def fresh(cls, n: int, move_limit: float = 0.1) -> "MmaState":
        return cls(low=np.zeros(n), upp=np.ones(n), move_limit=move_limit)


def _approximation(df, ux_sq, xl_sq, span):
    plus = np.maximum(df, 0.0)
    minus = np.maximum(-df, 0.0)
    extra = 0.001 * (plus + minus) + RAA0 / span
    return (plus + extra) * ux_sq, (minus + extra) * xl_sq


def _box_minimizer(p_lam, q_lam, low, upp, alpha, beta):
    sp_ = np.sqrt(p_lam)
    sq_ = np.sqrt(q_lam)
    x_hat = (low * sp_ + upp * sq_) / (sp_ + sq_)
    return np.clip(x_hat, alpha, beta)


def mma_update(state: MmaState, x: np.ndarray, j_value: float, dj: np.ndarray,
               g_value: float, dg: np.ndarray) -> tuple[np.ndarray, MmaState]:
    """One design update. Returns (x_new, state_new).

    ``g_value <= 0`` is feasible. If the linearized constraint cannot be met
    inside the move limits, the closest feasible point of the subproblem is
    returned and the step flagged in the state.
    """
    del j_value  # the subproblem needs only gradients and the constraint value
    it = state.iteration + 1
    span = state.x_max - state.x_min

    if it <= 2 or state.x_prev1 is None or state.x_prev2 is None:
        low = x - ASYMPTOTE_INIT * span
        upp = x + ASYMPTOTE_INIT * span
    else:
        trend = (x - state.x_prev1) * (state.x_prev1 - state.x_prev2)
        factor = np.ones_like(x)
        factor[trend > 0] = ASYMPTOTE_INCREASE
        factor[trend < 0] = ASYMPTOTE_DECREASE
        low = x - factor * (state.x_prev1 - state.low)
        upp = x + factor * (state.upp - state.x_prev1)
        low = np.clip(low, x - 10.0 * span, x - 0.01 * span)
        upp = np.clip(upp, x + 0.01 * span, x + 10.0 * span)

    move = state.move_limit * span
    alpha = np.maximum.reduce([np.full_like(x, state.x_min), low + ALBEFA * (x - low), x - move])
    beta = np.minimum.reduce([np.full_like(x, state.x_max), upp - ALBEFA * (upp - x), x + move])

    ux_sq = (upp - x) ** 2
    xl_sq = (x - low) ** 2
    p0, q0 = _approximation(dj, ux_sq, xl_sq, span)
    p1, q1 = _approximation(dg, ux_sq, xl_sq, span)
    # subproblem constraint right-hand side, so its value at x matches g_value
    b = float(p1 @ (1.0 / (upp - x)) + q1 @ (1.0 / (x - low))) - g_value

    def constraint_at(lam):
        xs = _box_minimizer(p0 + lam * p1, q0 + lam * q1, low, upp, alpha, beta)
        return float(p1 @ (1.0 / (upp - xs)) + q1 @ (1.0 / (xs - low))) - b, xs

    flagged = False
    g0, x_new = constraint_at(0.0)
    if g0 > 0.0:
        lam_lo, lam_hi = 0.0, 1.0
        g_hi, x_new = constraint_at(lam_hi)
        while g_hi > 0.0 and lam_hi < _LAMBDA_MAX:
            lam_lo, lam_hi = lam_hi, lam_hi * 10.0
            g_hi, x_new = constraint_at(lam_hi)
        if g_hi > 0.0:
            flagged = True  # infeasible within move limits; x_new minimizes the constraint
        else:
            for _ in range(_BISECTIONS):
                lam_mid = 0.5 * (lam_lo + lam_hi)
                g_mid, x_mid = constraint_at(lam_mid)
                if g_mid > 0.0:
                    lam_lo = lam_mid
                else:
                    lam_hi = lam_mid
                    x_new = x_mid

    new_state = replace(
        state,
        low=low,
        upp=upp,
        x_prev1=x.copy(),
        x_prev2=None if state.x_prev1 is None else state.x_prev1,
        iteration=it,
        last_step_flagged=flagged,
    )
    return x_new, new_state
