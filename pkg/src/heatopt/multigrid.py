"""Geometric multigrid V-cycle preconditioner on structured grids.

Cells are aggregated 2^d -> 1 per level (an odd trailing cell forms its own
aggregate, so coarse dims are ceil(dim / 2)); restriction uses unit weights
and coarse operators are Galerkin products R A R^T. The V-cycle runs one
symmetric Gauss-Seidel sweep (lexicographic forward then backward) before and
after coarse-grid correction and solves the coarsest level directly with a
cached dense Cholesky factorization. With the same symmetric smoother on both
sides of the correction the cycle is a symmetric positive definite linear map
of the residual, hence a valid CG preconditioner.

The aggregation topology depends only on the grid, so it is built once per
run and reused; the coarse operators are rebuilt whenever the fine operator
changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from numba import njit

from .errors import SingularOperatorError
from .grid import StructuredGrid


@njit(cache=True)
def _gs_forward(indptr, indices, data, diag, x, b):
    n = x.shape[0]
    for i in range(n):
        s = b[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j != i:
                s -= data[k] * x[j]
        x[i] = s / diag[i]


@njit(cache=True)
def _gs_backward(indptr, indices, data, diag, x, b):
    for i in range(x.shape[0] - 1, -1, -1):
        s = b[i]
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j != i:
                s -= data[k] * x[j]
        x[i] = s / diag[i]


def symmetric_gauss_seidel(op: sp.csr_array, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One symmetric Gauss-Seidel sweep (forward then backward), in place on x."""
    diag = op.diagonal()
    _gs_forward(op.indptr, op.indices, op.data, diag, x, b)
    _gs_backward(op.indptr, op.indices, op.data, diag, x, b)
    return x


@dataclass(frozen=True)
class MgTopology:
    """Aggregation maps of a grid hierarchy, independent of the operator."""

    level_dims: tuple[tuple[int, ...], ...]
    restrictions: tuple  # csr, unit weights, one per coarsening step

    @property
    def num_levels(self) -> int:
        return len(self.level_dims)


def build_topology(
    grid: StructuredGrid, coarsest_max: int = 1000, max_levels: int | None = None
) -> MgTopology:
    """Aggregate 2^d cells per level until the coarsest has <= coarsest_max unknowns.

    At least one coarse level is built whenever the dims allow it;
    ``max_levels=1`` yields a single-level (direct-solve) hierarchy.
    """
    dims = grid.dims
    level_dims = [dims]
    restrictions = []
    while True:
        if max_levels is not None and len(level_dims) >= max_levels:
            break
        coarse = tuple((d + 1) // 2 for d in dims)
        if coarse == dims:
            break
        fine_n = math.prod(dims)
        # always coarsen at least once, then stop once at or below the threshold
        if restrictions and fine_n <= coarsest_max:
            break
        strides_c = np.cumprod((1,) + coarse[:-1])
        coords = np.meshgrid(*[np.arange(d) // 2 for d in dims], indexing="ij")
        agg = sum(c.astype(np.int64) * s for c, s in zip(coords, strides_c)).ravel(order="F")
        r = sp.csr_array(
            (np.ones(fine_n), (agg, np.arange(fine_n))),
            shape=(math.prod(coarse), fine_n),
        )
        restrictions.append(r)
        level_dims.append(coarse)
        dims = coarse
    return MgTopology(level_dims=tuple(level_dims), restrictions=tuple(restrictions))


@dataclass
class MgHierarchy:
    """Operator hierarchy for one fine operator: Galerkin coarse ops + coarsest factor."""

    topology: MgTopology
    ops: list
    diags: list
    coarse_factor: tuple  # scipy.linalg.cho_factor output

    @property
    def n(self) -> int:
        return self.ops[0].shape[0]


def build_hierarchy(topology: MgTopology, fine_op: sp.csr_array) -> MgHierarchy:
    if fine_op.shape[0] != math.prod(topology.level_dims[0]):
        raise ValueError(
            f"operator dimension {fine_op.shape[0]} does not match topology "
            f"{topology.level_dims[0]}"
        )
    ops = [fine_op]
    for r in topology.restrictions:
        ops.append((r @ ops[-1] @ r.T).tocsr())
    diags = [op.diagonal() for op in ops]
    try:
        coarse_factor = scipy.linalg.cho_factor(ops[-1].toarray())
    except scipy.linalg.LinAlgError as exc:
        raise SingularOperatorError(f"coarsest-level factorization failed: {exc}") from exc
    return MgHierarchy(topology=topology, ops=ops, diags=diags, coarse_factor=coarse_factor)


def _cycle(h: MgHierarchy, level: int, r: np.ndarray) -> np.ndarray:
    if level == len(h.ops) - 1:
        return scipy.linalg.cho_solve(h.coarse_factor, r)
    op = h.ops[level]
    z = np.zeros_like(r)
    _gs_forward(op.indptr, op.indices, op.data, h.diags[level], z, r)
    _gs_backward(op.indptr, op.indices, op.data, h.diags[level], z, r)
    restrict = h.topology.restrictions[level]
    z += restrict.T @ _cycle(h, level + 1, restrict @ (r - op @ z))
    _gs_forward(op.indptr, op.indices, op.data, h.diags[level], z, r)
    _gs_backward(op.indptr, op.indices, op.data, h.diags[level], z, r)
    return z


def v_cycle(h: MgHierarchy, r: np.ndarray) -> np.ndarray:
    """One V-cycle with zero initial guess; linear and SPD in r."""
    if r.shape[0] != h.n:
        raise ValueError(f"residual dimension {r.shape[0]} does not match hierarchy {h.n}")
    return _cycle(h, 0, np.ascontiguousarray(r, dtype=float))
