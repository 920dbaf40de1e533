"""Finite-volume discretization: diffusion operator, SIMP material law, density filter.

Two-point flux approximation on the structured grid. Interior face
transmissibility is ``kappa_f * face_area / spacing`` with the arithmetic mean
``kappa_f = (kappa_i + kappa_j) / 2``; Dirichlet faces use the half-cell
distance, contributing ``2 * kappa_i * face_area / spacing`` to the diagonal
and the same times the fixed temperature to the boundary right-hand side.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, SingularOperatorError
from .grid import DIRICHLET, NEUMANN, LO, HI, StructuredGrid

# Per-cell density / conductivity fields are plain float arrays.
DensityField = np.ndarray


@dataclass(frozen=True)
class SimpParams:
    """Power-law interpolation kappa = kappa_min + rho^exponent * (kappa_max - kappa_min)."""

    kappa_min: float
    kappa_max: float
    exponent: float

    def __post_init__(self):
        if not 0 < self.kappa_min < self.kappa_max:
            raise ConfigurationError(
                f"need 0 < kappa_min < kappa_max, got {self.kappa_min}, {self.kappa_max}"
            )
        if self.exponent < 1:
            raise ConfigurationError(f"penalization exponent must be >= 1, got {self.exponent}")


def simp_conductivity(rho_tilde: DensityField, params: SimpParams) -> np.ndarray:
    return params.kappa_min + rho_tilde**params.exponent * (params.kappa_max - params.kappa_min)


def simp_derivative(rho_tilde: DensityField, params: SimpParams) -> np.ndarray:
    return (
        params.exponent
        * rho_tilde ** (params.exponent - 1)
        * (params.kappa_max - params.kappa_min)
    )


@dataclass(frozen=True)
class FaceTables:
    """Precomputed face lists and CSR pattern of a grid's diffusion stencil."""

    # interior faces: low cell, high cell, face_area / spacing
    ilo: np.ndarray
    ihi: np.ndarray
    gf: np.ndarray
    # Dirichlet faces: owning cell, 2 * face_area / spacing, fixed value
    dir_cells: np.ndarray
    dir_gf: np.ndarray
    dir_value: np.ndarray
    # Neumann faces: owning cell, face area, prescribed flux
    neu_cells: np.ndarray
    neu_area: np.ndarray
    neu_flux: np.ndarray
    # CSR pattern and the permutation from [diag | lo->hi | hi->lo] value order
    indptr: np.ndarray
    indices: np.ndarray
    perm: np.ndarray


_tables_cache: "weakref.WeakKeyDictionary[StructuredGrid, FaceTables]" = weakref.WeakKeyDictionary()


def face_tables(grid: StructuredGrid) -> FaceTables:
    cached = _tables_cache.get(grid)
    if cached is not None:
        return cached

    n = grid.num_cells
    strides = grid.strides
    ilo_parts, ihi_parts, gf_parts = [], [], []
    for axis in range(grid.ndim):
        coords = [np.arange(d) for d in grid.dims]
        coords[axis] = coords[axis][:-1]  # faces between cell c and c+1 along axis
        mesh = np.meshgrid(*coords, indexing="ij")
        lo = sum(m.astype(np.int64) * s for m, s in zip(mesh, strides)).ravel(order="F")
        ilo_parts.append(lo)
        ihi_parts.append(lo + strides[axis])
        gf_parts.append(
            np.full(lo.size, grid.face_area[axis] / grid.spacing[axis])
        )
    ilo = np.concatenate(ilo_parts)
    ihi = np.concatenate(ihi_parts)
    gf = np.concatenate(gf_parts)

    dc, dg, dv, nc, na, nf = [], [], [], [], [], []
    for axis in range(grid.ndim):
        for side in (LO, HI):
            cells = grid.boundary_cells(axis, side)
            owner = grid.face_patch_ids(axis, side)
            for pid in np.unique(owner):
                patch = grid.patches[pid]
                sel = cells[owner == pid]
                if patch.kind == DIRICHLET:
                    dc.append(sel)
                    dg.append(np.full(sel.size, 2 * grid.face_area[axis] / grid.spacing[axis]))
                    dv.append(np.full(sel.size, patch.value))
                elif patch.kind == NEUMANN and patch.value != 0.0:
                    nc.append(sel)
                    na.append(np.full(sel.size, grid.face_area[axis]))
                    nf.append(np.full(sel.size, patch.value))

    def cat(parts, dtype):
        return np.concatenate(parts) if parts else np.empty(0, dtype=dtype)

    dir_cells = cat(dc, np.int64)
    rows = np.concatenate([np.arange(n, dtype=np.int64), ilo, ihi])
    cols = np.concatenate([np.arange(n, dtype=np.int64), ihi, ilo])
    perm = np.lexsort((cols, rows))
    indices = cols[perm]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])

    tables = FaceTables(
        ilo=ilo,
        ihi=ihi,
        gf=gf,
        dir_cells=dir_cells,
        dir_gf=cat(dg, float),
        dir_value=cat(dv, float),
        neu_cells=cat(nc, np.int64),
        neu_area=cat(na, float),
        neu_flux=cat(nf, float),
        indptr=indptr,
        indices=indices,
        perm=perm,
    )
    _tables_cache[grid] = tables
    return tables


def assemble_diffusion(grid: StructuredGrid, kappa: np.ndarray):
    """Assemble A(kappa) and the Dirichlet boundary right-hand side.

    Returns ``(A, rhs_bc)`` with A in CSR form, symmetric positive definite
    whenever at least one Dirichlet face exists.
    """
    t = face_tables(grid)
    n = grid.num_cells
    kappa = np.asarray(kappa, dtype=float)
    if kappa.shape != (n,):
        raise ValueError(f"kappa must have shape ({n},), got {kappa.shape}")
    if np.any(kappa <= 0):
        raise ValueError("conductivity must be positive everywhere")
    if t.dir_cells.size == 0:
        raise SingularOperatorError("no Dirichlet face anywhere: diffusion operator is singular")

    trans = 0.5 * (kappa[t.ilo] + kappa[t.ihi]) * t.gf
    dcoef = kappa[t.dir_cells] * t.dir_gf
    diag = (
        np.bincount(t.ilo, weights=trans, minlength=n)
        + np.bincount(t.ihi, weights=trans, minlength=n)
        + np.bincount(t.dir_cells, weights=dcoef, minlength=n)
    )
    vals = np.concatenate([diag, -trans, -trans])
    op = sp.csr_array((vals[t.perm], t.indices, t.indptr), shape=(n, n))
    rhs_bc = np.bincount(t.dir_cells, weights=dcoef * t.dir_value, minlength=n)
    return op, rhs_bc


def assemble_filter(grid: StructuredGrid, lam: float) -> sp.csr_array:
    """Helmholtz-type density filter operator for -lam^2 lap(rho~) + rho~ = rho.

    Homogeneous Neumann on all boundaries; the right-hand side is the raw
    density scaled by the cell volume. ``lam = 0`` gives the identity scaled by
    the cell volume.
    """
    if lam < 0:
        raise ConfigurationError(f"filter length must be >= 0, got {lam}")
    t = face_tables(grid)
    n = grid.num_cells
    trans = lam**2 * t.gf
    diag = (
        np.bincount(t.ilo, weights=trans, minlength=n)
        + np.bincount(t.ihi, weights=trans, minlength=n)
        + grid.cell_volume
    )
    vals = np.concatenate([diag, -trans, -trans])
    return sp.csr_array((vals[t.perm], t.indices, t.indptr), shape=(n, n))


def source_rhs(grid: StructuredGrid, source) -> np.ndarray:
    """Volumetric source and prescribed-flux contributions to the right-hand side.

    ``source`` is a per-cell value or a scalar applied uniformly. The
    kappa-dependent Dirichlet contributions live in assemble_diffusion's
    rhs_bc; adding the two gives the full forward right-hand side.
    """
    t = face_tables(grid)
    n = grid.num_cells
    b = np.broadcast_to(np.asarray(source, dtype=float), (n,)) * grid.cell_volume
    if t.neu_cells.size:
        b = b + np.bincount(t.neu_cells, weights=t.neu_flux * t.neu_area, minlength=n)
    return np.ascontiguousarray(b, dtype=float)


def filter_length_from_spacing(grid: StructuredGrid, radius_factor: float = 2.0) -> float:
    """Filter length from the support-radius rule lam = lam_h / (2*sqrt(3)).

    The support radius defaults to twice the (largest) mesh spacing.
    """
    return radius_factor * max(grid.spacing) / (2.0 * np.sqrt(3.0))
