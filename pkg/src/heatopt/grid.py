"""Structured, axis-aligned cell-centered grids with boundary patch bookkeeping.

Cells are numbered lexicographically with x fastest:
``index = ix + dims[0] * (iy + dims[1] * iz)``. Two-dimensional grids are
treated as d=2 with unit out-of-plane thickness, so 2D "areas" are lengths
times a thickness of 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

LO = 0  # min-side face
HI = 1  # max-side face


@dataclass(frozen=True)
class BoundaryPatch:
    """A named set of boundary faces sharing one boundary condition.

    ``ranges`` holds one half-open cell-index interval per axis; the entry for
    the normal axis is ignored. ``ranges=None`` on an explicit patch means the
    whole slab. A patch with ``axis=None`` is the remainder patch: it picks up
    every boundary face not claimed by an explicit patch.
    """

    name: str
    kind: str
    value: float = 0.0  # fixed temperature (Dirichlet) or inward flux (Neumann)
    axis: int | None = None
    side: int | None = None
    ranges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in (DIRICHLET, NEUMANN):
            raise ConfigurationError(f"patch {self.name!r}: unknown kind {self.kind!r}")
        if (self.axis is None) != (self.side is None):
            raise ConfigurationError(
                f"patch {self.name!r}: axis and side must be given together"
            )
        if self.side not in (None, LO, HI):
            raise ConfigurationError(f"patch {self.name!r}: side must be 0 (min) or 1 (max)")

    @property
    def is_remainder(self) -> bool:
        return self.axis is None


class Neighbor(NamedTuple):
    """One of the 2*d stencil entries of a cell.

    Either an interior neighbor (``cell`` set, ``patch`` None) or a boundary
    face carrying its patch (``cell`` None).
    """

    cell: int | None
    patch: BoundaryPatch | None
    axis: int
    side: int


@dataclass(frozen=True, eq=False)
class StructuredGrid:
    dims: tuple[int, ...]
    extents: tuple[float, ...]
    spacing: tuple[float, ...]
    cell_volume: float
    face_area: tuple[float, ...]
    patches: tuple[BoundaryPatch, ...]
    # per (axis, side): boundary cell indices and the patch index of each face,
    # both ordered lexicographically over the tangential coordinates
    _boundary: dict = field(repr=False)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.dims))

    @property
    def strides(self) -> tuple[int, ...]:
        s, out = 1, []
        for d in self.dims:
            out.append(s)
            s *= d
        return tuple(out)

    def cell_index(self, coords) -> int:
        return int(sum(c * s for c, s in zip(coords, self.strides)))

    def cell_coords(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.num_cells:
            raise IndexError(f"cell index {index} out of range [0, {self.num_cells})")
        out = []
        for d in self.dims:
            out.append(index % d)
            index //= d
        return tuple(out)

    def boundary_cells(self, axis: int, side: int) -> np.ndarray:
        return self._boundary[(axis, side)][0]

    def face_patch_ids(self, axis: int, side: int) -> np.ndarray:
        return self._boundary[(axis, side)][1]

    def boundary_area(self) -> float:
        total = 0.0
        for (axis, _), (cells, _) in self._boundary.items():
            total += cells.size * self.face_area[axis]
        return total

    def cell_centers(self) -> np.ndarray:
        """Cell-center coordinates, shape (num_cells, ndim), lexicographic order."""
        axes = [
            (np.arange(d) + 0.5) * h for d, h in zip(self.dims, self.spacing)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel(order="F") for m in mesh], axis=1)


def _slab_cells(dims, axis, side):
    """Cell indices of the boundary slab, lexicographic over tangential coords."""
    coords = []
    for a, d in enumerate(dims):
        if a == axis:
            coords.append(np.array([0 if side == LO else d - 1]))
        else:
            coords.append(np.arange(d))
    mesh = np.meshgrid(*coords, indexing="ij")
    strides = np.cumprod((1,) + dims[:-1])
    idx = sum(m.astype(np.int64) * s for m, s in zip(mesh, strides))
    return idx.ravel(order="F")


def _slab_mask(dims, axis, ranges):
    """Boolean mask over the slab (tangential lexicographic order) for index ranges."""
    tang = [a for a in range(len(dims)) if a != axis]
    shape = tuple(dims[a] for a in tang)
    mask = np.ones(shape, dtype=bool)
    for k, a in enumerate(tang):
        lo, hi = ranges[a]
        if not (0 <= lo < hi <= dims[a]):
            raise ConfigurationError(
                f"patch range {ranges[a]} out of bounds for axis {a} with {dims[a]} cells"
            )
        sel = np.zeros(dims[a], dtype=bool)
        sel[lo:hi] = True
        mask &= np.expand_dims(sel, tuple(i for i in range(len(shape)) if i != k))
    return mask.ravel(order="F")


def build_grid(dims, extents, patches) -> StructuredGrid:
    """Build a validated grid. Patches must partition the boundary faces."""
    dims = tuple(int(d) for d in dims)
    extents = tuple(float(e) for e in extents)
    if len(dims) not in (2, 3) or len(extents) != len(dims):
        raise ConfigurationError(f"need 2 or 3 matching dims/extents, got {dims}/{extents}")
    if any(d < 2 for d in dims):
        raise ConfigurationError(f"all dims must be >= 2, got {dims}")
    if any(e <= 0 for e in extents):
        raise ConfigurationError(f"all extents must be positive, got {extents}")

    spacing = tuple(e / d for e, d in zip(extents, dims))
    cell_volume = math.prod(spacing)
    face_area = tuple(cell_volume / h for h in spacing)
    patches = tuple(patches)

    remainder = [i for i, p in enumerate(patches) if p.is_remainder]
    if len(remainder) > 1:
        raise ConfigurationError("at most one remainder patch is allowed")

    boundary = {}
    uncovered = []
    for axis in range(len(dims)):
        for side in (LO, HI):
            cells = _slab_cells(dims, axis, side)
            owner = np.full(cells.size, -1, dtype=np.int64)
            for i, p in enumerate(patches):
                if p.is_remainder or p.axis != axis or p.side != side:
                    continue
                if p.ranges is None:
                    mask = np.ones(cells.size, dtype=bool)
                else:
                    mask = _slab_mask(dims, axis, p.ranges)
                clash = mask & (owner >= 0)
                if clash.any():
                    other = patches[owner[np.nonzero(clash)[0][0]]].name
                    raise ConfigurationError(
                        f"patches {p.name!r} and {other!r} overlap on axis {axis} side {side}"
                    )
                owner[mask] = i
            holes = owner < 0
            if holes.any():
                if remainder:
                    owner[holes] = remainder[0]
                else:
                    uncovered.append((axis, side, int(holes.sum())))
            boundary[(axis, side)] = (cells, owner)
    if uncovered:
        detail = ", ".join(f"axis {a} side {s}: {n} faces" for a, s, n in uncovered)
        raise ConfigurationError(f"boundary faces not covered by any patch ({detail})")

    return StructuredGrid(
        dims=dims,
        extents=extents,
        spacing=spacing,
        cell_volume=cell_volume,
        face_area=face_area,
        patches=patches,
        _boundary=boundary,
    )


def neighbors(grid: StructuredGrid, cell: int) -> list[Neighbor]:
    """The 2*d stencil entries of a cell, in (axis, side) order."""
    coords = grid.cell_coords(cell)
    out = []
    for axis in range(grid.ndim):
        for side in (LO, HI):
            step = -1 if side == LO else 1
            c = coords[axis] + step
            if 0 <= c < grid.dims[axis]:
                nb = list(coords)
                nb[axis] = c
                out.append(Neighbor(grid.cell_index(nb), None, axis, side))
            else:
                cells, owner = grid._boundary[(axis, side)]
                pos = int(np.searchsorted(cells, cell))
                patch = grid.patches[owner[pos]]
                out.append(Neighbor(None, patch, axis, side))
    return out
