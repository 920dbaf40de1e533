import pytest
from hypothesis import given
from hypothesis import strategies as st

import heatopt as h
from heatopt.errors import ConfigurationError
from heatopt.grid import BoundaryPatch, build_grid, neighbors

from conftest import dirichlet_top


def test_benchmark_2d_grid_metrics():
    g = dirichlet_top((360, 360), (12.0, 12.0))
    assert g.spacing == (12.0 / 360, 12.0 / 360)
    assert g.spacing[0] == pytest.approx(1 / 30)
    assert g.num_cells == 129_600


def test_unit_spacing_grid():
    g = dirichlet_top((2, 2), (2.0, 2.0))
    assert g.spacing == (1.0, 1.0)
    assert g.cell_volume == 1.0


def test_benchmark_3d_cell_count():
    g = dirichlet_top((200, 200, 200), (1.0, 1.0, 1.0))
    assert g.num_cells == 8_000_000


def test_spacing_is_exact_division():
    g = dirichlet_top((7, 13), (1.0, 3.0))
    assert g.spacing == (1.0 / 7, 3.0 / 13)
    assert g.cell_volume == (1.0 / 7) * (3.0 / 13)


def test_neighbors_center_cell_2d():
    g = dirichlet_top((3, 3), (3.0, 3.0))
    nbs = neighbors(g, g.cell_index((1, 1)))
    assert len(nbs) == 4
    assert all(nb.cell is not None for nb in nbs)


def test_neighbors_corner_cell_2d():
    g = dirichlet_top((3, 3), (3.0, 3.0))
    nbs = neighbors(g, g.cell_index((0, 0)))
    interior = [nb for nb in nbs if nb.cell is not None]
    faces = [nb for nb in nbs if nb.patch is not None]
    assert len(interior) == 2 and len(faces) == 2


def test_neighbors_3d_symmetry_cell():
    g = dirichlet_top((2, 2, 2), (1.0, 1.0, 1.0))
    for cell in range(8):
        nbs = neighbors(g, cell)
        assert len(nbs) == 6
        assert sum(nb.cell is not None for nb in nbs) == 3
        assert sum(nb.patch is not None for nb in nbs) == 3


def test_neighbors_out_of_range():
    g = dirichlet_top((3, 3), (1.0, 1.0))
    with pytest.raises(IndexError):
        neighbors(g, 9)


def test_boundary_faces_carry_their_patch():
    g = h.build_grid(
        (4, 4),
        (1.0, 1.0),
        [
            BoundaryPatch("hot", "dirichlet", 5.0, axis=1, side=1, ranges=((1, 3), (0, 4))),
            BoundaryPatch("rest", "neumann", 0.0),
        ],
    )
    top = [nb for nb in neighbors(g, g.cell_index((1, 3))) if nb.patch is not None]
    assert top[0].patch.name == "hot"
    corner = [
        nb for nb in neighbors(g, g.cell_index((0, 3))) if nb.axis == 1 and nb.patch is not None
    ]
    assert corner[0].patch.name == "rest"


@pytest.mark.parametrize(
    "dims,extents,expected",
    [
        ((4, 6), (2.0, 3.0), 2 * (2.0 + 3.0)),
        ((3, 4, 5), (1.0, 2.0, 4.0), 2 * (1 * 2 + 2 * 4 + 1 * 4)),
    ],
)
def test_boundary_area_matches_box_surface(dims, extents, expected):
    g = dirichlet_top(dims, extents)
    assert g.boundary_area() == pytest.approx(expected, rel=1e-12)


@given(
    dims=st.tuples(st.integers(2, 5), st.integers(2, 5)),
    cell_frac=st.floats(0, 1, exclude_max=True),
)
def test_neighbor_symmetry(dims, cell_frac):
    g = dirichlet_top(dims, (1.0, 1.0))
    cell = int(cell_frac * g.num_cells)
    for nb in neighbors(g, cell):
        if nb.cell is not None:
            back = [other.cell for other in neighbors(g, nb.cell)]
            assert cell in back


def test_rejects_bad_dims_and_extents():
    patches = [BoundaryPatch("rest", "neumann", 0.0)]
    with pytest.raises(ConfigurationError):
        build_grid((1, 4), (1.0, 1.0), patches)
    with pytest.raises(ConfigurationError):
        build_grid((4, 4), (0.0, 1.0), patches)
    with pytest.raises(ConfigurationError):
        build_grid((4, 4, 4, 4), (1.0,) * 4, patches)


def test_rejects_overlapping_patches():
    with pytest.raises(ConfigurationError, match="overlap"):
        build_grid(
            (4, 4),
            (1.0, 1.0),
            [
                BoundaryPatch("a", "dirichlet", 1.0, axis=0, side=0),
                BoundaryPatch("b", "neumann", 0.0, axis=0, side=0, ranges=((0, 4), (1, 2))),
                BoundaryPatch("rest", "neumann", 0.0),
            ],
        )


def test_rejects_incomplete_cover():
    with pytest.raises(ConfigurationError, match="not covered"):
        build_grid(
            (4, 4),
            (1.0, 1.0),
            [BoundaryPatch("a", "dirichlet", 1.0, axis=0, side=0)],
        )


def test_rejects_two_remainder_patches():
    with pytest.raises(ConfigurationError):
        build_grid(
            (4, 4),
            (1.0, 1.0),
            [BoundaryPatch("a", "neumann", 0.0), BoundaryPatch("b", "neumann", 0.0)],
        )


def test_patches_partition_every_face():
    g = h.build_grid(
        (5, 3),
        (5.0, 3.0),
        [
            BoundaryPatch("left", "dirichlet", 2.0, axis=0, side=0),
            BoundaryPatch("right", "neumann", 1.0, axis=0, side=1),
            BoundaryPatch("rest", "neumann", 0.0),
        ],
    )
    count = 0
    for axis in (0, 1):
        for side in (0, 1):
            ids = g.face_patch_ids(axis, side)
            assert (ids >= 0).all()
            count += ids.size
    assert count == 2 * 3 + 2 * 5
