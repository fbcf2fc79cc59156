"""Cube grids, region masks, and their bookkeeping invariants."""

import numpy as np
import pytest

from andlab.errors import DomainError, ResourceError
from andlab.geometry import LatticeCube, RegionMask, build_cube, mask_csv_rows, mask_indices


class TestBuildCube:
    def test_points_per_axis_examples(self):
        assert build_cube(1, 1, (0,), 3.5, 0.5).points_per_axis == 13
        assert build_cube(1, 1, (0,), 8, 1.0).points_per_axis == 15
        assert build_cube(1, 1, (0,), 2, 1.0).points_per_axis == 3

    def test_grid_strictly_inside(self):
        cube = build_cube(1, 1, (0,), 6, 1.0)
        coords = cube.axis_coordinates(0)
        assert coords.min() == -5 and coords.max() == 5
        assert np.all(np.abs(coords) < cube.half_side)
        assert np.all(np.diff(coords) == cube.spacing)

    def test_off_center(self):
        cube = build_cube(1, 1, (4,), 2, 1.0)
        assert list(cube.axis_coordinates(0)) == [3, 4, 5]

    def test_two_particles(self):
        cube = build_cube(2, 1, (0, 0), 4, 1.0)
        assert cube.total_dim == 2
        assert cube.grid_size == 7**2
        pts = cube.grid_points()
        assert pts.shape == (49, 2)
        assert tuple(pts[0]) == (-3.0, -3.0)
        assert tuple(pts[-1]) == (3.0, 3.0)

    def test_validation(self):
        with pytest.raises(DomainError):
            build_cube(0, 1, (), 4)
        with pytest.raises(DomainError):
            build_cube(1, 1, (0, 0), 4)
        with pytest.raises(DomainError):
            build_cube(1, 1, (0.5,), 4)
        with pytest.raises(DomainError):
            build_cube(1, 1, (0,), -2)
        with pytest.raises(DomainError):
            build_cube(1, 1, (0,), 4, 0.75)

    def test_grid_budget(self):
        with pytest.raises(ResourceError):
            build_cube(2, 2, (0, 0, 0, 0), 20, 1.0, max_grid_points=10_000)


class TestIndexing:
    def test_round_trip(self):
        cube = build_cube(2, 1, (1, -1), 4, 1.0)
        for idx in range(cube.grid_size):
            assert cube.index_of(cube.point(idx)) == idx

    def test_non_grid_point_rejected(self):
        cube = build_cube(1, 1, (0,), 4, 1.0)
        with pytest.raises(DomainError):
            cube.index_of((0.25,))
        with pytest.raises(DomainError):
            cube.index_of((4.0,))


class TestRegions:
    def test_interior_and_outer_example(self):
        cube = build_cube(1, 1, (0,), 6, 1.0)
        coords = cube.axis_coordinates(0)
        assert sorted(coords[cube.interior_indices()]) == [-1, 0, 1]
        assert sorted(coords[cube.outer_indices()]) == [-5, -4, 4, 5]

    def test_regions_disjoint(self):
        cube = build_cube(1, 1, (0,), 8, 1.0)
        interior = set(cube.interior_indices())
        outer = set(cube.outer_indices())
        assert interior and outer
        assert not interior & outer

    def test_small_cube_has_no_regions(self):
        cube = build_cube(1, 1, (0,), 3, 1.0)
        with pytest.raises(DomainError):
            cube.interior_indices()
        with pytest.raises(DomainError):
            cube.outer_indices()

    def test_two_particle_regions_use_max_norm(self):
        cube = build_cube(2, 1, (0, 0), 6, 1.0)
        pts = cube.grid_points()
        interior = cube.interior_indices()
        assert np.all(np.max(np.abs(pts[interior]), axis=1) < cube.half_side / 3)


class TestMasks:
    def test_selectors(self):
        cube = build_cube(1, 1, (0,), 6, 1.0)
        full = RegionMask(cube=cube, selector="full").indices()
        assert np.array_equal(full, np.arange(cube.grid_size))
        pt = RegionMask(cube=cube, selector="point", point=(2.0,)).indices()
        assert list(pt) == [cube.index_of((2.0,))]
        assert np.array_equal(
            RegionMask(cube=cube, selector="interior").indices(),
            mask_indices(cube, "interior"),
        )

    def test_invalid_selector(self):
        cube = build_cube(1, 1, (0,), 6, 1.0)
        with pytest.raises(DomainError):
            RegionMask(cube=cube, selector="edge")
        with pytest.raises(DomainError):
            RegionMask(cube=cube, selector="point")

    def test_csv_rows(self):
        cube = build_cube(1, 1, (0,), 6, 1.0)
        rows = list(mask_csv_rows(cube, "outer"))
        assert len(rows) == 4
        assert rows[0][0] == "outer"
        assert all(len(r) == 3 for r in rows)


class TestVolume:
    def test_bookkeeping_volume(self):
        assert build_cube(1, 1, (0,), 4, 1.0).volume == 8.0
        assert build_cube(2, 1, (0, 0), 4, 1.0).volume == 64.0

    def test_spacing_preserves_extent(self):
        coarse = build_cube(1, 1, (0,), 4, 1.0)
        fine = build_cube(1, 1, (0,), 4, 0.5)
        assert fine.points_per_axis == 15
        assert fine.axis_coordinates(0).max() == 3.5
        assert coarse.axis_coordinates(0).max() == 3.0
