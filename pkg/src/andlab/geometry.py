"""Multi-particle cubes and the finite-difference grids living on them.

A cube of half-side L centered at an integer point u of Z^(n*d) carries the
grid of spacing-h points strictly inside it (max-norm), so the Dirichlet
exterior starts one step outside the grid.  The interior region is the
concentric cube of half-side L/3; the outer region is the shell of
thickness 2 at the boundary.  Both are only defined for L > 3, which keeps
them disjoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResourceError

DEFAULT_MAX_GRID_POINTS = 1_000_000


@dataclass(frozen=True)
class LatticeCube:
    """n-particle cube with its enumerated interior grid.

    Grid points are indexed flat in C order over the n*d axes; axis k holds
    coordinate ``center[k] + m*h`` for m in ``-(points_per_axis-1)//2 ..
    (points_per_axis-1)//2``.  Immutable after construction.
    """

    n: int
    d: int
    center: tuple[int, ...]
    half_side: float
    spacing: float

    @property
    def total_dim(self) -> int:
        return self.n * self.d

    @property
    def points_per_axis(self) -> int:
        return 2 * round(self.half_side / self.spacing) - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.total_dim

    @property
    def grid_size(self) -> int:
        return self.points_per_axis ** self.total_dim

    @property
    def volume(self) -> float:
        """Bookkeeping volume (2L)^(n*d)."""
        return (2.0 * self.half_side) ** self.total_dim

    def axis_offsets(self) -> np.ndarray:
        """Signed offsets m*h from the center, shared by every axis."""
        half = (self.points_per_axis - 1) // 2
        return self.spacing * np.arange(-half, half + 1)

    def axis_coordinates(self, axis: int) -> np.ndarray:
        return self.center[axis] + self.axis_offsets()

    def grid_points(self) -> np.ndarray:
        """All grid points, shape (grid_size, total_dim), C order."""
        axes = [self.axis_coordinates(k) for k in range(self.total_dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def max_norm_offsets(self) -> np.ndarray:
        """|x - u| in max-norm for every grid point, shape (grid_size,)."""
        offs = np.abs(self.axis_offsets())
        dist = np.zeros(self.shape)
        for k in range(self.total_dim):
            view = offs.reshape((1,) * k + (-1,) + (1,) * (self.total_dim - k - 1))
            dist = np.maximum(dist, view)
        return dist.reshape(-1)

    def _require_regions(self):
        if not self.half_side > 3:
            raise DomainError(
                f"interior/outer regions need half_side > 3, got {self.half_side}"
            )

    def interior_indices(self) -> np.ndarray:
        """Flat indices of points with |x - u| < L/3."""
        self._require_regions()
        return np.nonzero(self.max_norm_offsets() < self.half_side / 3.0)[0]

    def outer_indices(self) -> np.ndarray:
        """Flat indices of points with L - 2 <= |x - u| < L."""
        self._require_regions()
        return np.nonzero(self.max_norm_offsets() >= self.half_side - 2.0)[0]

    def index_of(self, point) -> int:
        """Flat index of a grid point given by coordinates."""
        half = (self.points_per_axis - 1) // 2
        multi = []
        for k, c in enumerate(point):
            m = (c - self.center[k]) / self.spacing
            mi = round(m)
            if abs(m - mi) > 1e-9 or abs(mi) > half:
                raise DomainError(f"{tuple(point)} is not a grid point of this cube")
            multi.append(mi + half)
        return int(np.ravel_multi_index(multi, self.shape))

    def point(self, index: int) -> tuple[float, ...]:
        multi = np.unravel_index(index, self.shape)
        half = (self.points_per_axis - 1) // 2
        return tuple(
            self.center[k] + self.spacing * (int(m) - half) for k, m in enumerate(multi)
        )


def build_cube(
    n: int,
    d: int,
    center: tuple[int, ...],
    half_side: float,
    spacing: float = 1.0,
    max_grid_points: int = DEFAULT_MAX_GRID_POINTS,
) -> LatticeCube:
    """Validate the cube parameters and enumerate its grid bookkeeping.

    spacing must divide the half-side evenly; the grid then has
    2*(L/h) - 1 points per axis.
    """
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n} d={d}")
    if len(center) != n * d:
        raise DomainError(f"center must have n*d = {n * d} coordinates, got {len(center)}")
    if any(int(c) != c for c in center):
        raise DomainError("cube center must be an integer lattice point")
    if not half_side > 0:
        raise DomainError(f"half_side must be > 0, got {half_side}")
    if not spacing > 0:
        raise DomainError(f"spacing must be > 0, got {spacing}")
    ratio = half_side / spacing
    if abs(ratio - round(ratio)) > 1e-9:
        raise DomainError(
            f"spacing {spacing} does not divide half_side {half_side} evenly"
        )
    cube = LatticeCube(
        n=n, d=d, center=tuple(int(c) for c in center),
        half_side=float(half_side), spacing=float(spacing),
    )
    if cube.grid_size > max_grid_points:
        raise ResourceError(
            f"grid of {cube.points_per_axis}^{cube.total_dim} = {cube.grid_size} points "
            f"across {cube.total_dim} axes exceeds budget {max_grid_points}"
        )
    return cube


@dataclass(frozen=True)
class RegionMask:
    """Selection of cube grid indices: interior, outer, full, or one point."""

    cube: LatticeCube
    selector: str
    point: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.selector not in ("interior", "outer", "full", "point"):
            raise DomainError(f"unknown mask selector {self.selector!r}")
        if self.selector == "point" and self.point is None:
            raise DomainError("point selector requires a point")

    def indices(self) -> np.ndarray:
        return mask_indices(self.cube, self.selector, self.point)


def mask_indices(
    cube: LatticeCube, selector: str, point: tuple[float, ...] | None = None
) -> np.ndarray:
    """Flat grid indices selected by one of the region masks."""
    if selector == "interior":
        return cube.interior_indices()
    if selector == "outer":
        return cube.outer_indices()
    if selector == "full":
        return np.arange(cube.grid_size)
    if selector == "point":
        if point is None:
            raise DomainError("point selector requires a point")
        return np.array([cube.index_of(point)])
    raise DomainError(f"unknown mask selector {selector!r}")


def mask_csv_rows(cube: LatticeCube, selector: str):
    """Debug export: one row (selector, flat index, coordinates...) per point."""
    pts = cube.grid_points()
    for idx in mask_indices(cube, selector):
        yield [selector, int(idx)] + [float(c) for c in pts[idx]]
