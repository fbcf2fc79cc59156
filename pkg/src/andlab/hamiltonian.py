"""Sparse n-particle Hamiltonians -Delta + U + V on cube grids.

The kinetic part is the second-order central-difference Laplacian with
Dirichlet conditions (grid points strictly inside the cube, exterior
values zero), assembled as a Kronecker sum of one-axis tridiagonal
blocks.  The potential is the sum of single-particle values V(x_k), read
from the unit lattice cell containing each particle coordinate; the
interaction U sums a finite-range pair potential over unordered particle
pairs in the max-norm.  With u0 = 0 the full matrix is exactly the
Kronecker sum of the n single-particle matrices, which the spectrum
oracle below exploits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .fields import FieldSample, LatticeBox
from .geometry import LatticeCube

INTERACTION_PROFILES = ("step", "hat")


@dataclass(frozen=True)
class InteractionSpec:
    """Finite-range pair potential Phi with supp Phi in [0, r0]."""

    r0: float = 1.0
    u0: float = 0.0
    profile: str = "step"

    def __post_init__(self):
        if self.u0 < 0:
            raise DomainError(f"interaction amplitude u0 must be >= 0, got {self.u0}")
        if self.r0 < 0:
            raise DomainError(f"interaction range r0 must be >= 0, got {self.r0}")
        if self.profile not in INTERACTION_PROFILES:
            raise DomainError(f"unknown interaction profile {self.profile!r}")

    def phi(self, r):
        """Pair potential at distance r (vectorized)."""
        r = np.asarray(r, dtype=float)
        if self.profile == "step":
            out = np.where(r <= self.r0, self.u0, 0.0)
        else:  # hat: linear decay to zero at r0
            out = np.where(r <= self.r0, self.u0 * np.maximum(0.0, 1.0 - r / max(self.r0, 1e-300)), 0.0)
        return out if out.ndim else float(out)


def interaction_energy(x, spec: InteractionSpec, d: int | None = None) -> float:
    """Sum of Phi over unordered particle pairs at max-norm pair distance.

    x is the n-particle point, either as an (n, d) array of particle
    coordinates or as the flat n*d tuple (then d defaults to 1 and can be
    overridden).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        pts = x
    else:
        if d is None:
            d = 1
        if d < 1 or x.size % d != 0:
            raise DomainError(
                f"point of size {x.size} is not n particles in dimension {d}"
            )
        pts = x.reshape(-1, d)
    n = pts.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            r = float(np.max(np.abs(pts[i] - pts[j])))
            total += spec.phi(r)
    return total


@dataclass
class AssembledHamiltonian:
    """Sparse symmetric H over a cube grid, with its diagonal split out.

    ``potential_part`` and ``interaction_part`` are the V-sum and U values
    on the grid (flat, C order); the Laplacian contributes 2*n*d/h^2 to
    every diagonal entry and -1/h^2 per grid neighbor.  ``gershgorin_lower``
    is the rowwise Gershgorin bound min_i (A_ii - sum_j |A_ij|); every
    eigenvalue lies above it.
    """

    cube: LatticeCube
    matrix: sp.csr_matrix = field(repr=False)
    potential_part: np.ndarray = field(repr=False)
    interaction_part: np.ndarray = field(repr=False)
    gershgorin_lower: float
    #: (diagonal kinetic term 2*n*d/h^2, grid-neighbor coupling -1/h^2)
    laplacian_stencil: tuple[float, float] = (0.0, 0.0)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        """Dense copy of the matrix, cached after the first request."""
        cached = getattr(self, "_dense_cache", None)
        if cached is None:
            cached = self.matrix.toarray()
            self._dense_cache = cached
        return cached


def required_field_box(cube: LatticeCube) -> LatticeBox:
    """Smallest lattice box of unit cells covering every particle coordinate."""
    d = cube.d
    lo = [None] * d
    hi = [None] * d
    for axis in range(cube.total_dim):
        coords = cube.axis_coordinates(axis)
        a = int(np.floor(coords[0]))
        b = int(np.floor(coords[-1]))
        i = axis % d
        lo[i] = a if lo[i] is None else min(lo[i], a)
        hi[i] = b if hi[i] is None else max(hi[i], b)
    return LatticeBox(tuple(lo), tuple(hi))


def _axis_tridiagonal(m: int, h: float) -> sp.csr_matrix:
    main = np.full(m, 2.0 / h**2)
    off = np.full(m - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


@lru_cache(maxsize=32)
def _laplacian_cached(m: int, spacing: float, total: int) -> sp.csr_matrix:
    """Kronecker-sum Laplacian, shared across trials on equal grids.

    Treated as immutable by all callers; symmetry is checked once here
    and preserved by the diagonal additions in ``assemble``.
    """
    t = _axis_tridiagonal(m, spacing)
    result = None
    for axis in range(total):
        before = sp.identity(m**axis, format="csr")
        after = sp.identity(m ** (total - axis - 1), format="csr")
        term = sp.kron(sp.kron(before, t), after, format="csr")
        result = term if result is None else result + term
    result = result.tocsr()
    result.sort_indices()
    asym = abs(result - result.T)
    if asym.nnz and asym.max() > 0:
        raise AssertionError("Laplacian assembly is not symmetric")
    return result


def _laplacian(cube: LatticeCube) -> sp.csr_matrix:
    return _laplacian_cached(cube.points_per_axis, cube.spacing, cube.total_dim)


def _potential_diagonal(cube: LatticeCube, fld: FieldSample) -> np.ndarray:
    """V-sum over particles, read from the unit cell containing each coordinate."""
    box = fld.spec.region
    d = cube.d
    m = cube.points_per_axis
    shape = cube.shape
    missing: list[tuple[int, ...]] = []
    per_axis_cells = []
    for axis in range(cube.total_dim):
        cells = np.floor(cube.axis_coordinates(axis)).astype(int)
        i = axis % d
        if cells.min() < box.lo[i] or cells.max() > box.hi[i]:
            for c in cells:
                if not box.lo[i] <= c <= box.hi[i]:
                    site = [0] * d
                    site[i] = int(c)
                    missing.append(tuple(site))
        per_axis_cells.append(cells)
    if missing:
        raise DomainError(
            f"field sample does not cover the cube; missing sites (component-wise): "
            f"{sorted(set(missing))[:8]}"
        )
    total = np.zeros(shape)
    for k in range(cube.n):
        axis_indices = [per_axis_cells[k * d + a] - box.lo[a] for a in range(d)]
        vk = fld.values[np.ix_(*axis_indices)]  # shape (m,)*d
        view = vk.reshape((1,) * (k * d) + (m,) * d + (1,) * ((cube.n - 1 - k) * d))
        total = total + view
    return total.reshape(-1)


def _interaction_diagonal(cube: LatticeCube, spec: InteractionSpec) -> np.ndarray:
    if cube.n == 1 or spec.u0 == 0.0:
        return np.zeros(cube.grid_size)
    d = cube.d
    m = cube.points_per_axis
    total_axes = cube.total_dim
    u = np.zeros(cube.shape)
    for i in range(cube.n):
        for j in range(i + 1, cube.n):
            pair_dist = np.zeros((1,) * total_axes)
            for a in range(d):
                ci = cube.axis_coordinates(i * d + a)
                cj = cube.axis_coordinates(j * d + a)
                delta = np.abs(ci[:, None] - cj[None, :])
                shape = [1] * total_axes
                shape[i * d + a] = m
                shape[j * d + a] = m
                pair_dist = np.maximum(pair_dist, delta.reshape(shape))
            u = u + spec.phi(pair_dist)
    return u.reshape(-1)


def assemble(
    cube: LatticeCube, fld: FieldSample, interaction: InteractionSpec
) -> AssembledHamiltonian:
    """Assemble H = -Delta + U + V on the cube grid, Dirichlet outside."""
    lap = _laplacian(cube)
    v_diag = _potential_diagonal(cube, fld)
    u_diag = _interaction_diagonal(cube, interaction)
    matrix = (lap + sp.diags(v_diag + u_diag)).tocsr()
    matrix.sort_indices()

    # symmetric by construction: symmetric Laplacian plus a diagonal;
    # the rowwise Gershgorin bound uses the uniform -1/h^2 off-diagonals
    diag = matrix.diagonal()
    h = cube.spacing
    neighbors = np.diff(matrix.indptr) - 1
    gersh_lower = float(np.min(diag - neighbors / h**2))
    return AssembledHamiltonian(
        cube=cube,
        matrix=matrix,
        potential_part=v_diag,
        interaction_part=u_diag,
        gershgorin_lower=gersh_lower,
        laplacian_stencil=(2.0 * cube.total_dim / h**2, -1.0 / h**2),
    )


def kronecker_sum_spectrum(eigenvalues, n: int) -> np.ndarray:
    """All n-fold sums of the given single-particle eigenvalues, sorted."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    sums = eigenvalues.copy()
    for _ in range(n - 1):
        sums = np.add.outer(sums, eigenvalues).reshape(-1)
    return np.sort(sums)


def kronecker_sum_oracle(
    h1: AssembledHamiltonian, n: int, interaction: InteractionSpec | None = None
) -> np.ndarray:
    """Non-interacting n-particle spectrum from the 1-particle matrix.

    Only valid for u0 = 0; with interaction present the tensor structure
    breaks and this oracle must not be used.
    """
    if interaction is not None and interaction.u0 != 0.0:
        raise DomainError("kronecker sum oracle requires a non-interacting spec (u0 = 0)")
    if h1.cube.n != 1:
        raise DomainError("kronecker sum oracle takes a single-particle Hamiltonian")
    eigs = np.linalg.eigvalsh(h1.matrix.toarray())
    return kronecker_sum_spectrum(eigs, n)


def to_matrix_market(h: AssembledHamiltonian) -> str:
    """MatrixMarket coordinate text of the sparse matrix, for cross-checks."""
    buf = io.BytesIO()
    from scipy.io import mmwrite

    mmwrite(buf, h.matrix.tocoo())
    return buf.getvalue().decode("ascii")
