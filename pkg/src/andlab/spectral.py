"""Spectral bottoms, resolvent blocks, and decay-envelope verification.

Everything here is deterministic: dense eigensolves below a size
threshold, shift-invert Lanczos above it (with explicit residual
checks), sparse LU resolvent solves whose per-column residuals are
recorded in a module-level registry, and a fixed-start power iteration
for operator norms of resolvent blocks.  The envelope check compares
measured |G(E; x, y)| against the off-spectrum exponential bound
exp(-gamma * sqrt(eta) * |x - y|) with its distance-zero prefactor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, NumericError, ResourceError, SpectralCollisionError
from .geometry import RegionMask
from .hamiltonian import AssembledHamiltonian

#: residual tolerance for every linear solve (eigenpairs and resolvent columns)
RESIDUAL_TOL = 1e-8
#: below this spectral gap the resolvent is treated as numerically singular
COLLISION_GAP = 1e-10
#: dense eigensolver cutoff (full spectrum below, Lanczos above)
DENSE_EIGEN_CUTOFF = 2000
#: below this dimension resolvent systems are solved by dense LAPACK
DENSE_SOLVE_CUTOFF = 256
#: direct sparse LU cutoff for resolvent solves (iterative above)
DIRECT_SOLVE_CUTOFF = 50_000
#: memory guard on dense solution blocks, in float64 entries
MAX_SOLVE_ENTRIES = 200_000_000


@dataclass
class SolveStats:
    """Running tally of resolvent solves, their residuals, and failures."""

    count: int = 0
    max_residual: float = 0.0
    failures: int = 0

    def record(self, residual: float) -> None:
        self.count += 1
        if residual > self.max_residual:
            self.max_residual = float(residual)

    def record_failure(self) -> None:
        self.failures += 1

    def reset(self) -> None:
        self.count = 0
        self.max_residual = 0.0
        self.failures = 0


#: process-wide registry interrogated by stress tests and reports
SOLVE_STATS = SolveStats()


@dataclass
class SpectralData:
    """Sorted eigenvalues of one Hamiltonian, possibly only the bottom few.

    When ``complete`` is False only the smallest eigenvalues are present,
    so ``gap_at`` may overestimate the true distance to the spectrum for
    energies above the computed range; callers that need collision
    protection at such energies must rely on solve residuals instead.
    """

    eigenvalues: np.ndarray = field(repr=False)
    complete: bool = True

    @property
    def e0(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def k_lowest(self) -> np.ndarray:
        return self.eigenvalues

    def gap_at(self, energy: float) -> float:
        return float(np.min(np.abs(self.eigenvalues - energy)))


def spectral_bottom(h: AssembledHamiltonian, k: int = 8) -> SpectralData:
    """Lowest eigenvalues of H, dense when small enough, else shift-invert.

    Raises NumericError (carrying the best achieved residual) if the
    iterative eigenpairs fail the residual check.
    """
    dim = h.dim
    if k < 1:
        raise DomainError(f"need k >= 1 eigenvalues, got {k}")
    if k > dim:
        raise DomainError(f"requested {k} eigenvalues of a dimension-{dim} matrix")
    if dim <= DENSE_EIGEN_CUTOFF or k >= dim - 1:
        eigenvalues = np.linalg.eigvalsh(h.dense())
        data = SpectralData(eigenvalues=eigenvalues, complete=True)
    else:
        sigma = h.gershgorin_lower - 1.0
        vals, vecs = spla.eigsh(h.matrix, k=k, sigma=sigma, which="LM")
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]
        residuals = np.linalg.norm(h.matrix @ vecs - vecs * vals, axis=0)
        worst = float(np.max(residuals))
        if worst > RESIDUAL_TOL:
            raise NumericError(
                f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}",
                best_residual=worst,
            )
        data = SpectralData(eigenvalues=vals, complete=False)
    if data.e0 < h.gershgorin_lower - 1e-9:
        raise AssertionError(
            f"ground energy {data.e0} below Gershgorin bound {h.gershgorin_lower}"
        )
    return data


def largest_singular_value(block: np.ndarray) -> float:
    """Operator (spectral) norm by fixed-start power iteration on B^T B.

    Deterministic: the start vector is fixed, tolerance 1e-10 on the
    Rayleigh estimate, hard cap of 10^4 sweeps.
    """
    block = np.atleast_2d(np.asarray(block, dtype=float))
    if block.size == 0 or not np.any(block):
        return 0.0
    ncols = block.shape[1]
    v = np.ones(ncols) + 1e-3 * np.linspace(0.0, 1.0, ncols)
    v /= np.linalg.norm(v)
    previous = 0.0
    for _ in range(10_000):
        w = block.T @ (block @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        estimate = float(np.sqrt(norm_w))
        if abs(estimate - previous) <= 1e-10 * max(1.0, estimate):
            return estimate
        previous = estimate
    return previous


class _ResolventSolver:
    """Columns of (H - E)^{-1} with residual accounting.

    Factorizes once (sparse LU up to the direct cutoff, MINRES beyond),
    checks every column residual against RESIDUAL_TOL, and records each
    solve in SOLVE_STATS.  Residual failures raise
    SpectralCollisionError: at the accuracy demanded here a breakdown is
    evidence that E sits numerically on the spectrum.
    """

    def __init__(
        self,
        h: AssembledHamiltonian,
        energy: float,
        spectral: SpectralData | None = None,
    ):
        if spectral is not None and spectral.gap_at(energy) < COLLISION_GAP:
            raise SpectralCollisionError(
                f"energy {energy} within {COLLISION_GAP:.0e} of a computed eigenvalue"
            )
        self.energy = float(energy)
        self.dim = h.dim
        self._lu = None
        self._dense = None
        self._sparse_shifted = None
        self.direct = self.dim <= DIRECT_SOLVE_CUTOFF
        if self.dim <= DENSE_SOLVE_CUTOFF:
            shifted = h.dense().copy()
            diag = np.arange(self.dim)
            shifted[diag, diag] -= self.energy
            self._dense = shifted
        else:
            self._sparse_shifted = (h.matrix - self.energy * sp.identity(h.dim)).tocsc()
            if self.direct:
                try:
                    self._lu = spla.splu(self._sparse_shifted)
                except RuntimeError as exc:  # exactly singular factorization
                    SOLVE_STATS.record_failure()
                    raise SpectralCollisionError(
                        f"LU factorization of H - E broke down at E = {energy}: {exc}"
                    ) from exc

    def solve_columns(self, column_indices: np.ndarray) -> np.ndarray:
        """Dense (dim, k) block of resolvent columns e_j -> (H-E)^{-1} e_j."""
        column_indices = np.asarray(column_indices, dtype=int)
        k = column_indices.size
        if self.dim * k > MAX_SOLVE_ENTRIES:
            raise ResourceError(
                f"resolvent block of {self.dim} x {k} entries exceeds the solve budget"
            )
        rhs = np.zeros((self.dim, k))
        rhs[column_indices, np.arange(k)] = 1.0
        if self._dense is not None:
            try:
                solution = np.linalg.solve(self._dense, rhs)
            except np.linalg.LinAlgError as exc:
                SOLVE_STATS.record_failure()
                raise SpectralCollisionError(
                    f"dense solve of H - E broke down at E = {self.energy}: {exc}"
                ) from exc
        elif self._lu is not None:
            solution = self._lu.solve(rhs)
        else:
            solution = np.empty_like(rhs)
            for j in range(k):
                x, info = spla.minres(
                    self._sparse_shifted, rhs[:, j], rtol=1e-12, maxiter=20 * self.dim
                )
                if info != 0:
                    SOLVE_STATS.record_failure()
                    raise SpectralCollisionError(
                        f"iterative resolvent solve did not converge at E = {self.energy}"
                    )
                solution[:, j] = x
        operator = self._dense if self._dense is not None else self._sparse_shifted
        residuals = np.linalg.norm(operator @ solution - rhs, axis=0)
        worst = float(np.max(residuals)) if k else 0.0
        for r in residuals:
            SOLVE_STATS.record(float(r))
        if worst > RESIDUAL_TOL:
            SOLVE_STATS.record_failure()
            raise SpectralCollisionError(
                f"resolvent residual {worst:.3e} at E = {self.energy} exceeds "
                f"{RESIDUAL_TOL:.0e}; treating E as numerically on the spectrum"
            )
        return solution


@dataclass(frozen=True)
class ResolventBlockNorm:
    """Operator norm of a masked resolvent block, with the solve method used."""

    energy: float
    from_mask: RegionMask
    to_mask: RegionMask
    norm: float
    method: str  # "dense" = direct factorization, "iterative" = Krylov solves


def _block_norm_from_indices(
    h: AssembledHamiltonian,
    energy: float,
    source_indices: np.ndarray,
    observe_indices: np.ndarray,
    spectral: SpectralData | None = None,
) -> tuple[float, str]:
    source_indices = np.asarray(source_indices, dtype=int)
    observe_indices = np.asarray(observe_indices, dtype=int)
    if source_indices.size == 0 or observe_indices.size == 0:
        raise DomainError("resolvent block needs nonempty source and observation sets")
    solver = _ResolventSolver(h, energy, spectral=spectral)
    solution = solver.solve_columns(source_indices)
    method = "dense" if solver.direct else "iterative"
    return largest_singular_value(solution[observe_indices, :]), method


def resolvent_block_norm(
    h: AssembledHamiltonian,
    energy: float,
    from_mask: RegionMask,
    to_mask: RegionMask,
    spectral: SpectralData | None = None,
) -> ResolventBlockNorm:
    """Operator norm of the resolvent block from one region mask to another.

    Solves (H - E) x = e_j for every index in ``from_mask`` and measures
    the solutions on the rows of ``to_mask``; the norm is the largest
    singular value of that rectangular block.
    """
    for mask in (from_mask, to_mask):
        if mask.cube != h.cube:
            raise DomainError("region mask cube does not match the Hamiltonian cube")
    norm, method = _block_norm_from_indices(
        h, energy, from_mask.indices(), to_mask.indices(), spectral=spectral
    )
    return ResolventBlockNorm(
        energy=float(energy),
        from_mask=from_mask,
        to_mask=to_mask,
        norm=norm,
        method=method,
    )


def combes_thomas_envelope(
    energy: float,
    ground_energy: float,
    gamma_ct: float,
    total_dim: int,
    distance,
):
    """Off-spectrum Green-function envelope at the given max-norm distance.

    For eta = e0 - E > 0 and gamma in (0, 1) the bound is
    exp(gamma*sqrt(eta*total_dim) - gamma*sqrt(eta)*distance) / ((1-gamma^2)*eta).
    """
    if not 0.0 < gamma_ct < 1.0:
        raise DomainError(f"gamma_ct must lie in (0, 1), got {gamma_ct}")
    eta = ground_energy - energy
    if eta <= 0.0:
        raise DomainError(
            f"energy {energy} is not below the spectral bottom {ground_energy}"
        )
    distance = np.asarray(distance, dtype=float)
    prefactor = 1.0 / ((1.0 - gamma_ct**2) * eta)
    out = prefactor * np.exp(
        gamma_ct * np.sqrt(eta * total_dim) - gamma_ct * np.sqrt(eta) * distance
    )
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CtRow:
    """One measured point-to-point Green function value versus its envelope."""

    source_index: int
    observe_index: int
    distance: float
    measured: float
    envelope: float
    ratio: float


@dataclass
class CtReport:
    """Envelope verification outcome over a batch of grid-point pairs."""

    energy: float
    ground_energy: float
    eta: float
    gamma_ct: float
    rows: list[CtRow] = field(repr=False)
    violations: int = 0
    max_ratio: float = 0.0


#: minimum spectral distance at which the envelope check is meaningful
MIN_CT_ETA = 0.05


def verify_combes_thomas(
    h: AssembledHamiltonian,
    energy: float,
    gamma_ct: float,
    pairs,
    tolerance: float = 1e-9,
    spectral: SpectralData | None = None,
) -> CtReport:
    """Check |G(E; x, y)| against the decay envelope for grid-index pairs.

    Pairs are (observe, source) grid indices; columns are solved once per
    distinct source.  A pair violates when measured exceeds envelope by
    more than the tolerance.
    """
    if spectral is None:
        spectral = spectral_bottom(h)
    eta = spectral.e0 - energy
    if eta < MIN_CT_ETA:
        raise DomainError(
            f"spectral distance eta = {eta:.4g} below the minimum {MIN_CT_ETA} "
            "required for a meaningful envelope check"
        )
    cube = h.cube
    by_source: dict[int, list[int]] = {}
    for observe, source in pairs:
        by_source.setdefault(int(source), []).append(int(observe))
    solver = _ResolventSolver(h, energy, spectral=spectral)
    sources = sorted(by_source)
    solution = solver.solve_columns(np.asarray(sources, dtype=int))
    rows: list[CtRow] = []
    violations = 0
    max_ratio = 0.0
    for j, source in enumerate(sources):
        y = cube.point(source)
        for observe in by_source[source]:
            x = cube.point(observe)
            distance = float(np.max(np.abs(np.asarray(x) - np.asarray(y))))
            measured = float(abs(solution[observe, j]))
            envelope = combes_thomas_envelope(
                energy, spectral.e0, gamma_ct, cube.total_dim, distance
            )
            ratio = measured / envelope
            if measured > envelope + tolerance:
                violations += 1
            if ratio > max_ratio:
                max_ratio = ratio
            rows.append(
                CtRow(
                    source_index=source,
                    observe_index=observe,
                    distance=distance,
                    measured=measured,
                    envelope=envelope,
                    ratio=ratio,
                )
            )
    rows.sort(key=lambda r: (r.source_index, r.observe_index))
    return CtReport(
        energy=energy,
        ground_energy=spectral.e0,
        eta=eta,
        gamma_ct=gamma_ct,
        rows=rows,
        violations=violations,
        max_ratio=max_ratio,
    )
