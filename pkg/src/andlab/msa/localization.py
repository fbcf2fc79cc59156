"""Qualitative localization demonstrations on a single Hamiltonian.

Two views: exponential-decay fits of the lowest eigenvectors (slope of
the log amplitude envelope against max-norm distance from the peak), and
the position-moment trace ``||X^s exp(-itH) P_I 1_K||`` over a finite
time grid via a full spectral decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, NumericError, ResourceError
from ..hamiltonian import AssembledHamiltonian
from ..spectral import DENSE_EIGEN_CUTOFF, RESIDUAL_TOL

#: amplitudes below this floor are dropped from decay fits (log of 0 guard)
AMPLITUDE_FLOOR = 1e-14
#: dense spectral decomposition cap for the dynamical moment
MOMENT_DIM_CAP = 4000
#: an envelope fit below this R^2 is reported as non-localized
MIN_FIT_R2 = 0.5


@dataclass(frozen=True)
class DecayFit:
    """Envelope decay fit of one eigenvector."""

    index: int
    eigenvalue: float
    peak_index: int
    #: positive rate means the envelope decays as exp(-rate * distance)
    rate: float
    r_squared: float
    localized: bool
    shells_used: int


def _lowest_eigenpairs(h: AssembledHamiltonian, k: int) -> tuple[np.ndarray, np.ndarray]:
    dim = h.dim
    if k < 1:
        raise DomainError(f"need k >= 1 eigenvectors, got {k}")
    if k > dim:
        raise DomainError(f"requested {k} eigenvectors of a dimension-{dim} matrix")
    if dim <= DENSE_EIGEN_CUTOFF or k >= dim - 1:
        vals, vecs = np.linalg.eigh(h.dense())
        return vals[:k], vecs[:, :k]
    import scipy.sparse.linalg as spla

    vals, vecs = spla.eigsh(h.matrix, k=k, sigma=h.gershgorin_lower - 1.0, which="LM")
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    residuals = np.linalg.norm(h.matrix @ vecs - vecs * vals, axis=0)
    worst = float(np.max(residuals))
    if worst > RESIDUAL_TOL:
        raise NumericError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e}",
            best_residual=worst,
        )
    return vals, vecs


def eigenfunction_decay_fit(h: AssembledHamiltonian, k: int = 4) -> list[DecayFit]:
    """Fit exponential envelopes to the k lowest eigenvectors.

    For each eigenvector the amplitude envelope is the maximum |psi|
    over shells of equal max-norm distance from the peak grid point; the
    rate is minus the slope of ln(envelope) against distance.  Flat or
    irregular envelopes (R^2 below 0.5) are flagged non-localized rather
    than raising.
    """
    vals, vecs = _lowest_eigenpairs(h, k)
    cube = h.cube
    points = cube.grid_points()
    fits: list[DecayFit] = []
    for j in range(vals.size):
        amplitude = np.abs(vecs[:, j])
        peak = int(np.argmax(amplitude))
        distances = np.max(np.abs(points - points[peak]), axis=1)
        # bin to exact grid shells; distances are multiples of the spacing
        shells = np.round(distances / cube.spacing).astype(int)
        nshell = int(shells.max()) + 1
        envelope = np.zeros(nshell)
        np.maximum.at(envelope, shells, amplitude)
        radii = np.arange(nshell) * cube.spacing
        keep = envelope > AMPLITUDE_FLOOR
        rate, r2 = 0.0, 0.0
        used = int(np.sum(keep))
        if used >= 3:
            x = radii[keep]
            y = np.log(envelope[keep])
            slope, intercept = np.polyfit(x, y, 1)
            predicted = slope * x + intercept
            ss_res = float(np.sum((y - predicted) ** 2))
            ss_tot = float(np.sum((y - y.mean()) ** 2))
            r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
            rate = float(-slope)
        localized = bool(r2 >= MIN_FIT_R2 and rate > 0)
        fits.append(
            DecayFit(
                index=j,
                eigenvalue=float(vals[j]),
                peak_index=peak,
                rate=rate,
                r_squared=float(r2),
                localized=localized,
                shells_used=used,
            )
        )
    return fits


@dataclass(frozen=True)
class DynamicalMomentSpec:
    """Position-moment experiment: exponent, window, region, times.

    The spectral window is [interval_low, interval_high]; the initial
    region K holds the grid points with max-norm at most region_radius
    from the origin; time_grid entries must be finite and non-negative.
    """

    s: float
    interval_low: float
    interval_high: float
    region_radius: float
    time_grid: tuple[float, ...]

    def __post_init__(self):
        if self.s <= 0:
            raise DomainError(f"moment exponent s must be positive, got {self.s}")
        if self.interval_high < self.interval_low:
            raise DomainError(
                f"empty interval ordering: [{self.interval_low}, {self.interval_high}]"
            )
        if self.region_radius < 0:
            raise DomainError(f"region radius must be >= 0, got {self.region_radius}")
        if len(self.time_grid) == 0:
            raise DomainError("time grid must be non-empty")
        grid = np.asarray(self.time_grid, dtype=float)
        if not np.all(np.isfinite(grid)) or np.any(grid < 0):
            raise DomainError("time grid entries must be finite and non-negative")


def default_time_grid(
    count: int = 64, t_min: float = 1e-2, t_max: float = 1e3
) -> tuple[float, ...]:
    """Logarithmic time grid used when none is configured."""
    if count < 2 or t_min <= 0 or t_max <= t_min:
        raise DomainError(
            f"invalid time grid request: count={count}, t_min={t_min}, t_max={t_max}"
        )
    return tuple(float(t) for t in np.geomspace(t_min, t_max, count))


@dataclass
class MomentTrace:
    """Moment values over the time grid and their maximum."""

    spec: DynamicalMomentSpec
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    grid_max: float = 0.0
    #: rank of the spectral projection P_I
    interval_rank: int = 0
    #: number of grid points in the initial region K
    region_size: int = 0


def dynamical_moment(h: AssembledHamiltonian, spec: DynamicalMomentSpec) -> MomentTrace:
    """Compute ||X^s exp(-itH) P_I 1_K|| on the time grid, by full eigh.

    X is the max-norm position operator |x| acting by multiplication.
    An empty spectral window or empty region yields an all-zero trace.
    """
    dim = h.dim
    if dim > MOMENT_DIM_CAP:
        raise ResourceError(
            f"dynamical moment needs a dense decomposition; dimension {dim} "
            f"exceeds the cap {MOMENT_DIM_CAP}"
        )
    vals, vecs = np.linalg.eigh(h.dense())
    in_window = (vals >= spec.interval_low) & (vals <= spec.interval_high)
    points = h.cube.grid_points()
    position = np.max(np.abs(points), axis=1)
    region = np.flatnonzero(position <= spec.region_radius + 1e-12)
    times = np.asarray(spec.time_grid, dtype=float)
    rank = int(np.sum(in_window))
    if rank == 0 or region.size == 0:
        values = np.zeros(times.size)
        return MomentTrace(
            spec=spec,
            times=times,
            values=values,
            grid_max=0.0,
            interval_rank=rank,
            region_size=int(region.size),
        )
    q = vecs[:, in_window]
    lam = vals[in_window]
    weighted = (position**spec.s)[:, None] * q  # X^s Q, shape (dim, rank)
    q_region = q[region, :]  # rows of Q on K, shape (|K|, rank)
    values = np.empty(times.size)
    for i, t in enumerate(times):
        phases = np.exp(-1j * t * lam)
        block = (weighted * phases[None, :]) @ q_region.conj().T
        values[i] = float(np.linalg.norm(block, 2))
    return MomentTrace(
        spec=spec,
        times=times,
        values=values,
        grid_max=float(values.max()),
        interval_rank=rank,
        region_size=int(region.size),
    )
