"""Decay-rate arithmetic, derived scale parameters, and the NS decision.

The mass m and the energy threshold e_star are frozen at the initial
scale l0; ``at_length`` re-targets the same parameter set to a larger
cube without re-deriving them, which is how thresholds behave along a
scale sequence.  The nonsingularity (NS) test compares the
interior-to-outer resolvent block norm against exp(-rate * L).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

from ..errors import ConfigurationError, DomainError
from ..geometry import RegionMask
from ..hamiltonian import AssembledHamiltonian
from ..spectral import (
    SpectralData,
    SpectralCollisionError,
    resolvent_block_norm,
    spectral_bottom,
)

log = logging.getLogger(__name__)

#: largest scale a sequence is allowed to reach before truncation
MAX_SCALE_LENGTH = 500_000


def gamma_rate(m: float, length: float, n: int, N: int) -> float:
    """Decay rate m * (1 + L^(-1/8))^(N - n + 1) at scale length L."""
    if m <= 0:
        raise DomainError(f"mass m must be positive, got {m}")
    if length <= 0:
        raise DomainError(f"scale length must be positive, got {length}")
    if not 1 <= n <= N:
        raise DomainError(f"need 1 <= n <= N, got n={n}, N={N}")
    return m * (1.0 + length ** (-0.125)) ** (N - n + 1)


def ns_threshold(m: float, length: float, n: int, N: int) -> float:
    """NS block-norm threshold exp(-gamma_rate * L); decreasing in L."""
    return math.exp(-gamma_rate(m, length, n, N) * length)


@dataclass(frozen=True)
class ScaleParameters:
    """Derived constants of one run of the analysis, pinned to scale l0.

    m and e_star are functions of l0 only; ``length`` is the cube size
    currently under test and is the one field ``at_length`` changes.
    ``gamma_condition_ok`` records whether the side condition
    gamma_rate(m, l0, n) < 2^N * m held at derivation time.
    """

    N: int
    n: int
    d: int
    l0: int
    length: float
    p: float
    gamma_ct: float
    alpha: float
    m: float
    e_star: float
    gamma_condition_ok: bool

    @property
    def rate(self) -> float:
        """Decay rate at the current length (m stays pinned to l0)."""
        return gamma_rate(self.m, self.length, self.n, self.N)

    @property
    def threshold(self) -> float:
        """NS block-norm threshold exp(-rate * length)."""
        return math.exp(-self.rate * self.length)

    @property
    def edge_threshold(self) -> float:
        """Spectral-edge event threshold L^(-1/2) at the current length."""
        return self.length ** -0.5

    def paper_bound(self, p: float | None = None) -> float:
        """Probability bound L^(-2 p 4^(N-n)) at the current length."""
        if p is None:
            p = self.p
        return self.length ** (-2.0 * p * 4.0 ** (self.N - self.n))

    def at_length(self, length: float) -> "ScaleParameters":
        """Same derived constants, re-targeted to another cube size."""
        if length <= 0:
            raise DomainError(f"scale length must be positive, got {length}")
        return replace(self, length=float(length))


def derive_parameters(
    N: int,
    n: int,
    d: int,
    l0: int,
    p: float = 1.0,
    gamma_ct: float = 0.5,
    alpha: float = 1.5,
) -> ScaleParameters:
    """Derive m and e_star at the initial scale and bundle all constants.

    m = 2^(-N) * gamma_ct * l0^(-1/4) / (3*sqrt(2)) and
    e_star = (1/2) * l0^(-1/2).  Violated side conditions raise a
    configuration error naming the failing inequality.
    """
    if N < 1:
        raise ConfigurationError(f"particle count must satisfy N >= 1, got N={N}")
    if not 1 <= n <= N:
        raise ConfigurationError(f"particle index must satisfy 1 <= n <= N, got n={n}, N={N}")
    if d < 1:
        raise ConfigurationError(f"dimension must satisfy d >= 1, got d={d}")
    if l0 < 8:
        raise ConfigurationError(f"initial scale must satisfy L0 >= 8, got L0={l0}")
    if p <= 0:
        raise ConfigurationError(f"exponent parameter must satisfy p > 0, got p={p}")
    if not 0.0 < gamma_ct < 1.0:
        raise ConfigurationError(
            f"decay parameter must satisfy 0 < gamma_ct < 1, got gamma_ct={gamma_ct}"
        )
    if alpha <= 1.0:
        raise ConfigurationError(
            f"scale-growth exponent must satisfy alpha > 1, got alpha={alpha}"
        )
    m = 2.0 ** (-N) * gamma_ct * l0 ** (-0.25) / (3.0 * math.sqrt(2.0))
    e_star = 0.5 * l0 ** (-0.5)
    condition_ok = gamma_rate(m, l0, n, N) < 2.0**N * m
    if not condition_ok:
        log.warning(
            "side condition gamma_rate(m, L0, n) < 2^N m fails at L0=%d (N=%d, n=%d)",
            l0,
            N,
            n,
        )
    return ScaleParameters(
        N=N,
        n=n,
        d=d,
        l0=l0,
        length=float(l0),
        p=p,
        gamma_ct=gamma_ct,
        alpha=alpha,
        m=m,
        e_star=e_star,
        gamma_condition_ok=condition_ok,
    )


def scale_sequence(
    l0: int, alpha: float = 1.5, count: int = 3, max_length: int = MAX_SCALE_LENGTH
) -> list[int]:
    """Lengths L_0, L_1, ... with L_{k+1} = ceil(L_k^alpha).

    Truncated with a warning once the next length would exceed the
    budget ``max_length``.
    """
    if l0 < 8:
        raise ConfigurationError(f"initial scale must satisfy L0 >= 8, got L0={l0}")
    if alpha <= 1.0:
        raise ConfigurationError(
            f"scale-growth exponent must satisfy alpha > 1, got alpha={alpha}"
        )
    if count < 1:
        raise ConfigurationError(f"scale count must satisfy count >= 1, got {count}")
    lengths = [int(l0)]
    while len(lengths) < count:
        nxt = math.ceil(lengths[-1] ** alpha)
        if nxt > max_length:
            log.warning(
                "scale sequence truncated at %d entries: next length %d exceeds budget %d",
                len(lengths),
                nxt,
                max_length,
            )
            break
        lengths.append(nxt)
    return lengths


@dataclass(frozen=True)
class NsVerdict:
    """Outcome of one (E, m) nonsingularity decision on one cube."""

    energy: float
    verdict: str  # "NS" or "S"
    block_norm: float | None
    threshold: float
    reason: str  # "norm-ok", "norm-exceeded", or "spectral-collision"


def ns_test(
    h: AssembledHamiltonian,
    scale: ScaleParameters,
    energy: float,
    spectral: SpectralData | None = None,
) -> NsVerdict:
    """Decide NS versus S for one cube at one energy.

    NS means the interior-to-outer resolvent block norm stays at or
    below exp(-rate * L); an energy colliding with the spectrum is S by
    definition.  Pass precomputed spectral data when testing many
    energies against the same cube.
    """
    cube = h.cube
    if abs(cube.half_side - scale.length) > 1e-9:
        raise DomainError(
            f"scale parameters target length {scale.length} but the cube has "
            f"half side {cube.half_side}; re-target with at_length first"
        )
    threshold = scale.threshold
    if spectral is None:
        spectral = spectral_bottom(h)
    try:
        block = resolvent_block_norm(
            h,
            energy,
            RegionMask(cube, "interior"),
            RegionMask(cube, "outer"),
            spectral=spectral,
        )
    except SpectralCollisionError:
        return NsVerdict(
            energy=float(energy),
            verdict="S",
            block_norm=None,
            threshold=threshold,
            reason="spectral-collision",
        )
    if block.norm <= threshold:
        return NsVerdict(
            energy=float(energy),
            verdict="NS",
            block_norm=block.norm,
            threshold=threshold,
            reason="norm-ok",
        )
    return NsVerdict(
        energy=float(energy),
        verdict="S",
        block_norm=block.norm,
        threshold=threshold,
        reason="norm-exceeded",
    )
