"""Monte Carlo estimators for the probability bounds.

Three experiments: the spectral-edge event {e0 <= L^(-1/2)} (with the
secondary event {e0 <= b L^(-2)}), the existence of a singular energy at
or below e_star, and the large-deviation event for the empirical field
average.  Each trial derives its own seed from (master seed, trial
index), and aggregation touches results in submission order only, so
every report is a pure function of its arguments for any worker count.
Binomial uncertainty is reported as Wilson score intervals.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from ..errors import ConfigurationError, DomainError
from ..fields import FieldSpec, centered_box, generate_field, neg_exp_moment, trial_seed
from ..geometry import LatticeCube, build_cube
from ..hamiltonian import InteractionSpec, assemble, required_field_box
from ..parallel import map_indexed
from ..spectral import spectral_bottom
from .parameters import ScaleParameters, ns_test

log = logging.getLogger(__name__)

MIN_MC_TRIALS = 100
MIN_LDP_TRIALS = 1000


def wilson_interval(hits: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion.

    With zero (or all) hits this degenerates to the natural one-sided
    interval anchored at 0 (or 1).
    """
    if trials < 1:
        raise DomainError(f"need at least one trial, got {trials}")
    if not 0 <= hits <= trials:
        raise DomainError(f"hits {hits} outside [0, {trials}]")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence}")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = hits / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / trials + z**2 / (4.0 * trials**2))
    low = 0.0 if hits == 0 else max(0.0, center - half)
    high = 1.0 if hits == trials else min(1.0, center + half)
    return (low, high)


@dataclass(frozen=True)
class ProbabilityEstimate:
    """One binomial estimate with its Wilson interval and optional bound."""

    event: str
    hits: int
    trials: int
    p_hat: float
    wilson_low: float
    wilson_high: float
    confidence: float = 0.95
    paper_bound: float | None = None

    @classmethod
    def from_counts(
        cls,
        event: str,
        hits: int,
        trials: int,
        paper_bound: float | None = None,
        confidence: float = 0.95,
    ) -> "ProbabilityEstimate":
        low, high = wilson_interval(hits, trials, confidence)
        return cls(
            event=event,
            hits=int(hits),
            trials=int(trials),
            p_hat=hits / trials,
            wilson_low=low,
            wilson_high=high,
            confidence=confidence,
            paper_bound=paper_bound,
        )


# ---------------------------------------------------------------------------
# spectral-edge experiment


@dataclass(frozen=True)
class _EdgeContext:
    cube: LatticeCube
    field_template: FieldSpec
    interaction: InteractionSpec
    master_seed: int


def _edge_trial(ctx: _EdgeContext, index: int) -> float:
    spec = ctx.field_template.with_seed(trial_seed(ctx.master_seed, index))
    sample = generate_field(spec)
    h = assemble(ctx.cube, sample, ctx.interaction)
    return spectral_bottom(h, k=1).e0


@dataclass
class EdgeReport:
    """Edge-event estimates at one scale, plus ground-energy diagnostics."""

    scale: ScaleParameters
    master_seed: int
    b: float
    estimate: ProbabilityEstimate
    secondary: ProbabilityEstimate
    #: -ln(p_hat_b) / L^d when the secondary event has hits, else None
    fitted_exponent: float | None
    e0_mean: float
    e0_min: float
    e0_max: float


def mc_edge_probability(
    field_spec: FieldSpec,
    scale: ScaleParameters,
    trials: int,
    master_seed: int,
    *,
    interaction: InteractionSpec | None = None,
    spacing: float = 1.0,
    center: tuple[int, ...] | None = None,
    b: float = 1.0,
    workers: int = 1,
) -> EdgeReport:
    """Estimate P{e0 <= L^(-1/2)} (and P{e0 <= b L^(-2)}) by sampling.

    Each trial samples a fresh field, assembles the cube Hamiltonian,
    and computes the ground energy.  The primary estimate carries the
    comparison bound L^(-2 p 4^(N-n)).
    """
    if trials < MIN_MC_TRIALS:
        raise DomainError(f"need at least {MIN_MC_TRIALS} trials, got {trials}")
    if b <= 0:
        raise DomainError(f"secondary threshold factor b must be positive, got {b}")
    if interaction is None:
        interaction = InteractionSpec()
    if center is None:
        center = (0,) * (scale.n * scale.d)
    cube = build_cube(scale.n, scale.d, center, scale.length, spacing)
    template = field_spec.with_region(required_field_box(cube))
    ctx = _EdgeContext(
        cube=cube, field_template=template, interaction=interaction, master_seed=master_seed
    )
    e0s = map_indexed(partial(_edge_trial, ctx), range(trials), workers=workers)
    e0s = np.asarray(e0s, dtype=float)

    threshold = scale.edge_threshold
    threshold_b = b * scale.length**-2.0
    hits = int(np.sum(e0s <= threshold))
    hits_b = int(np.sum(e0s <= threshold_b))
    estimate = ProbabilityEstimate.from_counts(
        "edge-below", hits, trials, paper_bound=scale.paper_bound()
    )
    secondary = ProbabilityEstimate.from_counts("edge-below-b", hits_b, trials)
    fitted_exponent = None
    if 0 < hits_b:
        fitted_exponent = -math.log(hits_b / trials) / scale.length**scale.d
    return EdgeReport(
        scale=scale,
        master_seed=int(master_seed),
        b=b,
        estimate=estimate,
        secondary=secondary,
        fitted_exponent=fitted_exponent,
        e0_mean=float(e0s.mean()),
        e0_min=float(e0s.min()),
        e0_max=float(e0s.max()),
    )


# ---------------------------------------------------------------------------
# singular-energy experiment


@dataclass(frozen=True)
class _SingularContext:
    cube: LatticeCube
    field_template: FieldSpec
    interaction: InteractionSpec
    master_seed: int
    scale: ScaleParameters
    energies: tuple[float, ...]


def _singular_trial(ctx: _SingularContext, index: int):
    spec = ctx.field_template.with_seed(trial_seed(ctx.master_seed, index))
    sample = generate_field(spec)
    h = assemble(ctx.cube, sample, ctx.interaction)
    data = spectral_bottom(h)
    edge_threshold = ctx.scale.edge_threshold
    if data.e0 <= edge_threshold:
        # already a singular trial by the edge event; grid checks skipped
        return (True, None, True)
    s_flags = tuple(
        1 if ns_test(h, ctx.scale, energy, spectral=data).verdict == "S" else 0
        for energy in ctx.energies
    )
    gap_ok = True
    if ctx.scale.length == ctx.scale.l0:
        # gap-argument soundness at the initial scale: every tested energy
        # keeps distance > (1/2) L^(-1/2) from the spectrum
        min_gap = min(data.gap_at(energy) for energy in ctx.energies)
        gap_ok = min_gap > 0.5 * edge_threshold
    return (False, s_flags, gap_ok)


@dataclass
class SingularityReport:
    """Existence-of-a-singular-energy estimate at one scale."""

    scale: ScaleParameters
    master_seed: int
    energies: tuple[float, ...]
    estimate: ProbabilityEstimate
    #: trials with e0 at or below the edge threshold (singular by reduction)
    edge_hits: int
    #: trials with good edge margin yet a grid verdict S (certificate breaks)
    certificate_violations: int
    #: trials failing the spectral-gap soundness check at the initial scale
    gap_certificate_failures: int
    #: per grid energy, number of S verdicts among good-edge trials
    per_energy_s_counts: tuple[int, ...]

    def __post_init__(self):
        # coherence: the singular event is the union of the edge event and
        # the grid-detected extras
        assert self.estimate.hits <= self.edge_hits + self.certificate_violations


def singularity_energy_grid(e_star: float, step: float | None) -> tuple[float, ...]:
    """Deterministic energy grid over [0, e_star] with the given step."""
    if step is None:
        return tuple(float(e) for e in np.linspace(0.0, e_star, 17))
    if step <= 0:
        raise ConfigurationError(f"energy grid step must be positive, got {step}")
    if step > e_star:
        raise ConfigurationError(
            f"energy grid step {step} exceeds the energy threshold e_star = {e_star}"
        )
    count = int(math.floor(e_star / step + 1e-9))
    energies = [i * step for i in range(count + 1)]
    if energies[-1] < e_star * (1.0 - 1e-12):
        energies.append(e_star)
    return tuple(float(e) for e in energies)


def mc_singularity_probability(
    field_spec: FieldSpec,
    scale: ScaleParameters,
    trials: int,
    master_seed: int,
    *,
    energy_grid_step: float | None = None,
    interaction: InteractionSpec | None = None,
    spacing: float = 1.0,
    center: tuple[int, ...] | None = None,
    workers: int = 1,
) -> SingularityReport:
    """Estimate P{some energy <= e_star is singular} by the proof's reduction.

    A trial is singular when its ground energy falls at or below
    L^(-1/2), or when any energy on the grid over [0, e_star] gets an S
    verdict despite a good edge margin.
    """
    if trials < MIN_MC_TRIALS:
        raise DomainError(f"need at least {MIN_MC_TRIALS} trials, got {trials}")
    if interaction is None:
        interaction = InteractionSpec()
    if center is None:
        center = (0,) * (scale.n * scale.d)
    energies = singularity_energy_grid(scale.e_star, energy_grid_step)
    cube = build_cube(scale.n, scale.d, center, scale.length, spacing)
    template = field_spec.with_region(required_field_box(cube))
    ctx = _SingularContext(
        cube=cube,
        field_template=template,
        interaction=interaction,
        master_seed=master_seed,
        scale=scale,
        energies=energies,
    )
    outcomes = map_indexed(partial(_singular_trial, ctx), range(trials), workers=workers)

    edge_hits = 0
    certificate_violations = 0
    gap_failures = 0
    per_energy = np.zeros(len(energies), dtype=int)
    singular = 0
    for edge_hit, s_flags, gap_ok in outcomes:
        if edge_hit:
            edge_hits += 1
            singular += 1
            continue
        if not gap_ok:
            gap_failures += 1
        if s_flags is not None and any(s_flags):
            certificate_violations += 1
            singular += 1
            per_energy += np.asarray(s_flags, dtype=int)
    estimate = ProbabilityEstimate.from_counts(
        "exists-singular", singular, trials, paper_bound=scale.paper_bound()
    )
    return SingularityReport(
        scale=scale,
        master_seed=int(master_seed),
        energies=energies,
        estimate=estimate,
        edge_hits=edge_hits,
        certificate_violations=certificate_violations,
        gap_certificate_failures=gap_failures,
        per_energy_s_counts=tuple(int(c) for c in per_energy),
    )


# ---------------------------------------------------------------------------
# large-deviation experiment


@dataclass(frozen=True)
class _LdpContext:
    field_template: FieldSpec
    master_seed: int
    index_offset: int
    s0: float
    volume: float


def _ldp_trial(ctx: _LdpContext, index: int):
    spec = ctx.field_template.with_seed(
        trial_seed(ctx.master_seed, ctx.index_offset + index)
    )
    sample = generate_field(spec)
    total = float(np.sum(sample.values))
    bound = ctx.s0 * ctx.volume
    # hit <=> total <= bound <=> log_markov >= 0, with identical operands,
    # so the Markov-step inequality exp(log_markov) >= 1 is exact on hits
    return (total <= bound, bound - total)


@dataclass
class LdpReport:
    """Large-deviation estimates of P{volume average <= s0} across scales."""

    s0: float
    gamma_x_min: float
    lengths: tuple[int, ...]
    volumes: tuple[float, ...]
    trials: int
    hits: tuple[int, ...]
    p_hats: tuple[float, ...]
    estimates: tuple[ProbabilityEstimate, ...]
    #: slope of -ln p_hat against volume over usable scales, None if none
    fitted_rate: float | None
    excluded_lengths: tuple[int, ...]
    #: per length, empirical mean of exp(s0*volume - sum V) (Markov majorant)
    markov_means: tuple[float, ...]
    #: per length, smallest majorant value over hit trials (>= 1), None if no hits
    markov_min_on_hits: tuple[float | None, ...]
    #: True when every hit trial satisfied the Markov-step inequality exactly
    markov_exact_ok: bool

    def __post_init__(self):
        assert self.s0 <= self.gamma_x_min / 2.0 + 1e-12


def ldp_experiment(
    field_spec: FieldSpec,
    lengths,
    trials: int,
    master_seed: int,
    *,
    workers: int = 1,
) -> LdpReport:
    """Estimate the large-deviation probability across cube volumes.

    s0 is computed from the closed-form negative-exponential moment of
    the site law; the per-volume event is {sum of V over the lattice
    sites strictly inside the side-2L cube <= s0 * (2L)^d}, i.e. the
    sites at max-norm distance at most L-1 from the center, with the
    volume bookkeeping (2L)^d as normalizer.  Scales with zero or all
    hits are excluded from the rate fit with a warning.
    """
    lengths = [int(v) for v in lengths]
    if not lengths or any(v < 1 for v in lengths):
        raise DomainError(f"lengths must be positive integers, got {lengths}")
    if sorted(lengths) != lengths or len(set(lengths)) != len(lengths):
        raise DomainError(f"lengths must be strictly increasing, got {lengths}")
    if trials < MIN_LDP_TRIALS:
        raise DomainError(f"need at least {MIN_LDP_TRIALS} trials per length, got {trials}")
    d = field_spec.region.ndim
    moment = neg_exp_moment(field_spec)
    gamma_x_min = -math.log(moment)
    s0 = 0.5 * gamma_x_min

    hits_per_length: list[int] = []
    markov_means: list[float] = []
    markov_mins: list[float | None] = []
    exact_ok = True
    volumes = [float((2 * v) ** d) for v in lengths]
    for li, length in enumerate(lengths):
        template = field_spec.with_region(centered_box(length - 1, d))
        ctx = _LdpContext(
            field_template=template,
            master_seed=int(master_seed),
            index_offset=li * trials,
            s0=s0,
            volume=volumes[li],
        )
        outcome = map_indexed(partial(_ldp_trial, ctx), range(trials), workers=workers)
        hit_flags = np.asarray([o[0] for o in outcome], dtype=bool)
        log_markov = np.asarray([o[1] for o in outcome], dtype=float)
        hits_per_length.append(int(hit_flags.sum()))
        markov_means.append(float(math.exp(logsumexp(log_markov) - math.log(trials))))
        if hit_flags.any():
            worst = float(np.min(log_markov[hit_flags]))
            markov_mins.append(math.exp(worst))
            if worst < 0.0:
                exact_ok = False
        else:
            markov_mins.append(None)

    p_hats = [h / trials for h in hits_per_length]
    estimates = tuple(
        ProbabilityEstimate.from_counts("ldp-average", h, trials) for h in hits_per_length
    )

    usable = [i for i, h in enumerate(hits_per_length) if 0 < h < trials]
    excluded = [lengths[i] for i in range(len(lengths)) if i not in usable]
    for i in range(len(lengths)):
        if i in usable:
            continue
        log.warning(
            "length %d excluded from the rate fit: %s hits out of %d trials",
            lengths[i],
            hits_per_length[i],
            trials,
        )
    fitted_rate: float | None
    if len(usable) >= 2:
        xs = np.asarray([volumes[i] for i in usable])
        ys = np.asarray([-math.log(p_hats[i]) for i in usable])
        fitted_rate = float(np.polyfit(xs, ys, 1)[0])
    elif len(usable) == 1:
        i = usable[0]
        fitted_rate = -math.log(p_hats[i]) / volumes[i]
        log.warning("rate fit from a single usable volume; slope taken through origin")
    else:
        fitted_rate = None
        log.warning("no usable volumes for the rate fit")
    return LdpReport(
        s0=s0,
        gamma_x_min=gamma_x_min,
        lengths=tuple(lengths),
        volumes=tuple(volumes),
        trials=int(trials),
        hits=tuple(hits_per_length),
        p_hats=tuple(p_hats),
        estimates=estimates,
        fitted_rate=fitted_rate,
        excluded_lengths=tuple(excluded),
        markov_means=tuple(markov_means),
        markov_min_on_hits=tuple(markov_mins),
        markov_exact_ok=exact_ok,
    )
