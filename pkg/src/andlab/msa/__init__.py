"""Quantitative core: rate arithmetic, the NS decision, Monte Carlo
estimators for the probability bounds, and localization demonstrations."""

from .parameters import (
    NsVerdict,
    ScaleParameters,
    derive_parameters,
    gamma_rate,
    ns_test,
    ns_threshold,
    scale_sequence,
)
from .estimates import (
    EdgeReport,
    LdpReport,
    ProbabilityEstimate,
    SingularityReport,
    ldp_experiment,
    mc_edge_probability,
    mc_singularity_probability,
    singularity_energy_grid,
    wilson_interval,
)
from .localization import (
    DecayFit,
    DynamicalMomentSpec,
    MomentTrace,
    dynamical_moment,
    eigenfunction_decay_fit,
)

__all__ = [
    "DecayFit",
    "DynamicalMomentSpec",
    "EdgeReport",
    "LdpReport",
    "MomentTrace",
    "NsVerdict",
    "ProbabilityEstimate",
    "ScaleParameters",
    "SingularityReport",
    "derive_parameters",
    "dynamical_moment",
    "eigenfunction_decay_fit",
    "gamma_rate",
    "ldp_experiment",
    "mc_edge_probability",
    "mc_singularity_probability",
    "ns_test",
    "ns_threshold",
    "scale_sequence",
    "singularity_energy_grid",
    "wilson_interval",
]
