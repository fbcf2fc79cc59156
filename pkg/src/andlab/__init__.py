"""andlab: a numerical laboratory for multi-particle lattice models with
correlated random potentials.

Layers: random fields (``fields``), cube geometry (``geometry``), sparse
Hamiltonian assembly (``hamiltonian``), eigenvalue/resolvent machinery
(``spectral``), the quantitative analysis and Monte Carlo estimators
(``msa``), and the experiment harness (``config``/``runner``/``service``
/``cli``).
"""

__version__ = "0.1.0"

from .errors import (
    AndlabError,
    ConfigurationError,
    DomainError,
    NumericError,
    ResourceError,
    SpectralCollisionError,
)
from .fields import (
    FieldSample,
    FieldSpec,
    LatticeBox,
    centered_box,
    generate_field,
    neg_exp_moment,
    trial_seed,
)
from .geometry import LatticeCube, RegionMask, build_cube, mask_indices
from .hamiltonian import (
    AssembledHamiltonian,
    InteractionSpec,
    assemble,
    interaction_energy,
    kronecker_sum_oracle,
)
from .spectral import (
    ResolventBlockNorm,
    SpectralData,
    combes_thomas_envelope,
    resolvent_block_norm,
    spectral_bottom,
    verify_combes_thomas,
)

__all__ = [
    "AndlabError",
    "AssembledHamiltonian",
    "ConfigurationError",
    "DomainError",
    "FieldSample",
    "FieldSpec",
    "InteractionSpec",
    "LatticeBox",
    "LatticeCube",
    "NumericError",
    "RegionMask",
    "ResolventBlockNorm",
    "ResourceError",
    "SpectralCollisionError",
    "SpectralData",
    "__version__",
    "assemble",
    "build_cube",
    "centered_box",
    "combes_thomas_envelope",
    "generate_field",
    "interaction_energy",
    "kronecker_sum_oracle",
    "mask_indices",
    "neg_exp_moment",
    "resolvent_block_norm",
    "spectral_bottom",
    "trial_seed",
    "verify_combes_thomas",
]
