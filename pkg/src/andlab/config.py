"""Experiment configuration: load, validate, override, and echo.

One YAML document configures every experiment; command-line overrides
use dotted paths (``msa.gamma_ct=0.4``).  Validation failures surface as
ConfigurationError with the dotted path of each offending key and, when
the source file is available, the line it was set on.  The echo helper
produces the resolved-config mapping embedded in artifacts; execution
placement keys (worker count, output directory) are excluded there so
artifacts depend only on what was computed.
"""

from __future__ import annotations

import re
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigurationError
from .fields import FIELD_KINDS
from .hamiltonian import INTERACTION_PROFILES


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class InteractionConfig(_Section):
    r0: float = 1.0
    u0: float = 0.0
    profile: str = "step"

    @field_validator("r0")
    @classmethod
    def _r0_nonnegative(cls, v):
        if v < 0:
            raise ValueError("interaction range r0 must be >= 0")
        return v

    @field_validator("u0")
    @classmethod
    def _u0_nonnegative(cls, v):
        if v < 0:
            raise ValueError("interaction amplitude u0 must be >= 0")
        return v

    @field_validator("profile")
    @classmethod
    def _known_profile(cls, v):
        if v not in INTERACTION_PROFILES:
            raise ValueError(f"unknown interaction profile; expected one of {INTERACTION_PROFILES}")
        return v


class ModelConfig(_Section):
    N: int = 1
    n: int = 1
    d: int = 1
    interaction: InteractionConfig = Field(default_factory=InteractionConfig)

    @field_validator("N", "d")
    @classmethod
    def _positive(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v


class FieldConfig(_Section):
    kind: str = "moving-average"
    window: int = 1
    scale: float = 1.0

    @field_validator("kind")
    @classmethod
    def _known_kind(cls, v):
        if v not in FIELD_KINDS:
            raise ValueError(f"unknown field kind; expected one of {FIELD_KINDS}")
        return v

    @field_validator("window")
    @classmethod
    def _window_nonnegative(cls, v):
        if v < 0:
            raise ValueError("window must be >= 0")
        return v

    @field_validator("scale")
    @classmethod
    def _scale_nonnegative(cls, v):
        if v < 0:
            raise ValueError("scale must be >= 0")
        return v


class ScalesConfig(_Section):
    l0: int = 8
    alpha: float = 1.5
    count: int = 3
    h: float = 1.0
    max_grid_points: int = 1_000_000

    @field_validator("l0")
    @classmethod
    def _l0_positive(cls, v):
        if v < 1:
            raise ValueError("initial scale l0 must be >= 1")
        return v

    @field_validator("alpha")
    @classmethod
    def _alpha_gt_one(cls, v):
        if v <= 1.0:
            raise ValueError("scale-growth exponent alpha must be > 1")
        return v

    @field_validator("count")
    @classmethod
    def _count_positive(cls, v):
        if v < 1:
            raise ValueError("scale count must be >= 1")
        return v

    @field_validator("h")
    @classmethod
    def _h_positive(cls, v):
        if v <= 0:
            raise ValueError("grid spacing h must be > 0")
        return v


class MsaConfig(_Section):
    p: float = 1.0
    gamma_ct: float = 0.5
    energy_grid_step: float | None = None
    b: float = 1.0

    @field_validator("p")
    @classmethod
    def _p_positive(cls, v):
        if v <= 0:
            raise ValueError("exponent parameter p must be > 0")
        return v

    @field_validator("gamma_ct")
    @classmethod
    def _gamma_in_unit(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("gamma_ct must lie in the open interval (0, 1)")
        return v

    @field_validator("energy_grid_step")
    @classmethod
    def _step_positive(cls, v):
        if v is not None and v <= 0:
            raise ValueError("energy_grid_step must be > 0 when set")
        return v

    @field_validator("b")
    @classmethod
    def _b_positive(cls, v):
        if v <= 0:
            raise ValueError("secondary threshold factor b must be > 0")
        return v


class McConfig(_Section):
    trials: int = 200
    master_seed: int = 1

    @field_validator("trials")
    @classmethod
    def _trials_positive(cls, v):
        if v < 1:
            raise ValueError("trials must be >= 1")
        return v


class OutputConfig(_Section):
    directory: str = "artifacts"
    formats: list[str] = Field(default_factory=lambda: ["csv", "json"])
    export_matrix: bool = False

    @field_validator("formats")
    @classmethod
    def _known_formats(cls, v):
        allowed = {"csv", "json"}
        unknown = [f for f in v if f not in allowed]
        if unknown:
            raise ValueError(f"unknown output formats {unknown}; expected subset of {sorted(allowed)}")
        return v


class MixingConfig(_Section):
    distances: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 6])
    epsilons: list[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.02, 0.01])
    trials: int = 4000


class SpectrumConfig(_Section):
    k: int = 8


class NsConfig(_Section):
    energy: float | None = None


class CombesThomasConfig(_Section):
    etas: list[float] = Field(default_factory=lambda: [0.1, 1.0])
    gammas: list[float] = Field(default_factory=lambda: [0.5])
    max_pairs: int = 200

    @field_validator("etas")
    @classmethod
    def _eta_min(cls, v):
        if any(e < 0.05 for e in v):
            raise ValueError("every eta must be >= 0.05 for a meaningful envelope check")
        return v

    @field_validator("gammas")
    @classmethod
    def _gamma_range(cls, v):
        if any(not 0.0 < g < 1.0 for g in v):
            raise ValueError("every gamma must lie in the open interval (0, 1)")
        return v


class LdpConfig(_Section):
    lengths: list[int] = Field(default_factory=lambda: [4, 8, 16])
    trials: int = 2000


class DecayConfig(_Section):
    k: int = 4


class DynamicsConfig(_Section):
    s: float = 1.0
    t_min: float = 1e-2
    t_max: float = 1e3
    t_count: int = 64
    region_radius: float = 1.0
    interval_low: float | None = None
    interval_high: float | None = None
    include_free_control: bool = True

    @field_validator("s")
    @classmethod
    def _s_positive(cls, v):
        if v <= 0:
            raise ValueError("moment exponent s must be > 0")
        return v


class ExperimentsConfig(_Section):
    mixing: MixingConfig = Field(default_factory=MixingConfig)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    ns: NsConfig = Field(default_factory=NsConfig)
    combes_thomas: CombesThomasConfig = Field(default_factory=CombesThomasConfig)
    ldp: LdpConfig = Field(default_factory=LdpConfig)
    decay: DecayConfig = Field(default_factory=DecayConfig)
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig)


class ExperimentConfig(_Section):
    """Full resolved configuration for one experiment invocation."""

    model: ModelConfig = Field(default_factory=ModelConfig)
    field: FieldConfig = Field(default_factory=FieldConfig)
    scales: ScalesConfig = Field(default_factory=ScalesConfig)
    msa: MsaConfig = Field(default_factory=MsaConfig)
    mc: McConfig = Field(default_factory=McConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    experiments: ExperimentsConfig = Field(default_factory=ExperimentsConfig)
    workers: int = 1

    @field_validator("workers")
    @classmethod
    def _workers_positive(cls, v):
        if v < 1:
            raise ValueError("workers must be >= 1")
        return v


def _find_line(source_text: str | None, key: str) -> int | None:
    if not source_text:
        return None
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*:")
    for i, line in enumerate(source_text.splitlines(), start=1):
        if pattern.match(line):
            return i
    return None


def _format_validation_error(exc: ValidationError, source_text: str | None) -> str:
    parts = []
    for err in exc.errors():
        dotted = ".".join(str(p) for p in err["loc"]) or "<root>"
        line = _find_line(source_text, str(err["loc"][-1])) if err["loc"] else None
        where = f"{dotted} (line {line})" if line is not None else dotted
        parts.append(f"{where}: {err['msg']}")
    return "invalid configuration: " + "; ".join(parts)


def config_from_mapping(data: dict, source_text: str | None = None) -> ExperimentConfig:
    """Validate a plain mapping into an ExperimentConfig."""
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as exc:
        raise ConfigurationError(_format_validation_error(exc, source_text)) from exc


def parse_override(text: str) -> tuple[list[str], object]:
    """Split one dotted override ``a.b.c=value``; value parsed as YAML."""
    if "=" not in text:
        raise ConfigurationError(
            f"override {text!r} is not of the form dotted.key=value"
        )
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigurationError(f"override {text!r} has an empty key")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"override value {raw!r} is not valid YAML: {exc}") from exc
    return key.split("."), value


def apply_override(data: dict, dotted: list[str], value) -> None:
    node = data
    for part in dotted[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[dotted[-1]] = value


def load_config(
    path: str | Path | None = None, overrides: tuple[str, ...] = ()
) -> ExperimentConfig:
    """Load YAML config (defaults when no path) and apply dotted overrides."""
    source_text = None
    if path is None:
        data: dict = {}
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        source_text = path.read_text()
        try:
            data = yaml.safe_load(source_text) or {}
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"config file {path} is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"config file {path} must hold a key-value mapping")
    for text in overrides:
        dotted, value = parse_override(text)
        apply_override(data, dotted, value)
    return config_from_mapping(data, source_text)


#: execution placement keys excluded from the artifact config echo so
#: that artifacts depend only on what was computed
ECHO_EXCLUDED = ("workers", "output.directory")


def config_echo(cfg: ExperimentConfig) -> dict:
    """Resolved configuration as a plain mapping for artifact embedding."""
    data = cfg.model_dump(mode="json")
    data.pop("workers", None)
    if "output" in data:
        data["output"].pop("directory", None)
    return data
