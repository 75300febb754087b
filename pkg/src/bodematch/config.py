"""Strict JSON configuration for the identification pipeline.

One document holds one section per module data type. Sections are optional
(commands require the ones they use), but within a section unknown keys are
errors, and every section is validated against its type's invariants at load
time.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .actuator import ActuatorParams, PDGains, SimConfig, VoltageModel
from .errors import ValidationError
from .excitation import ChirpSpec
from .freq_analysis import FrequencyBand
from .matcher import GainGrid


@dataclass(frozen=True)
class RandomizationSettings:
    """Step sizes and safety margin used when deriving gain ranges."""

    kp_step: float = 0.5
    kd_step: float = 0.05
    margin_factor: float = 1.5

    def __post_init__(self):
        for name in ("kp_step", "kd_step", "margin_factor"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or value <= 0:
                raise ValidationError(f"randomization {name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class PipelineConfig:
    """Typed view of one configuration document."""

    actuator: ActuatorParams | None = None
    gains: PDGains | None = None
    chirp: ChirpSpec | None = None
    sim: SimConfig = SimConfig()
    grid: GainGrid | None = None
    band: FrequencyBand | None = None
    randomization: RandomizationSettings = RandomizationSettings()

    def require(self, *sections: str) -> None:
        """Raise if any named section was absent from the document."""
        missing = [name for name in sections if getattr(self, name) is None]
        if missing:
            raise ValidationError(
                f"config is missing required section(s): {', '.join(missing)}"
            )


_SECTION_TYPES = {
    "actuator": ActuatorParams,
    "gains": PDGains,
    "chirp": ChirpSpec,
    "sim": SimConfig,
    "grid": GainGrid,
    "band": FrequencyBand,
    "randomization": RandomizationSettings,
}

# Fields that need coercion from their JSON form before construction.
_FIELD_COERCIONS = {
    (ActuatorParams, "voltage_model"): lambda v: _build(VoltageModel, v, "actuator.voltage_model"),
    (SimConfig, "initial_state"): tuple,
    (GainGrid, "kp_range"): tuple,
    (GainGrid, "kd_range"): tuple,
}


def _build(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise ValidationError(f"config section {section!r} must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValidationError(
            f"config section {section!r} has unknown key(s): {', '.join(unknown)}"
        )
    kwargs = {}
    for key, value in data.items():
        coerce = _FIELD_COERCIONS.get((cls, key))
        if coerce is not None and value is not None:
            value = coerce(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        raise ValidationError(f"config section {section!r}: {exc}") from exc
    except TypeError as exc:
        raise ValidationError(f"config section {section!r}: {exc}") from exc


def config_from_dict(doc: dict) -> PipelineConfig:
    """Validate a parsed configuration document into a PipelineConfig."""
    if not isinstance(doc, dict):
        raise ValidationError("configuration document must be a JSON object")
    unknown = sorted(set(doc) - set(_SECTION_TYPES))
    if unknown:
        raise ValidationError(f"unknown config section(s): {', '.join(unknown)}")
    kwargs = {}
    for name, cls in _SECTION_TYPES.items():
        if name in doc:
            kwargs[name] = _build(cls, doc[name], name)
    return PipelineConfig(**kwargs)


def load_config(path) -> PipelineConfig:
    """Load and validate a JSON configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def config_to_dict(cfg: PipelineConfig) -> dict:
    """Serialize a PipelineConfig back to its document form (exact field names)."""
    doc: dict = {}
    for name in _SECTION_TYPES:
        value = getattr(cfg, name)
        if value is not None:
            doc[name] = dataclasses.asdict(value)
    return doc
