"""Joint actuator system identification by frequency-response matching.

Simulate PD-controlled joints with gearbox-reflected rotor inertia, excite
them with chirp sweeps, estimate transfer magnitudes, grid-search gains whose
closed-form response matches a measured curve, derive gain randomization
ranges, and perform function-preserving policy-input widening.
"""

from .actuator import (
    ActuatorParams,
    PDGains,
    SimConfig,
    TimeSeries,
    VoltageModel,
    applied_torque,
    decimate,
    read_timeseries,
    reflected_inertia,
    simulate_sweep,
    step,
    write_timeseries,
)
from .config import (
    PipelineConfig,
    RandomizationSettings,
    config_from_dict,
    config_to_dict,
    load_config,
)
from .errors import (
    CoverageError,
    DivergenceError,
    EstimationError,
    InsufficientDataError,
    SingularityError,
    ToolkitError,
    ValidationError,
)
from .excitation import ChirpSpec, chirp_signal, instantaneous_frequency, phase
from .freq_analysis import (
    BodeMagnitude,
    FrequencyBand,
    analytic_bode,
    band_mse,
    estimate_frf,
    read_bode,
    write_bode,
)
from .matcher import (
    DomainRandomization,
    GainGrid,
    MatchResult,
    RandomizationRange,
    derive_ranges,
    grid_match,
    ranges_dict,
    read_summary_gains,
    write_summary,
    write_surface,
)
from .policy import (
    N_FEET,
    PHASE_SCALES,
    JumpRewardParams,
    MlpFirstLayer,
    dense_jump_reward,
    read_layer,
    scaled_jump_rewards,
    sparse_jump_reward,
    widen_input_layer,
    write_layer,
)

__version__ = "0.1.0"

__all__ = [
    "ActuatorParams",
    "BodeMagnitude",
    "ChirpSpec",
    "CoverageError",
    "DivergenceError",
    "DomainRandomization",
    "EstimationError",
    "FrequencyBand",
    "GainGrid",
    "InsufficientDataError",
    "JumpRewardParams",
    "MatchResult",
    "MlpFirstLayer",
    "N_FEET",
    "PDGains",
    "PHASE_SCALES",
    "PipelineConfig",
    "RandomizationRange",
    "RandomizationSettings",
    "SimConfig",
    "SingularityError",
    "TimeSeries",
    "ToolkitError",
    "ValidationError",
    "VoltageModel",
    "analytic_bode",
    "applied_torque",
    "band_mse",
    "chirp_signal",
    "config_from_dict",
    "config_to_dict",
    "decimate",
    "dense_jump_reward",
    "derive_ranges",
    "estimate_frf",
    "grid_match",
    "instantaneous_frequency",
    "load_config",
    "phase",
    "ranges_dict",
    "read_bode",
    "read_layer",
    "read_summary_gains",
    "read_timeseries",
    "reflected_inertia",
    "scaled_jump_rewards",
    "simulate_sweep",
    "sparse_jump_reward",
    "step",
    "widen_input_layer",
    "write_bode",
    "write_layer",
    "write_summary",
    "write_surface",
    "write_timeseries",
]
