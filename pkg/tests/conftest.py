"""Shared fixtures: the knee-joint reference setup used across the suite.

The expensive artifacts (the 120 s reference sweep and its spectral estimate)
are session-scoped so the estimator, matcher, and consistency tests can share
one simulation.
"""

import pytest
from hypothesis import HealthCheck, settings

from bodematch import (
    ActuatorParams,
    BodeMagnitude,
    ChirpSpec,
    PDGains,
    TimeSeries,
    estimate_frf,
    simulate_sweep,
)

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# Knee joint: 5e-4 kg m^2 link, 7.2e-5 kg m^2 rotor behind a 9.33:1 gearbox.
KNEE = {
    "link_inertia": 5e-4,
    "viscous_friction": 0.0,
    "rotor_inertia": 7.2e-5,
    "gear_ratio": 9.33,
}


@pytest.fixture(scope="session")
def knee_params() -> ActuatorParams:
    return ActuatorParams(**KNEE)


@pytest.fixture(scope="session")
def zero_armature_params() -> ActuatorParams:
    return ActuatorParams(**{**KNEE, "rotor_inertia": 0.0})


@pytest.fixture(scope="session")
def hw_gains() -> PDGains:
    return PDGains(kp=17.0, kd=0.4)


@pytest.fixture(scope="session")
def knee_sweep(knee_params, hw_gains) -> TimeSeries:
    """Noiseless 120 s chirp sweep of the knee joint at the hardware gains."""
    return simulate_sweep(knee_params, hw_gains, ChirpSpec())


@pytest.fixture(scope="session")
def knee_reference(knee_sweep) -> BodeMagnitude:
    """Welch magnitude estimate of the reference sweep (20 s Hann windows)."""
    return estimate_frf(knee_sweep)
