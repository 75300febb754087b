"""Swept-sine (chirp) excitation with closed-form phase and velocity.

Position commands are ``A * sin(phi(t))`` where the phase is the exact
integral of the instantaneous frequency, so the velocity command is available
analytically instead of by numerical differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SWEEP_LAWS = ("linear", "logarithmic")

# Relative slack on the [0, duration] interval so callers that land exactly on
# the boundary after float round-trips are not rejected.
_TIME_TOL = 1e-9


@dataclass(frozen=True)
class ChirpSpec:
    """Frequency sweep definition for one excitation run.

    ``amplitude`` is the peak position command in radians. Zero amplitude is
    the degenerate null excitation and is permitted so that quiescent runs can
    be exercised end to end.
    """

    f_start: float = 0.1
    f_end: float = 25.0
    amplitude: float = 0.25
    duration: float = 120.0
    sweep_law: str = "linear"

    def __post_init__(self):
        for name in ("f_start", "f_end", "amplitude", "duration"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"chirp {name} must be finite, got {value!r}")
        if not 0.0 < self.f_start < self.f_end:
            raise ValidationError(
                f"chirp requires 0 < f_start < f_end, got {self.f_start} and {self.f_end}"
            )
        if self.amplitude < 0.0:
            raise ValidationError(f"chirp amplitude must be >= 0, got {self.amplitude}")
        if self.duration <= 0.0:
            raise ValidationError(f"chirp duration must be > 0, got {self.duration}")
        if self.sweep_law not in SWEEP_LAWS:
            raise ValidationError(
                f"chirp sweep_law must be one of {SWEEP_LAWS}, got {self.sweep_law!r}"
            )


def _check_times(spec: ChirpSpec, t: np.ndarray) -> None:
    tol = _TIME_TOL * max(1.0, spec.duration)
    if t.size and (t.min() < -tol or t.max() > spec.duration + tol):
        bad = float(t.min()) if t.min() < -tol else float(t.max())
        raise ValidationError(
            f"time {bad:.9g} s outside the sweep interval [0, {spec.duration:.9g}]"
        )


def instantaneous_frequency(spec: ChirpSpec, t):
    """Frequency (Hz) of the sweep at time ``t`` (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    _check_times(spec, np.atleast_1d(arr))
    x = arr / spec.duration
    if spec.sweep_law == "linear":
        f = spec.f_start + (spec.f_end - spec.f_start) * x
    else:
        f = spec.f_start * (spec.f_end / spec.f_start) ** x
    return float(f) if arr.ndim == 0 else f


def phase(spec: ChirpSpec, t):
    """Accumulated phase (rad) at time ``t``, the exact integral of 2*pi*f."""
    arr = np.asarray(t, dtype=float)
    _check_times(spec, np.atleast_1d(arr))
    if spec.sweep_law == "linear":
        rate = (spec.f_end - spec.f_start) / spec.duration
        ph = 2.0 * np.pi * (spec.f_start * arr + 0.5 * rate * arr**2)
    else:
        log_ratio = math.log(spec.f_end / spec.f_start)
        ph = (
            2.0
            * np.pi
            * spec.f_start
            * spec.duration
            / log_ratio
            * (np.exp(log_ratio * arr / spec.duration) - 1.0)
        )
    return float(ph) if arr.ndim == 0 else ph


def chirp_signal(spec: ChirpSpec, t):
    """Return ``(position, velocity)`` commands at time ``t``.

    Velocity is the closed-form derivative ``A * cos(phi) * 2*pi*f_inst``,
    not a finite difference. Accepts a scalar or an array of times inside
    [0, duration]; times outside raise a range error.
    """
    arr = np.asarray(t, dtype=float)
    _check_times(spec, np.atleast_1d(arr))
    ph = phase(spec, arr)
    f_inst = instantaneous_frequency(spec, arr)
    pos = spec.amplitude * np.sin(ph)
    vel = spec.amplitude * np.cos(ph) * 2.0 * np.pi * f_inst
    if arr.ndim == 0:
        return float(pos), float(vel)
    return pos, vel
