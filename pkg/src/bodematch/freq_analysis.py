"""Frequency-response curves: closed-form prediction, Welch estimation, band error.

Two independent routes produce the same kind of curve. ``analytic_bode``
evaluates the closed-form magnitude of the PD-controlled joint;
``estimate_frf`` recovers the magnitude from logged sweep data via Welch
cross-spectral estimation. ``band_mse`` is the currency used to compare them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .actuator import ActuatorParams, PDGains, TimeSeries
from .errors import CoverageError, EstimationError, SingularityError, ValidationError

# Welch bins whose command auto-spectrum falls below this fraction of its peak
# carry no excitation energy and are dropped from the estimate.
COHERENCE_FLOOR = 1e-12

MIN_BAND_POINTS = 8


@dataclass(frozen=True)
class FrequencyBand:
    """Closed frequency interval [f_low, f_high] in Hz."""

    f_low: float
    f_high: float

    def __post_init__(self):
        for name in ("f_low", "f_high"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"band {name} must be finite, got {value!r}")
        if not 0.0 < self.f_low < self.f_high:
            raise ValidationError(
                f"band requires 0 < f_low < f_high, got {self.f_low} and {self.f_high}"
            )


@dataclass(frozen=True)
class BodeMagnitude:
    """Magnitude curve |H| in dB on a strictly increasing frequency grid."""

    frequencies: np.ndarray
    magnitudes_db: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        mags = np.asarray(self.magnitudes_db, dtype=float)
        if freqs.ndim != 1 or mags.ndim != 1:
            raise ValidationError("magnitude curve arrays must be one-dimensional")
        if len(freqs) != len(mags):
            raise ValidationError(
                f"curve lengths differ: {len(freqs)} frequencies vs {len(mags)} magnitudes"
            )
        if len(freqs) < 1:
            raise ValidationError("magnitude curve must not be empty")
        if not np.isfinite(freqs).all() or freqs[0] <= 0:
            raise ValidationError("frequencies must be finite and positive")
        if np.any(np.diff(freqs) <= 0):
            raise ValidationError("frequencies must be strictly increasing")
        if not np.isfinite(mags).all():
            raise ValidationError("magnitudes must be finite")
        freqs = freqs.copy()
        mags = mags.copy()
        freqs.setflags(write=False)
        mags.setflags(write=False)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "magnitudes_db", mags)

    def __len__(self) -> int:
        return len(self.frequencies)


def analytic_bode(
    params: ActuatorParams, gains: PDGains, frequencies
) -> BodeMagnitude:
    """Closed-form magnitude of the closed PD loop at the given frequencies.

    With I = total inertia (link plus reflected rotor) and b the viscous
    friction, the position loop theta/theta_des has

        |H(j w)|^2 = (kp^2 + (kd w)^2) / ((kp - I w^2)^2 + ((kd + b) w)^2)

    The DC gain is exactly one. When ``kd + b == 0`` the denominator vanishes
    at the undamped natural frequency; a grid point landing exactly there
    raises a singularity error naming the frequency.
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.ndim == 0:
        freqs = freqs[np.newaxis]
    if len(freqs) < 1:
        raise ValidationError("analytic_bode needs at least one frequency")
    if not np.isfinite(freqs).all() or np.any(freqs <= 0):
        raise ValidationError("frequencies must be finite and positive")
    if np.any(np.diff(freqs) <= 0):
        raise ValidationError("frequencies must be strictly increasing")
    itot = params.total_inertia()
    w = 2.0 * np.pi * freqs
    damping = gains.kd + params.viscous_friction
    num = gains.kp**2 + (gains.kd * w) ** 2
    den = (gains.kp - itot * w**2) ** 2 + (damping * w) ** 2
    zero = den == 0.0
    if zero.any():
        f_bad = float(freqs[np.argmax(zero)])
        raise SingularityError(
            f"undamped response is unbounded at {f_bad:.9g} Hz "
            "(kd + viscous_friction is zero at the natural frequency)"
        )
    return BodeMagnitude(frequencies=freqs, magnitudes_db=10.0 * np.log10(num / den))


def estimate_frf(
    ts: TimeSeries, window_seconds: float = 20.0, overlap: float = 0.5
) -> BodeMagnitude:
    """Welch transfer-magnitude estimate of measured over command.

    Both channels are segmented with Hann windows of ``window_seconds`` at the
    given fractional overlap; the response is H(f) = S_yu(f) / S_uu(f), the
    averaged cross-spectrum over the command auto-spectrum. The curve is
    returned in dB on the FFT grid restricted to the open interval
    (0, sample_rate / 2), minus any bins where the command auto-spectrum falls
    below 1e-12 of its peak.
    """
    if not math.isfinite(window_seconds) or window_seconds <= 0:
        raise ValidationError(f"window_seconds must be > 0, got {window_seconds!r}")
    if not 0.0 <= overlap < 1.0:
        raise ValidationError(f"overlap must be in [0, 1), got {overlap!r}")
    nperseg = int(round(window_seconds * ts.sample_rate))
    if nperseg < 16:
        raise ValidationError(
            f"window of {window_seconds} s at {ts.sample_rate} Hz gives {nperseg} "
            "samples; need at least 16"
        )
    noverlap = min(int(round(nperseg * overlap)), nperseg - 1)
    hop = nperseg - noverlap
    if len(ts.command) < nperseg + hop:
        raise ValidationError(
            f"record of {len(ts.command)} samples is too short for two "
            f"{nperseg}-sample windows at overlap {overlap}"
        )
    freqs, s_uu = _signal.welch(
        ts.command,
        fs=ts.sample_rate,
        window="hann",
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=False,
    )
    _, s_yu = _signal.csd(
        ts.command,
        ts.measured,
        fs=ts.sample_rate,
        window="hann",
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=False,
    )
    inside = (freqs > 0.0) & (freqs < ts.sample_rate / 2.0)
    freqs, s_uu, s_yu = freqs[inside], s_uu[inside], s_yu[inside]
    peak = s_uu.max() if len(s_uu) else 0.0
    if peak <= 0.0:
        raise EstimationError("command channel has no spectral energy")
    energized = s_uu >= COHERENCE_FLOOR * peak
    if not energized.any():
        raise EstimationError("no frequency bins retain excitation energy")
    freqs = freqs[energized]
    mag = np.abs(s_yu[energized]) / s_uu[energized]
    if np.any(mag == 0.0):
        f_bad = float(freqs[np.argmax(mag == 0.0)])
        raise EstimationError(
            f"measured channel has no correlated energy at {f_bad:.6g} Hz"
        )
    return BodeMagnitude(frequencies=freqs, magnitudes_db=20.0 * np.log10(mag))


def band_mse(a: BodeMagnitude, b: BodeMagnitude, band: FrequencyBand) -> float:
    """Mean squared dB difference between two curves inside a band.

    ``b`` is resampled onto ``a``'s frequency grid by linear interpolation in
    (log-frequency, dB) space, and the mean is taken over ``a``'s grid points
    inside [f_low, f_high]. Both curves must span the band, and the reference
    grid must contribute at least 8 points inside it.
    """
    for name, curve in (("reference", a), ("candidate", b)):
        if curve.frequencies[0] > band.f_low or curve.frequencies[-1] < band.f_high:
            missing_lo = (
                f"{band.f_low:.6g}-{min(curve.frequencies[0], band.f_high):.6g} Hz"
                if curve.frequencies[0] > band.f_low
                else None
            )
            missing_hi = (
                f"{max(curve.frequencies[-1], band.f_low):.6g}-{band.f_high:.6g} Hz"
                if curve.frequencies[-1] < band.f_high
                else None
            )
            missing = " and ".join(m for m in (missing_lo, missing_hi) if m)
            raise CoverageError(
                f"{name} curve spans {curve.frequencies[0]:.6g}-"
                f"{curve.frequencies[-1]:.6g} Hz and does not cover {missing}"
            )
    in_band = (a.frequencies >= band.f_low) & (a.frequencies <= band.f_high)
    n_points = int(in_band.sum())
    if n_points < MIN_BAND_POINTS:
        raise CoverageError(
            f"reference grid has {n_points} points inside "
            f"[{band.f_low:.6g}, {band.f_high:.6g}] Hz; need at least {MIN_BAND_POINTS}"
        )
    resampled = np.interp(
        np.log(a.frequencies[in_band]), np.log(b.frequencies), b.magnitudes_db
    )
    diff = a.magnitudes_db[in_band] - resampled
    return float(np.mean(diff * diff))


BODE_HEADER = "freq_hz,mag_db"


def write_bode(curve: BodeMagnitude, path) -> None:
    """Write a magnitude curve as ``freq_hz,mag_db`` CSV."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(BODE_HEADER + "\n")
        for f, m in zip(curve.frequencies, curve.magnitudes_db):
            fh.write(f"{float(f)!r},{float(m)!r}\n")


def read_bode(path) -> BodeMagnitude:
    """Read a magnitude curve CSV written by :func:`write_bode`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != BODE_HEADER:
            raise ValidationError(
                f"expected header {BODE_HEADER!r} in {path}, got {header!r}"
            )
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 2:
        raise ValidationError(f"expected 2 columns in {path}, got {data.shape[1]}")
    return BodeMagnitude(frequencies=data[:, 0], magnitudes_db=data[:, 1])
