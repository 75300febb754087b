"""Grid search for PD gains whose predicted response matches a reference curve,
plus derivation of training-time gain randomization ranges from matched gains.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .actuator import ActuatorParams, PDGains, SimConfig, simulate_sweep
from .errors import DivergenceError, InsufficientDataError, ValidationError
from .excitation import ChirpSpec
from .freq_analysis import BodeMagnitude, FrequencyBand, analytic_bode, band_mse, estimate_frf

MATCH_MODES = ("analytic", "simulated")


@dataclass(frozen=True)
class GainGrid:
    """Uniform search grid over (kp, kd)."""

    kp_range: tuple[float, float] = (13.0, 27.0)
    kd_range: tuple[float, float] = (0.1, 0.7)
    kp_count: int = 50
    kd_count: int = 50

    def __post_init__(self):
        for name in ("kp_range", "kd_range"):
            pair = tuple(float(v) for v in getattr(self, name))
            if len(pair) != 2 or not all(math.isfinite(v) for v in pair):
                raise ValidationError(f"grid {name} must be two finite values")
            if pair[0] >= pair[1]:
                raise ValidationError(
                    f"grid {name} must satisfy min < max, got {pair}"
                )
            object.__setattr__(self, name, pair)
        if self.kp_range[0] <= 0:
            raise ValidationError(f"grid kp values must be > 0, got {self.kp_range}")
        if self.kd_range[0] < 0:
            raise ValidationError(f"grid kd values must be >= 0, got {self.kd_range}")
        for name in ("kp_count", "kd_count"):
            count = getattr(self, name)
            if not isinstance(count, int) or count < 2:
                raise ValidationError(f"grid {name} must be an integer >= 2, got {count!r}")

    def kp_values(self) -> np.ndarray:
        return np.linspace(self.kp_range[0], self.kp_range[1], self.kp_count)

    def kd_values(self) -> np.ndarray:
        return np.linspace(self.kd_range[0], self.kd_range[1], self.kd_count)


@dataclass(frozen=True)
class MatchResult:
    """Error surface over a gain grid and the arg-min cell."""

    grid: GainGrid
    band: FrequencyBand
    mode: str
    error_surface: np.ndarray
    best_gains: PDGains
    best_error: float

    def __post_init__(self):
        surface = np.asarray(self.error_surface, dtype=float)
        if surface.shape != (self.grid.kp_count, self.grid.kd_count):
            raise ValidationError(
                f"error surface shape {surface.shape} does not match grid "
                f"({self.grid.kp_count}, {self.grid.kd_count})"
            )
        if np.isnan(surface).any():
            raise ValidationError("error surface must not contain NaN")
        if self.best_error != surface.min():
            raise ValidationError("best_error must equal the surface minimum")
        surface = surface.copy()
        surface.setflags(write=False)
        object.__setattr__(self, "error_surface", surface)


def _argmin_cell(surface: np.ndarray) -> tuple[int, int]:
    """First minimum in row-major order: ties go to smaller kp, then smaller kd."""
    flat = int(np.argmin(surface))
    return flat // surface.shape[1], flat % surface.shape[1]


def grid_match(
    reference: BodeMagnitude,
    params: ActuatorParams,
    grid: GainGrid,
    band: FrequencyBand,
    mode: str = "analytic",
    *,
    chirp: ChirpSpec | None = None,
    sim: SimConfig | None = None,
    window_seconds: float = 20.0,
    overlap: float = 0.5,
    seed: int = 0,
    workers: int = 1,
) -> MatchResult:
    """Exhaustive (kp, kd) search minimizing band MSE against a reference curve.

    In ``analytic`` mode each cell evaluates the closed-form magnitude on the
    reference frequency grid. In ``simulated`` mode each cell runs a chirp
    sweep through the simulator and estimates its response, capturing any
    configured nonlinearities; a sweep that diverges records +inf for that
    cell instead of aborting the search. Results are independent of the number
    of workers and of cell evaluation order; exact error ties resolve to the
    smaller kp, then the smaller kd.
    """
    if mode not in MATCH_MODES:
        raise ValidationError(f"mode must be one of {MATCH_MODES}, got {mode!r}")
    if not isinstance(workers, int) or workers < 1:
        raise ValidationError(f"workers must be a positive integer, got {workers!r}")
    if mode == "simulated":
        if chirp is None:
            chirp = ChirpSpec()
        if sim is None:
            sim = SimConfig()
    kp_values = grid.kp_values()
    kd_values = grid.kd_values()

    def cell_error(kp: float, kd: float) -> float:
        gains = PDGains(kp=float(kp), kd=float(kd))
        if mode == "analytic":
            candidate = analytic_bode(params, gains, reference.frequencies)
        else:
            try:
                ts = simulate_sweep(params, gains, chirp, sim, seed=seed)
            except DivergenceError:
                return math.inf
            candidate = estimate_frf(ts, window_seconds=window_seconds, overlap=overlap)
        return band_mse(reference, candidate, band)

    def fill_row(i: int) -> np.ndarray:
        return np.array([cell_error(kp_values[i], kd) for kd in kd_values])

    surface = np.empty((grid.kp_count, grid.kd_count))
    if workers == 1:
        for i in range(grid.kp_count):
            surface[i, :] = fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, row in enumerate(pool.map(fill_row, range(grid.kp_count))):
                surface[i, :] = row
    i, j = _argmin_cell(surface)
    return MatchResult(
        grid=grid,
        band=band,
        mode=mode,
        error_surface=surface,
        best_gains=PDGains(kp=float(kp_values[i]), kd=float(kd_values[j])),
        best_error=float(surface[i, j]),
    )


def _round_to_step(value: float, step: float) -> float:
    """Nearest multiple of ``step`` (half-way cases away from zero)."""
    return math.floor(value / step + 0.5) * step


def _ceil_to_step(value: float, step: float) -> float:
    """Smallest multiple of ``step`` that compares >= ``value``."""
    multiples = math.ceil(value / step)
    if multiples * step < value:  # division can round onto an exact integer
        multiples += 1
    return multiples * step


@dataclass(frozen=True)
class RandomizationRange:
    """Symmetric per-gain randomization intervals: nominal +/- half_range."""

    kp_nominal: float
    kp_half_range: float
    kd_nominal: float
    kd_half_range: float
    margin_factor: float

    def __post_init__(self):
        for name in (
            "kp_nominal",
            "kp_half_range",
            "kd_nominal",
            "kd_half_range",
            "margin_factor",
        ):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"range {name} must be finite, got {value!r}")
        if self.kp_half_range <= 0 or self.kd_half_range <= 0:
            raise ValidationError("half ranges must be > 0")
        if self.margin_factor <= 0:
            raise ValidationError(f"margin_factor must be > 0, got {self.margin_factor}")

    def covers(self, gains: PDGains) -> bool:
        return (
            abs(gains.kp - self.kp_nominal) <= self.kp_half_range
            and abs(gains.kd - self.kd_nominal) <= self.kd_half_range
        )

    def uncovered(self, matched) -> dict[str, list[float]]:
        """Input gain values falling outside the interval, per component.

        A nonempty result means the range does not cover the data it is meant
        to randomize over; the caller should report it rather than widen the
        range silently.
        """
        out: dict[str, list[float]] = {"kp": [], "kd": []}
        for gains in matched:
            if abs(gains.kp - self.kp_nominal) > self.kp_half_range:
                out["kp"].append(gains.kp)
            if abs(gains.kd - self.kd_nominal) > self.kd_half_range:
                out["kd"].append(gains.kd)
        return out


def derive_ranges(
    matched,
    kp_step: float = 0.5,
    kd_step: float = 0.05,
    margin_factor: float = 1.5,
    kp_nominal: float | None = None,
    kd_nominal: float | None = None,
) -> RandomizationRange:
    """Turn per-leg matched gains into symmetric randomization ranges.

    For each component the nominal is the mean rounded to the nearest step
    (overridable, since a hand-picked published nominal is common), and the
    half range is ``margin_factor`` times the largest absolute deviation from
    the nominal, rounded up to the step. Identical inputs still get one step
    of width so the interval is never degenerate.
    """
    matched = list(matched)
    if len(matched) < 2:
        raise InsufficientDataError(
            f"need at least 2 matched gain sets to derive ranges, got {len(matched)}"
        )
    for step_name, step in (("kp_step", kp_step), ("kd_step", kd_step)):
        if not math.isfinite(step) or step <= 0:
            raise ValidationError(f"{step_name} must be > 0, got {step!r}")
    if not math.isfinite(margin_factor) or margin_factor <= 0:
        raise ValidationError(f"margin_factor must be > 0, got {margin_factor!r}")

    def component(values: np.ndarray, step: float, nominal: float | None) -> tuple[float, float]:
        if nominal is None:
            nominal = _round_to_step(float(np.mean(values)), step)
        max_dev = float(np.max(np.abs(values - nominal)))
        half = max(step, _ceil_to_step(margin_factor * max_dev, step))
        return nominal, half

    kp_nom, kp_half = component(
        np.array([g.kp for g in matched]), kp_step, kp_nominal
    )
    kd_nom, kd_half = component(
        np.array([g.kd for g in matched]), kd_step, kd_nominal
    )
    return RandomizationRange(
        kp_nominal=kp_nom,
        kp_half_range=kp_half,
        kd_nominal=kd_nom,
        kd_half_range=kd_half,
        margin_factor=margin_factor,
    )


def _default_bounds() -> dict[str, tuple[float, float]]:
    return {
        "decimation_offset": (-2.0, 2.0),
        "ground_friction": (0.05, 3.0),
        "kp_offset": (-2.0, 2.0),
        "kd_offset": (-0.05, 0.05),
        "shank_length": (0.18, 0.20),
        "base_mass_offset": (-0.4, 1.6),
        "joint_position_noise": (-0.05, 0.05),
        "joint_velocity_noise": (-0.5, 0.5),
        "angular_velocity_noise": (-0.2, 0.2),
        "projected_gravity_noise": (-0.05, 0.05),
    }


@dataclass(frozen=True)
class DomainRandomization:
    """Uniform-sampling bounds for training-time domain randomization.

    Each entry is a (low, high) pair. Defaults are the values used alongside
    the gain ranges this module derives; they are validated so a hand-edited
    config cannot ship an inverted or nonphysical interval.
    """

    bounds: dict[str, tuple[float, float]] = field(default_factory=_default_bounds)

    def __post_init__(self):
        checked = {}
        for name, pair in self.bounds.items():
            pair = tuple(float(v) for v in pair)
            if len(pair) != 2 or not all(math.isfinite(v) for v in pair):
                raise ValidationError(f"randomization bound {name} must be two finite values")
            if pair[0] >= pair[1]:
                raise ValidationError(
                    f"randomization bound {name} must satisfy low < high, got {pair}"
                )
            checked[name] = pair
        for positive in ("ground_friction", "shank_length"):
            if positive in checked and checked[positive][0] <= 0:
                raise ValidationError(f"randomization bound {positive} must be positive")
        object.__setattr__(self, "bounds", checked)


SURFACE_HEADER = "kp,kd,mse_db2"


def write_surface(result: MatchResult, path) -> None:
    """Write the error surface as ``kp,kd,mse_db2`` CSV in row-major order."""
    kp_values = result.grid.kp_values()
    kd_values = result.grid.kd_values()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SURFACE_HEADER + "\n")
        for i, kp in enumerate(kp_values):
            for j, kd in enumerate(kd_values):
                fh.write(
                    f"{float(kp)!r},{float(kd)!r},{float(result.error_surface[i, j])!r}\n"
                )


def summary_dict(result: MatchResult) -> dict:
    return {
        "mode": result.mode,
        "best_gains": {"kp": result.best_gains.kp, "kd": result.best_gains.kd},
        "best_error_db2": result.best_error,
        "band": {"f_low": result.band.f_low, "f_high": result.band.f_high},
        "grid": {
            "kp_range": list(result.grid.kp_range),
            "kd_range": list(result.grid.kd_range),
            "kp_count": result.grid.kp_count,
            "kd_count": result.grid.kd_count,
        },
    }


def write_summary(result: MatchResult, path) -> None:
    """Write the match summary (best gains, error, band, grid) as JSON."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary_dict(result), fh, indent=2)
        fh.write("\n")


def read_summary_gains(path) -> PDGains:
    """Extract the best gains from a match summary JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        best = doc["best_gains"]
        return PDGains(kp=float(best["kp"]), kd=float(best["kd"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path} is not a match summary: missing {exc}") from exc


def ranges_dict(
    ranges: RandomizationRange,
    uncovered: dict[str, list[float]] | None = None,
    defaults: DomainRandomization | None = None,
) -> dict:
    """Randomization-config document combining gain ranges with training defaults."""
    if defaults is None:
        defaults = DomainRandomization()
    return {
        "kp": {"nominal": ranges.kp_nominal, "half_range": ranges.kp_half_range},
        "kd": {"nominal": ranges.kd_nominal, "half_range": ranges.kd_half_range},
        "margin_factor": ranges.margin_factor,
        "uncovered": uncovered if uncovered is not None else {"kp": [], "kd": []},
        "domain_randomization": {
            name: list(pair) for name, pair in defaults.bounds.items()
        },
    }
