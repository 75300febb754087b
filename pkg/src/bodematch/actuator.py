"""Single-joint PD actuator model with geared-rotor reflected inertia.

The plant is a second-order joint

    I_tot * dd_theta + b * d_theta = tau

driven by a PD position controller

    tau = kp * (theta_des - theta) + kd * (d_theta_des - d_theta)

where ``I_tot = link_inertia + rotor_inertia * gear_ratio**2``. The rotor term
is the armature reflected through the gearbox and is the quantity this
toolkit exists to identify. Integration is fixed-step semi-implicit Euler at
the inner control rate, with states logged at a slower rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .errors import DivergenceError, ValidationError
from .excitation import ChirpSpec, chirp_signal

INTEGRATORS = ("semi_implicit_euler",)

# Velocity scale (rad/s) of the tanh regularization used for dry friction.
DRY_FRICTION_VELOCITY_SCALE = 1e-3

# A sweep is aborted once |theta| exceeds this multiple of the chirp amplitude.
DIVERGENCE_FACTOR = 100.0


def _require_finite(name: str, value: float) -> float:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return float(value)


def reflected_inertia(rotor_inertia: float, gear_ratio: float) -> float:
    """Rotor inertia as seen at the joint: ``rotor_inertia * gear_ratio**2``."""
    _require_finite("rotor_inertia", rotor_inertia)
    _require_finite("gear_ratio", gear_ratio)
    if rotor_inertia < 0:
        raise ValidationError(f"rotor_inertia must be >= 0, got {rotor_inertia}")
    if gear_ratio < 1:
        raise ValidationError(f"gear_ratio must be >= 1, got {gear_ratio}")
    return rotor_inertia * gear_ratio**2


@dataclass(frozen=True)
class VoltageModel:
    """Bus-voltage torque envelope parameters (joint-side torque constant)."""

    torque_constant: float
    winding_resistance: float
    bus_voltage: float

    def __post_init__(self):
        for name in ("torque_constant", "winding_resistance", "bus_voltage"):
            if _require_finite(f"voltage model {name}", getattr(self, name)) <= 0:
                raise ValidationError(
                    f"voltage model {name} must be > 0, got {getattr(self, name)}"
                )


@dataclass(frozen=True)
class ActuatorParams:
    """Physical parameters of one joint and its actuator."""

    link_inertia: float
    viscous_friction: float
    rotor_inertia: float
    gear_ratio: float
    torque_limit: float | None = None
    dry_friction: float = 0.0
    voltage_model: VoltageModel | None = None

    def __post_init__(self):
        if _require_finite("link_inertia", self.link_inertia) <= 0:
            raise ValidationError(f"link_inertia must be > 0, got {self.link_inertia}")
        if _require_finite("viscous_friction", self.viscous_friction) < 0:
            raise ValidationError(
                f"viscous_friction must be >= 0, got {self.viscous_friction}"
            )
        reflected_inertia(self.rotor_inertia, self.gear_ratio)  # validates both
        if self.torque_limit is not None and (
            _require_finite("torque_limit", self.torque_limit) <= 0
        ):
            raise ValidationError(f"torque_limit must be > 0, got {self.torque_limit}")
        if _require_finite("dry_friction", self.dry_friction) < 0:
            raise ValidationError(f"dry_friction must be >= 0, got {self.dry_friction}")

    def total_inertia(self) -> float:
        """Link inertia plus the gearbox-reflected rotor inertia."""
        return self.link_inertia + reflected_inertia(self.rotor_inertia, self.gear_ratio)

    def is_linear(self) -> bool:
        """True when no clamp, envelope, or dry friction is configured."""
        return (
            self.torque_limit is None
            and self.dry_friction == 0.0
            and self.voltage_model is None
        )


@dataclass(frozen=True)
class PDGains:
    """Proportional and derivative gains of the joint position loop."""

    kp: float
    kd: float

    def __post_init__(self):
        if _require_finite("kp", self.kp) <= 0:
            raise ValidationError(f"kp must be > 0, got {self.kp}")
        if _require_finite("kd", self.kd) < 0:
            raise ValidationError(f"kd must be >= 0, got {self.kd}")


@dataclass(frozen=True)
class SimConfig:
    """Rates, integrator, and logging options for sweep simulation."""

    inner_loop_rate: int = 40000
    log_rate: int = 1000
    integrator: str = "semi_implicit_euler"
    initial_state: tuple[float, float] = (0.0, 0.0)
    measurement_noise_std: float = 0.0
    velocity_feedforward: bool = True

    def __post_init__(self):
        if not isinstance(self.inner_loop_rate, int) or self.inner_loop_rate <= 0:
            raise ValidationError(
                f"inner_loop_rate must be a positive integer, got {self.inner_loop_rate!r}"
            )
        if not isinstance(self.log_rate, int) or self.log_rate <= 0:
            raise ValidationError(
                f"log_rate must be a positive integer, got {self.log_rate!r}"
            )
        if self.inner_loop_rate % self.log_rate != 0:
            raise ValidationError(
                "inner_loop_rate must be an integer multiple of log_rate, "
                f"got {self.inner_loop_rate} and {self.log_rate}"
            )
        if self.integrator not in INTEGRATORS:
            raise ValidationError(
                f"integrator must be one of {INTEGRATORS}, got {self.integrator!r}"
            )
        state = tuple(float(v) for v in self.initial_state)
        if len(state) != 2 or not all(math.isfinite(v) for v in state):
            raise ValidationError(
                f"initial_state must be two finite values, got {self.initial_state!r}"
            )
        object.__setattr__(self, "initial_state", state)
        if _require_finite("measurement_noise_std", self.measurement_noise_std) < 0:
            raise ValidationError(
                f"measurement_noise_std must be >= 0, got {self.measurement_noise_std}"
            )


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled command and measured position channels."""

    sample_rate: float
    command: np.ndarray
    measured: np.ndarray

    def __post_init__(self):
        if _require_finite("sample_rate", self.sample_rate) <= 0:
            raise ValidationError(f"sample_rate must be > 0, got {self.sample_rate}")
        command = np.asarray(self.command, dtype=float)
        measured = np.asarray(self.measured, dtype=float)
        if command.ndim != 1 or measured.ndim != 1:
            raise ValidationError("time series channels must be one-dimensional")
        if len(command) != len(measured):
            raise ValidationError(
                f"channel lengths differ: {len(command)} command vs {len(measured)} measured"
            )
        if len(command) < 2:
            raise ValidationError("time series needs at least 2 samples")
        for name, arr in (("command", command), ("measured", measured)):
            if not np.isfinite(arr).all():
                bad = int(np.flatnonzero(~np.isfinite(arr))[0])
                raise ValidationError(f"non-finite {name} value at sample {bad}")
        command = command.copy()
        measured = measured.copy()
        command.setflags(write=False)
        measured.setflags(write=False)
        object.__setattr__(self, "command", command)
        object.__setattr__(self, "measured", measured)

    def times(self) -> np.ndarray:
        return np.arange(len(self.command)) / self.sample_rate

    def duration(self) -> float:
        return (len(self.command) - 1) / self.sample_rate


def applied_torque(
    tau_cmd: float, dtheta: float, params: ActuatorParams
) -> float:
    """Actuator output torque: the command after voltage envelope and limit.

    The electrical envelope narrows with back-emf; the hard torque limit is
    applied last so the magnitude of the result never exceeds it, even in the
    plugging regime where back-emf pushes the envelope past the limit. Dry
    friction is a plant-side torque and is not part of this value.
    """
    tau = tau_cmd
    vm = params.voltage_model
    if vm is not None:
        back_emf = vm.torque_constant * params.gear_ratio * dtheta
        hi = vm.torque_constant * (vm.bus_voltage - back_emf) / vm.winding_resistance
        lo = vm.torque_constant * (-vm.bus_voltage - back_emf) / vm.winding_resistance
        tau = min(max(tau, lo), hi)
    if params.torque_limit is not None:
        lim = params.torque_limit
        tau = min(max(tau, -lim), lim)
    return tau


def step(
    state: tuple[float, float],
    targets: tuple[float, float],
    params: ActuatorParams,
    gains: PDGains,
    dt: float,
) -> tuple[float, float]:
    """Advance ``(theta, d_theta)`` by one semi-implicit Euler step.

    The PD torque is computed from the current state, passed through the
    voltage envelope and torque limit, and reduced by regularized dry
    friction; then velocity updates before position:

        d_theta' = d_theta + dt * (tau_net - b * d_theta) / I_tot
        theta'   = theta + dt * d_theta'

    At an equilibrium (theta == theta_des, both velocities zero) the state is
    reproduced exactly, bit for bit.
    """
    theta, dtheta = state
    theta_des, dtheta_des = targets
    for name, value in (
        ("theta", theta),
        ("d_theta", dtheta),
        ("theta_des", theta_des),
        ("d_theta_des", dtheta_des),
    ):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite {name} input: {value!r}")
    if not math.isfinite(dt) or dt <= 0:
        raise ValidationError(f"dt must be finite and > 0, got {dt!r}")

    tau_cmd = gains.kp * (theta_des - theta) + gains.kd * (dtheta_des - dtheta)
    tau = applied_torque(tau_cmd, dtheta, params)
    if params.dry_friction != 0.0:
        tau -= params.dry_friction * math.tanh(dtheta / DRY_FRICTION_VELOCITY_SCALE)
    itot = params.total_inertia()
    dtheta_new = dtheta + dt * (tau - params.viscous_friction * dtheta) / itot
    theta_new = theta + dt * dtheta_new
    return theta_new, dtheta_new


def _linear_inner_response(
    params: ActuatorParams,
    gains: PDGains,
    u: np.ndarray,
    du: np.ndarray,
    dt: float,
) -> np.ndarray:
    """Exact semi-implicit Euler response of the linear loop from rest.

    The update is a linear time-invariant recurrence in (theta, d_theta), so
    it is evaluated with a discrete transfer-function filter instead of a
    Python loop. Agreement with the stepped path is pinned by tests.
    """
    itot = params.total_inertia()
    kp, kd = gains.kp, gains.kd
    damping = kd + params.viscous_friction
    a = dt * dt * kp / itot
    c = dt * damping / itot
    A = np.array([[1.0 - a, dt * (1.0 - c)], [-a / dt, 1.0 - c]])
    B = np.array([[dt * dt * kp / itot, dt * dt * kd / itot],
                  [dt * kp / itot, dt * kd / itot]])
    C = np.array([[1.0, 0.0]])
    D = np.zeros((1, 2))
    num_u, den = _signal.ss2tf(A, B, C, D, input=0)
    theta = _signal.lfilter(num_u[0], den, u)
    if np.any(du):
        num_du, den2 = _signal.ss2tf(A, B, C, D, input=1)
        theta += _signal.lfilter(num_du[0], den2, du)
    return theta


def simulate_sweep(
    params: ActuatorParams,
    gains: PDGains,
    chirp: ChirpSpec,
    sim: SimConfig | None = None,
    seed: int = 0,
) -> TimeSeries:
    """Run a chirp sweep through the joint and log command/measured positions.

    The PD loop and integrator run at ``sim.inner_loop_rate``; both channels
    are logged at ``sim.log_rate`` (including t = 0 and the final sample, so a
    D second sweep yields ``D * log_rate + 1`` rows). Measurement noise, when
    configured, is added to the measured channel only, drawn from
    ``numpy.random.default_rng(seed)``.

    Aborts with a divergence error naming the blowup time if |theta| exceeds
    100x the chirp amplitude at any inner step (the check is skipped for the
    null excitation, whose envelope would be zero).
    """
    if sim is None:
        sim = SimConfig()
    if sim.inner_loop_rate < 20.0 * chirp.f_end:
        raise ValidationError(
            f"inner_loop_rate {sim.inner_loop_rate} Hz is below 20x the chirp end "
            f"frequency {chirp.f_end} Hz"
        )
    dt = 1.0 / sim.inner_loop_rate
    decim = sim.inner_loop_rate // sim.log_rate
    n_log = int(math.floor(chirp.duration * sim.log_rate + 1e-9))
    if n_log < 1:
        raise ValidationError(
            f"sweep duration {chirp.duration} s is shorter than one log interval"
        )
    n_inner = n_log * decim
    t_inner = np.arange(n_inner + 1) / sim.inner_loop_rate
    u_inner, du_inner = chirp_signal(chirp, t_inner)
    if not sim.velocity_feedforward:
        du_inner = np.zeros_like(u_inner)
    threshold = (
        DIVERGENCE_FACTOR * chirp.amplitude if chirp.amplitude > 0 else math.inf
    )

    from_rest = sim.initial_state == (0.0, 0.0)
    if params.is_linear() and from_rest:
        theta_inner = _linear_inner_response(params, gains, u_inner, du_inner, dt)
        over = np.abs(theta_inner) > threshold
        if over.any():
            k = int(np.argmax(over))
            raise DivergenceError(
                f"state diverged at t = {k * dt:.6f} s "
                f"(|theta| > {threshold:.6g} rad)",
                time_s=k * dt,
            )
        theta_log = theta_inner[::decim].copy()
    else:
        state = sim.initial_state
        theta_log = np.empty(n_log + 1)
        theta_log[0] = state[0]
        k = 0
        try:
            for k in range(n_inner):
                state = step(
                    state, (u_inner[k], du_inner[k]), params, gains, dt
                )
                if abs(state[0]) > threshold:
                    raise DivergenceError(
                        f"state diverged at t = {(k + 1) * dt:.6f} s "
                        f"(|theta| > {threshold:.6g} rad)",
                        time_s=(k + 1) * dt,
                    )
                if (k + 1) % decim == 0:
                    theta_log[(k + 1) // decim] = state[0]
        except ValidationError as exc:
            raise ValidationError(f"at inner step {k} (t = {k * dt:.6f} s): {exc}") from exc

    measured = theta_log
    if sim.measurement_noise_std > 0:
        rng = np.random.default_rng(seed)
        measured = theta_log + rng.normal(0.0, sim.measurement_noise_std, len(theta_log))
    u_log = u_inner[::decim]
    return TimeSeries(
        sample_rate=float(sim.log_rate), command=u_log, measured=measured
    )


def decimate(ts: TimeSeries, factor: int) -> TimeSeries:
    """Subsample both channels by an integer factor (e.g. 1 kHz down to 50 Hz).

    Plain strided subsampling, mirroring a logger that simply reads the state
    less often; the plant is low-pass so no anti-alias filter is applied.
    """
    if not isinstance(factor, int) or factor < 1:
        raise ValidationError(f"decimation factor must be a positive integer, got {factor!r}")
    return TimeSeries(
        sample_rate=ts.sample_rate / factor,
        command=ts.command[::factor],
        measured=ts.measured[::factor],
    )


TIMESERIES_HEADER = "t,theta_des,theta_meas"


def write_timeseries(ts: TimeSeries, path) -> None:
    """Write a sweep log as CSV with full double precision columns."""
    times = ts.times()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TIMESERIES_HEADER + "\n")
        for t, u, y in zip(times, ts.command, ts.measured):
            fh.write(f"{float(t)!r},{float(u)!r},{float(y)!r}\n")


def read_timeseries(path) -> TimeSeries:
    """Read a sweep CSV written by :func:`write_timeseries`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != TIMESERIES_HEADER:
            raise ValidationError(
                f"expected header {TIMESERIES_HEADER!r} in {path}, got {header!r}"
            )
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != 3:
        raise ValidationError(f"expected 3 columns in {path}, got {data.shape[1]}")
    t = data[:, 0]
    if len(t) < 2:
        raise ValidationError(f"time series in {path} needs at least 2 samples")
    spacing = np.diff(t)
    mean_dt = float(np.mean(spacing))
    if mean_dt <= 0 or not np.allclose(spacing, mean_dt, rtol=1e-6, atol=0):
        raise ValidationError(f"time column in {path} is not uniformly sampled")
    rate = 1.0 / mean_dt
    if abs(rate - round(rate)) < 1e-6 * rate:
        rate = float(round(rate))
    return TimeSeries(sample_rate=rate, command=data[:, 1], measured=data[:, 2])
