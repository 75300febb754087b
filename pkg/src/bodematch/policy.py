"""Function-preserving input widening and jump reward shaping for policy networks.

Widening appends one zero-weight input column to an MLP first layer so a
retrained policy can consume an extra observation while reproducing the
original network's outputs exactly. The jump rewards are the dense
foot-force-balance term and the sparse liftoff-velocity term; phase-dependent
scales are plain multipliers applied outside the core formulas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

N_FEET = 4

# (dense_scale, sparse_scale) multipliers per training phase. Phase 1 does not
# use the jump terms at all, so both scales are zero there.
PHASE_SCALES: dict[str, tuple[float, float]] = {
    "phase_1": (0.0, 0.0),
    "phase_2a": (-2.5, 250.0),
    "phase_2b": (-0.25, 250.0),
}


@dataclass(frozen=True)
class MlpFirstLayer:
    """First dense layer of a policy MLP: ``pre = weights @ x + bias``."""

    weights: np.ndarray  # shape (hidden, inputs)
    bias: np.ndarray  # shape (hidden,)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        bias = np.asarray(self.bias, dtype=float)
        if weights.ndim != 2:
            raise ValidationError(f"weights must be 2-D, got shape {weights.shape}")
        if bias.ndim != 1 or len(bias) != weights.shape[0]:
            raise ValidationError(
                f"bias shape {bias.shape} does not match {weights.shape[0]} hidden units"
            )
        if weights.shape[1] < 1:
            raise ValidationError("layer must have at least one input")
        if not np.isfinite(weights).all() or not np.isfinite(bias).all():
            raise ValidationError("layer parameters must be finite")
        weights = weights.copy()
        bias = bias.copy()
        weights.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def n_inputs(self) -> int:
        return self.weights.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.weights.shape[0]

    def pre_activations(self, x) -> np.ndarray:
        """Pre-activation vector ``weights @ x + bias``.

        Input contributions are accumulated column by column, strictly left to
        right. Sequential accumulation is what makes widening exact: a zero
        column appended on the right adds a trailing ``+ 0.0`` to every row
        sum, which cannot change any partial result. (BLAS matrix products
        reorder the sum and break that guarantee in the last ulp.)
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_inputs,):
            raise ValidationError(
                f"input shape {x.shape} does not match {self.n_inputs} layer inputs"
            )
        if not np.isfinite(x).all():
            raise ValidationError("input vector must be finite")
        acc = np.zeros(self.n_hidden)
        for j in range(self.n_inputs):
            acc += self.weights[:, j] * x[j]
        return acc + self.bias


def widen_input_layer(layer: MlpFirstLayer) -> MlpFirstLayer:
    """Append one input with all-zero weights; bias is unchanged.

    The widened layer maps any ``(x, c)`` to exactly the pre-activations the
    original layer produced for ``x``, regardless of the appended value ``c``.
    """
    widened = np.hstack([layer.weights, np.zeros((layer.n_hidden, 1))])
    return MlpFirstLayer(weights=widened, bias=layer.bias)


@dataclass(frozen=True)
class JumpRewardParams:
    """Targets and phase multipliers for the jump reward terms."""

    v_liftoff_desired: float = 2.5
    dense_scale: float = -2.5
    sparse_scale: float = 250.0

    def __post_init__(self):
        for name in ("v_liftoff_desired", "dense_scale", "sparse_scale"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"reward {name} must be finite, got {value!r}")

    @classmethod
    def for_phase(cls, phase: str, v_liftoff_desired: float = 2.5) -> "JumpRewardParams":
        if phase not in PHASE_SCALES:
            raise ValidationError(
                f"phase must be one of {sorted(PHASE_SCALES)}, got {phase!r}"
            )
        dense, sparse = PHASE_SCALES[phase]
        return cls(
            v_liftoff_desired=v_liftoff_desired,
            dense_scale=dense,
            sparse_scale=sparse,
        )


def dense_jump_reward(foot_forces) -> float:
    """Negative population standard deviation of the four foot contact forces.

    Maximal (zero) when the load is shared evenly; increasingly negative as
    the stance becomes lopsided. Unscaled; phase multipliers are applied by
    the caller.
    """
    forces = np.asarray(foot_forces, dtype=float)
    if forces.shape != (N_FEET,):
        raise ValidationError(
            f"expected {N_FEET} foot forces, got shape {forces.shape}"
        )
    if not np.isfinite(forces).all():
        raise ValidationError("foot forces must be finite")
    if np.any(forces < 0):
        raise ValidationError(
            f"foot forces must be >= 0, got {forces.min()}"
        )
    spread = float(np.std(forces))
    return -spread if spread else 0.0


def sparse_jump_reward(v_liftoff: float, params: JumpRewardParams | None = None) -> float:
    """Gaussian liftoff-velocity reward ``exp(-(v - v_des)^2 / 2)``, in (0, 1]."""
    if params is None:
        params = JumpRewardParams()
    if not isinstance(v_liftoff, (int, float)) or not math.isfinite(v_liftoff):
        raise ValidationError(f"v_liftoff must be finite, got {v_liftoff!r}")
    dv = v_liftoff - params.v_liftoff_desired
    return float(math.exp(-0.5 * dv * dv))


def scaled_jump_rewards(
    phase: str, foot_forces, v_liftoff: float, v_liftoff_desired: float = 2.5
) -> tuple[float, float]:
    """Phase-scaled (dense, sparse) reward pair for one step."""
    params = JumpRewardParams.for_phase(phase, v_liftoff_desired)
    return (
        params.dense_scale * dense_jump_reward(foot_forces),
        params.sparse_scale * sparse_jump_reward(v_liftoff, params),
    )


def write_layer(layer: MlpFirstLayer, path) -> None:
    """Write a first layer as a JSON header line plus CSV body.

    Line 1 is ``{"rows": hidden, "cols": inputs}``; the next ``rows`` lines are
    weight rows; the final line is the bias. Values use full double precision,
    so read/write round-trips are lossless and widening is auditable by diff.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"rows": layer.n_hidden, "cols": layer.n_inputs}))
        fh.write("\n")
        for row in layer.weights:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
        fh.write(",".join(repr(float(v)) for v in layer.bias))
        fh.write("\n")


def read_layer(path) -> MlpFirstLayer:
    """Read a first layer written by :func:`write_layer`."""
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            rows, cols = int(header["rows"]), int(header["cols"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path} has a malformed layer header: {exc}") from exc
        body = [line.strip() for line in fh if line.strip()]
    if len(body) != rows + 1:
        raise ValidationError(
            f"{path} declares {rows} weight rows plus bias but has {len(body)} data lines"
        )
    try:
        weights = np.array([[float(v) for v in line.split(",")] for line in body[:rows]])
        bias = np.array([float(v) for v in body[rows].split(",")])
    except ValueError as exc:
        raise ValidationError(f"{path} has a malformed value: {exc}") from exc
    if rows and weights.shape != (rows, cols):
        raise ValidationError(
            f"{path} weight block is {weights.shape}, header declares ({rows}, {cols})"
        )
    return MlpFirstLayer(weights=weights, bias=bias)
