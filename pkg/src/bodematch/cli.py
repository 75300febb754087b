"""Command-line interface for the identification pipeline.

Subcommands: sweep, estimate, bode, match, ranges, widen. Exit codes:
0 success, 1 validation error, 2 numeric failure (divergence, singularity,
estimation), 3 I/O error. All randomness flows through --seed (default 0).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .actuator import read_timeseries, simulate_sweep, write_timeseries
from .config import load_config
from .errors import (
    DivergenceError,
    EstimationError,
    InsufficientDataError,
    SingularityError,
    ValidationError,
)
from .freq_analysis import analytic_bode, estimate_frf, read_bode, write_bode
from .matcher import (
    derive_ranges,
    grid_match,
    ranges_dict,
    read_summary_gains,
    write_summary,
    write_surface,
)
from .plots import save_error_heatmap, save_overlay_bode
from .policy import read_layer, widen_input_layer, write_layer


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports bad usage as a validation error (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    cfg.require("actuator", "gains", "chirp")
    ts = simulate_sweep(cfg.actuator, cfg.gains, cfg.chirp, cfg.sim, seed=args.seed)
    write_timeseries(ts, args.out)
    print(f"wrote {len(ts.command)} samples at {ts.sample_rate:g} Hz to {args.out}")
    return 0


def cmd_estimate(args) -> int:
    ts = read_timeseries(args.timeseries)
    curve = estimate_frf(ts, window_seconds=args.window, overlap=args.overlap)
    write_bode(curve, args.out)
    print(f"wrote {len(curve)} frequency bins to {args.out}")
    return 0


def cmd_bode(args) -> int:
    cfg = load_config(args.config)
    cfg.require("actuator", "gains")
    if args.points < 2:
        raise ValidationError(f"--points must be >= 2, got {args.points}")
    if not 0 < args.f_min < args.f_max:
        raise ValidationError(
            f"need 0 < --f-min < --f-max, got {args.f_min} and {args.f_max}"
        )
    freqs = np.geomspace(args.f_min, args.f_max, args.points)
    curve = analytic_bode(cfg.actuator, cfg.gains, freqs)
    write_bode(curve, args.out)
    print(f"wrote {len(curve)} frequency bins to {args.out}")
    return 0


def cmd_match(args) -> int:
    cfg = load_config(args.config)
    cfg.require("actuator", "grid", "band")
    if args.mode == "simulated":
        cfg.require("chirp")
    reference = read_bode(args.reference)
    result = grid_match(
        reference,
        cfg.actuator,
        cfg.grid,
        cfg.band,
        mode=args.mode,
        chirp=cfg.chirp,
        sim=cfg.sim,
        window_seconds=args.window,
        overlap=args.overlap,
        seed=args.seed,
        workers=args.workers,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_surface(result, out_dir / "surface.csv")
    write_summary(result, out_dir / "summary.json")
    save_error_heatmap(result, out_dir / "heatmap.svg")
    best_curve = analytic_bode(cfg.actuator, result.best_gains, reference.frequencies)
    save_overlay_bode(
        {"reference": reference, "best match": best_curve},
        cfg.band,
        out_dir / "bode_overlay.svg",
    )
    print(
        f"best kp = {result.best_gains.kp:.6g}, kd = {result.best_gains.kd:.6g}, "
        f"band MSE = {result.best_error:.6g} dB^2 ({args.mode} mode); "
        f"outputs in {out_dir}"
    )
    return 0


def cmd_ranges(args) -> int:
    if len(args.summaries) < 2:
        raise InsufficientDataError(
            f"need at least 2 match summaries, got {len(args.summaries)}"
        )
    matched = [read_summary_gains(path) for path in args.summaries]
    ranges = derive_ranges(
        matched,
        kp_step=args.kp_step,
        kd_step=args.kd_step,
        margin_factor=args.margin,
        kp_nominal=args.kp_nominal,
        kd_nominal=args.kd_nominal,
    )
    uncovered = ranges.uncovered(matched)
    doc = ranges_dict(ranges, uncovered=uncovered)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    for component in ("kp", "kd"):
        for value in uncovered[component]:
            print(
                f"warning: matched {component} = {value:g} lies outside "
                f"{component} nominal +/- half_range",
                file=sys.stderr,
            )
    print(
        f"kp = {ranges.kp_nominal:g} +/- {ranges.kp_half_range:g}, "
        f"kd = {ranges.kd_nominal:g} +/- {ranges.kd_half_range:g}; wrote {args.out}"
    )
    return 0


def cmd_widen(args) -> int:
    layer = read_layer(args.layer)
    widened = widen_input_layer(layer)
    write_layer(widened, args.out)
    print(
        f"widened ({layer.n_hidden}, {layer.n_inputs}) -> "
        f"({widened.n_hidden}, {widened.n_inputs}); wrote {args.out}"
    )
    if args.self_test:
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(1000):
            x = rng.standard_normal(layer.n_inputs)
            extra = rng.uniform(-1e6, 1e6)
            before = layer.pre_activations(x)
            after = widened.pre_activations(np.concatenate([x, [extra]]))
            worst = max(worst, float(np.max(np.abs(after - before))))
        print(f"self-test: max |pre-activation difference| over 1000 pairs = {worst!r}")
        if worst != 0.0:
            raise EstimationError(
                f"widening failed to preserve pre-activations (max diff {worst!r})"
            )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="bodematch",
        description=(
            "Actuator frequency-response identification: chirp sweeps, Welch "
            "estimates, closed-form matching, and gain randomization ranges."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="simulate a chirp sweep, write the log CSV")
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--out", required=True, help="output time-series CSV")
    p.add_argument("--seed", type=int, default=0, help="measurement noise seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="Welch magnitude estimate from a sweep CSV")
    p.add_argument("timeseries", help="input time-series CSV")
    p.add_argument("--out", required=True, help="output magnitude CSV")
    p.add_argument("--window", type=float, default=20.0, help="segment length (s)")
    p.add_argument("--overlap", type=float, default=0.5, help="fractional overlap")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bode", help="closed-form magnitude curve for a config")
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--out", required=True, help="output magnitude CSV")
    p.add_argument("--points", type=int, default=200, help="log-spaced grid size")
    p.add_argument("--f-min", type=float, default=0.05, help="grid start (Hz)")
    p.add_argument("--f-max", type=float, default=50.0, help="grid end (Hz)")
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("match", help="grid-search gains against a reference curve")
    p.add_argument("--reference", required=True, help="reference magnitude CSV")
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--out-dir", required=True, help="directory for outputs")
    p.add_argument("--mode", choices=("analytic", "simulated"), default="analytic")
    p.add_argument("--window", type=float, default=20.0, help="segment length (s)")
    p.add_argument("--overlap", type=float, default=0.5, help="fractional overlap")
    p.add_argument("--seed", type=int, default=0, help="simulated-mode noise seed")
    p.add_argument("--workers", type=int, default=1, help="parallel row workers")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("ranges", help="derive gain randomization ranges from summaries")
    p.add_argument("summaries", nargs="+", help="match summary JSON files (>= 2)")
    p.add_argument("--out", required=True, help="output ranges JSON")
    p.add_argument("--kp-step", type=float, default=0.5, help="kp rounding step")
    p.add_argument("--kd-step", type=float, default=0.05, help="kd rounding step")
    p.add_argument("--margin", type=float, default=1.5, help="deviation margin factor")
    p.add_argument("--kp-nominal", type=float, default=None, help="override kp center")
    p.add_argument("--kd-nominal", type=float, default=None, help="override kd center")
    p.set_defaults(func=cmd_ranges)

    p = sub.add_parser("widen", help="append a zero-weight input to a first layer")
    p.add_argument("layer", help="input layer file (JSON header + CSV body)")
    p.add_argument("--out", required=True, help="output layer file")
    p.add_argument(
        "--self-test",
        action="store_true",
        help="verify exact function preservation on 1000 random input pairs",
    )
    p.add_argument("--seed", type=int, default=0, help="self-test input seed")
    p.set_defaults(func=cmd_widen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DivergenceError, SingularityError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
