"""SVG figures: match error heatmaps and magnitude-curve overlays.

Figures are written with a fixed hash salt and no embedded date so repeated
runs produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .freq_analysis import BodeMagnitude, FrequencyBand
from .matcher import MatchResult

_SVG_RC = {"svg.hashsalt": "bodematch"}


def save_error_heatmap(result: MatchResult, path) -> None:
    """Error surface over the gain grid, with the best cell marked."""
    kp = result.grid.kp_values()
    kd = result.grid.kd_values()
    surface = result.error_surface
    finite = np.isfinite(surface)
    floor = surface[finite].min() if finite.any() else 0.0
    display = np.log10(np.maximum(surface, max(floor, 1e-12)))
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 5.2))
        mesh = ax.pcolormesh(kd, kp, display, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="log10 band MSE (dB^2)")
        ax.plot(
            result.best_gains.kd,
            result.best_gains.kp,
            marker="x",
            markersize=10,
            markeredgewidth=2,
            color="red",
        )
        ax.set_xlabel("kd")
        ax.set_ylabel("kp")
        ax.set_title(
            f"best kp = {result.best_gains.kp:.3f}, kd = {result.best_gains.kd:.4f}, "
            f"MSE = {result.best_error:.4g} dB^2"
        )
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def save_overlay_bode(
    curves: dict[str, BodeMagnitude], band: FrequencyBand | None, path
) -> None:
    """Overlay magnitude curves on a log-frequency axis, shading the band."""
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for label, curve in curves.items():
            ax.semilogx(curve.frequencies, curve.magnitudes_db, label=label)
        if band is not None:
            ax.axvspan(band.f_low, band.f_high, alpha=0.12, color="gray")
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("|H| (dB)")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
