"""Gain grid search, randomization-range derivation, persistence formats."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bodematch import (
    ActuatorParams,
    ChirpSpec,
    DomainRandomization,
    FrequencyBand,
    GainGrid,
    InsufficientDataError,
    MatchResult,
    PDGains,
    RandomizationRange,
    ValidationError,
    analytic_bode,
    derive_ranges,
    estimate_frf,
    grid_match,
    ranges_dict,
    read_summary_gains,
    simulate_sweep,
    write_summary,
    write_surface,
)
from bodematch.matcher import _argmin_cell

KNEE = {
    "link_inertia": 5e-4,
    "viscous_friction": 0.0,
    "rotor_inertia": 7.2e-5,
    "gear_ratio": 9.33,
}
BAND = FrequencyBand(f_low=0.1, f_high=15.0)

# Per-leg matched gains: (kp column, kd column), four legs each.
KNEE_LEGS = [
    PDGains(kp, kd)
    for kp, kd in zip((21.8, 22.0, 22.2, 21.8), (0.541, 0.523, 0.553, 0.553))
]
HIP_PITCH_LEGS = [
    PDGains(kp, kd)
    for kp, kd in zip((16.5, 17.7, 16.9, 18.9), (0.382, 0.406, 0.382, 0.431))
]
HIP_ROLL_LEGS = [
    PDGains(kp, kd)
    for kp, kd in zip((20.6, 18.1, 18.5, 21.0), (0.492, 0.516, 0.431, 0.49))
]


def reference_curve(kp: float, kd: float, n: int = 240):
    params = ActuatorParams(**KNEE)
    return analytic_bode(params, PDGains(kp=kp, kd=kd), np.geomspace(0.05, 20.0, n))


class TestGridMatch:
    def test_self_match_is_exact(self):
        grid = GainGrid()
        kp = float(grid.kp_values()[14])
        kd = float(grid.kd_values()[25])
        result = grid_match(reference_curve(kp, kd), ActuatorParams(**KNEE), grid, BAND)
        assert result.best_gains == PDGains(kp=kp, kd=kd)
        assert result.best_error == 0.0

    def test_recovery_within_one_cell(self):
        grid = GainGrid()
        result = grid_match(
            reference_curve(17.0, 0.4), ActuatorParams(**KNEE), grid, BAND
        )
        assert abs(result.best_gains.kp - 17.0) <= 0.29
        assert abs(result.best_gains.kd - 0.4) <= 0.013

    def test_surface_shape_and_argmin(self):
        grid = GainGrid(kp_count=12, kd_count=9)
        result = grid_match(
            reference_curve(17.0, 0.4), ActuatorParams(**KNEE), grid, BAND
        )
        assert result.error_surface.shape == (12, 9)
        assert result.best_error == result.error_surface.min()
        assert np.all(result.error_surface >= result.best_error)
        assert result.best_gains.kp in grid.kp_values()
        assert result.best_gains.kd in grid.kd_values()

    def test_worker_count_invariance(self):
        grid = GainGrid(kp_count=15, kd_count=15)
        reference = reference_curve(18.2, 0.5)
        one = grid_match(reference, ActuatorParams(**KNEE), grid, BAND, workers=1)
        three = grid_match(reference, ActuatorParams(**KNEE), grid, BAND, workers=3)
        assert np.array_equal(one.error_surface, three.error_surface)
        assert one.best_gains == three.best_gains
        assert one.best_error == three.best_error

    def test_refinement_never_hurts(self):
        reference = reference_curve(17.3, 0.43)
        params = ActuatorParams(**KNEE)
        errors = [
            grid_match(reference, params, GainGrid(kp_count=n, kd_count=n), BAND).best_error
            for n in (10, 19, 37)  # each grid nests the previous one
        ]
        assert errors[1] <= errors[0]
        assert errors[2] <= errors[1]

    @given(
        kp=st.floats(14.0, 26.0),
        kd=st.floats(0.15, 0.65),
        n=st.integers(4, 8),
    )
    @settings(max_examples=15)
    def test_refinement_property(self, kp, kd, n):
        reference = reference_curve(kp, kd, n=60)
        params = ActuatorParams(**KNEE)
        coarse = grid_match(reference, params, GainGrid(kp_count=n, kd_count=n), BAND)
        fine = grid_match(
            reference, params, GainGrid(kp_count=2 * n - 1, kd_count=2 * n - 1), BAND
        )
        assert fine.best_error <= coarse.best_error

    def test_mode_and_worker_validation(self):
        reference = reference_curve(17.0, 0.4)
        params = ActuatorParams(**KNEE)
        with pytest.raises(ValidationError, match="mode"):
            grid_match(reference, params, GainGrid(), BAND, mode="exhaustive")
        with pytest.raises(ValidationError, match="workers"):
            grid_match(reference, params, GainGrid(), BAND, workers=0)


class TestSimulatedMode:
    def test_divergent_cells_score_infinity(self):
        # Undamped cells blow up crossing the resonance; damped cells survive.
        params = ActuatorParams(**{**KNEE, "rotor_inertia": 0.0})
        chirp = ChirpSpec(f_start=30.0, f_end=45.0, amplitude=0.1, duration=30.0)
        stable = simulate_sweep(params, PDGains(kp=26.5, kd=0.25), chirp)
        reference = estimate_frf(stable, window_seconds=10.0)
        result = grid_match(
            reference,
            params,
            GainGrid(kp_range=(26.0, 27.0), kd_range=(0.0, 0.3), kp_count=2, kd_count=2),
            FrequencyBand(f_low=32.0, f_high=42.0),
            mode="simulated",
            chirp=chirp,
            window_seconds=10.0,
        )
        assert np.isinf(result.error_surface[:, 0]).all()
        assert np.isfinite(result.error_surface[:, 1]).all()
        assert result.best_gains.kd == 0.3


class TestTieBreaking:
    def test_first_minimum_in_row_major_order(self):
        assert _argmin_cell(np.array([[1.0, 0.0], [0.0, 2.0]])) == (0, 1)
        assert _argmin_cell(np.array([[3.0, 3.0], [3.0, 3.0]])) == (0, 0)
        assert _argmin_cell(np.array([[2.0, 1.0], [1.0, 0.5]])) == (1, 1)


class TestMatchResultType:
    def make(self, surface):
        grid = GainGrid(kp_count=2, kd_count=2)
        surface = np.asarray(surface, dtype=float)
        i, j = _argmin_cell(surface)
        return MatchResult(
            grid=grid,
            band=BAND,
            mode="analytic",
            error_surface=surface,
            best_gains=PDGains(
                kp=float(grid.kp_values()[i]), kd=float(grid.kd_values()[j])
            ),
            best_error=float(surface[i, j]),
        )

    def test_valid_surface_accepted(self):
        result = self.make([[1.0, 2.0], [3.0, 4.0]])
        assert result.best_error == 1.0

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValidationError, match="shape"):
            MatchResult(
                grid=GainGrid(kp_count=2, kd_count=2),
                band=BAND,
                mode="analytic",
                error_surface=np.zeros((3, 2)),
                best_gains=PDGains(kp=13.0, kd=0.1),
                best_error=0.0,
            )

    def test_nan_rejected(self):
        with pytest.raises(ValidationError, match="NaN"):
            self.make([[np.nan, 1.0], [1.0, 1.0]])

    def test_best_must_equal_minimum(self):
        grid = GainGrid(kp_count=2, kd_count=2)
        with pytest.raises(ValidationError, match="minimum"):
            MatchResult(
                grid=grid,
                band=BAND,
                mode="analytic",
                error_surface=np.array([[1.0, 2.0], [3.0, 4.0]]),
                best_gains=PDGains(kp=13.0, kd=0.1),
                best_error=2.0,
            )


class TestGainGrid:
    def test_default_grid_layout(self):
        grid = GainGrid()
        kps = grid.kp_values()
        kds = grid.kd_values()
        assert len(kps) == 50 and len(kds) == 50
        assert kps[0] == 13.0 and kps[-1] == 27.0
        assert kds[0] == 0.1 and kds[-1] == 0.7
        assert kps[14] == 17.0  # the hardware stiffness sits on the grid

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"kp_range": (27.0, 13.0)},
            {"kd_range": (0.7, 0.7)},
            {"kp_range": (0.0, 27.0)},
            {"kd_range": (-0.1, 0.7)},
            {"kp_count": 1},
            {"kd_count": 2.5},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValidationError):
            GainGrid(**kwargs)


class TestDeriveRanges:
    def test_knee_columns_at_unit_margin(self):
        ranges = derive_ranges(KNEE_LEGS, margin_factor=1.0)
        assert ranges.kp_nominal == pytest.approx(22.0)
        assert ranges.kp_half_range == pytest.approx(0.5)
        assert ranges.kd_nominal == pytest.approx(0.55)
        assert ranges.kd_half_range == pytest.approx(0.05)
        assert all(ranges.covers(g) for g in KNEE_LEGS)

    def test_hip_pitch_margins(self):
        at_one = derive_ranges(HIP_PITCH_LEGS, margin_factor=1.0)
        assert at_one.kp_nominal == pytest.approx(17.5)
        assert at_one.kp_half_range == pytest.approx(1.5)
        at_default = derive_ranges(HIP_PITCH_LEGS, margin_factor=1.5)
        assert at_default.kp_half_range == pytest.approx(2.5)

    def test_identical_inputs_get_minimum_width(self):
        same = [PDGains(kp=20.0, kd=0.5)] * 3
        ranges = derive_ranges(same)
        assert ranges.kp_half_range == 0.5
        assert ranges.kd_half_range == 0.05

    def test_nominal_override(self):
        ranges = derive_ranges(KNEE_LEGS, kp_nominal=21.5)
        assert ranges.kp_nominal == 21.5
        # max deviation grows to 0.7; 1.5 * 0.7 rounds up to 1.5
        assert ranges.kp_half_range == pytest.approx(1.5)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            derive_ranges([PDGains(kp=20.0, kd=0.5)])

    def test_step_validation(self):
        with pytest.raises(ValidationError):
            derive_ranges(KNEE_LEGS, kp_step=0.0)
        with pytest.raises(ValidationError):
            derive_ranges(KNEE_LEGS, margin_factor=-1.0)

    @given(
        kps=st.lists(st.floats(1.0, 60.0), min_size=2, max_size=8),
        kds=st.lists(st.floats(0.0, 1.2), min_size=2, max_size=8),
        margin=st.floats(1.0, 3.0),
    )
    def test_coverage_guarantee(self, kps, kds, margin):
        n = min(len(kps), len(kds))
        matched = [PDGains(kp=kp, kd=kd) for kp, kd in zip(kps[:n], kds[:n])]
        ranges = derive_ranges(matched, margin_factor=margin)
        assert all(ranges.covers(g) for g in matched)
        uncovered = ranges.uncovered(matched)
        assert uncovered == {"kp": [], "kd": []}

    def test_published_range_misses_hip_roll_damping(self):
        published = RandomizationRange(
            kp_nominal=19.5,
            kp_half_range=2.0,
            kd_nominal=0.45,
            kd_half_range=0.05,
            margin_factor=1.0,
        )
        assert published.uncovered(HIP_ROLL_LEGS) == {"kp": [], "kd": [0.516]}

    def test_range_validation(self):
        with pytest.raises(ValidationError):
            RandomizationRange(
                kp_nominal=20.0,
                kp_half_range=0.0,
                kd_nominal=0.5,
                kd_half_range=0.05,
                margin_factor=1.0,
            )


class TestDomainRandomization:
    def test_default_bounds(self):
        bounds = DomainRandomization().bounds
        assert bounds["ground_friction"] == (0.05, 3.0)
        assert bounds["kp_offset"] == (-2.0, 2.0)
        assert bounds["kd_offset"] == (-0.05, 0.05)
        assert bounds["base_mass_offset"] == (-0.4, 1.6)
        assert len(bounds) == 10

    def test_inverted_bounds_rejected(self):
        with pytest.raises(ValidationError, match="low < high"):
            DomainRandomization(bounds={"ground_friction": (3.0, 0.05)})

    def test_nonpositive_friction_rejected(self):
        with pytest.raises(ValidationError, match="positive"):
            DomainRandomization(bounds={"ground_friction": (-0.5, 3.0)})


class TestPersistence:
    def test_surface_rows_in_row_major_order(self, tmp_path):
        grid = GainGrid(kp_count=3, kd_count=2)
        result = grid_match(
            reference_curve(17.0, 0.4), ActuatorParams(**KNEE), grid, BAND
        )
        path = tmp_path / "surface.csv"
        write_surface(result, path)
        rows = np.loadtxt(path, delimiter=",", skiprows=1)
        assert rows.shape == (6, 3)
        np.testing.assert_array_equal(rows[:, 0], np.repeat(grid.kp_values(), 2))
        np.testing.assert_array_equal(rows[:, 1], np.tile(grid.kd_values(), 3))
        np.testing.assert_array_equal(rows[:, 2], result.error_surface.ravel())

    def test_summary_roundtrip(self, tmp_path):
        result = grid_match(
            reference_curve(17.0, 0.4), ActuatorParams(**KNEE), GainGrid(), BAND
        )
        path = tmp_path / "summary.json"
        write_summary(result, path)
        gains = read_summary_gains(path)
        assert gains == result.best_gains

    def test_malformed_summary(self, tmp_path):
        path = tmp_path / "summary.json"
        path.write_text(json.dumps({"mode": "analytic"}))
        with pytest.raises(ValidationError, match="not a match summary"):
            read_summary_gains(path)

    def test_ranges_document_shape(self):
        ranges = derive_ranges(KNEE_LEGS, margin_factor=1.0)
        doc = ranges_dict(ranges, uncovered={"kp": [], "kd": [0.516]})
        assert doc["kp"] == {"nominal": 22.0, "half_range": 0.5}
        assert doc["uncovered"]["kd"] == [0.516]
        assert set(doc["domain_randomization"]) == set(DomainRandomization().bounds)
