import warnings

import numpy as np
import pytest
from scipy.special import j0

from aonnqst.holography import (
    GainFieldCamera,
    GswConfig,
    PhaseMask,
    SpotTargets,
    adaptive_feedback_step,
    grating_phase,
    gsw_optimize,
    load_pgm,
    propagate,
    sine_modulation_phase,
    spot_grid,
    spot_report,
    uniform_amplitude,
    uniformity_error,
    zero_order_efficiency,
)

DIMS = (64, 64)


def test_mask_wrapping_and_read_only():
    m = PhaseMask(np.array([[-1e-18, 2 * np.pi, 7.0, -3.0]]))
    assert np.all((m.phase >= 0) & (m.phase < 2 * np.pi))
    with pytest.raises(ValueError):
        m.phase[0, 0] = 1.0
    with pytest.raises(ValueError):
        PhaseMask(np.zeros(4))


def test_infinite_periods_give_flat_mask():
    assert np.all(grating_phase(np.inf, np.inf, (8, 8)).phase == 0)
    with pytest.raises(ValueError):
        grating_phase(0, 4, (8, 8))


def test_grating_peak_follows_shift_theorem():
    out = propagate(grating_phase(8, np.inf, (256, 256)))
    assert np.unravel_index(np.argmax(out), out.shape) == (32, 0)
    out = propagate(grating_phase(np.inf, 16, DIMS))
    assert np.unravel_index(np.argmax(out), out.shape) == (0, 4)


def test_flat_mask_focuses_to_dc_bin():
    out = propagate(PhaseMask(np.zeros(DIMS)))
    assert out[0, 0] == pytest.approx(1.0)
    assert out.sum() == pytest.approx(1.0)


def test_parseval_energy_conservation():
    rng = np.random.default_rng(0)
    amp = rng.uniform(0, 1, DIMS)
    mask = PhaseMask(rng.uniform(0, 2 * np.pi, DIMS))
    assert propagate(mask, amp).sum() == pytest.approx(np.sum(amp**2), rel=1e-9)
    with pytest.raises(ValueError):
        propagate(mask, np.ones((4, 4)))


@pytest.mark.parametrize("m", [0.0, 0.5, 1.0])
def test_zero_order_matches_bessel(m):
    mask = sine_modulation_phase(m, 16, np.inf, (256, 256))
    assert zero_order_efficiency(mask) == pytest.approx(j0(m * np.pi) ** 2, abs=1e-3)


def test_zero_order_tracks_bessel_over_depth():
    # J0(m*pi)^2 falls until its first zero at m = 2.405/pi, then rises again
    ms = np.linspace(0, 1, 21)
    eff = np.array([zero_order_efficiency(sine_modulation_phase(m, 16, 16, DIMS)) for m in ms])
    np.testing.assert_allclose(eff, j0(ms * np.pi) ** 2, atol=1e-3)
    falling = ms <= 2.4048 / np.pi
    assert np.all(np.diff(eff[falling]) < 0)
    assert eff[-1] < eff[10] < eff[0]
    with pytest.raises(ValueError):
        sine_modulation_phase(-0.1, 8, 8, DIMS)


def test_mask_csv_round_trip_is_bit_exact(tmp_path):
    mask = PhaseMask(np.random.default_rng(1).uniform(0, 2 * np.pi, (5, 7)))
    mask.save_csv(tmp_path / "m.csv")
    np.testing.assert_array_equal(PhaseMask.load_csv(tmp_path / "m.csv").phase, mask.phase)


def test_mask_pgm_round_trip(tmp_path):
    mask = PhaseMask(np.random.default_rng(2).uniform(0, 2 * np.pi, (5, 7)))
    mask.save_pgm(tmp_path / "m.pgm")
    gray = load_pgm(tmp_path / "m.pgm")
    assert gray.shape == (5, 7)
    np.testing.assert_array_equal(gray, mask.to_gray16())
    assert (tmp_path / "m.pgm").read_bytes().startswith(b"P5\n7 5\n65535\n")


def test_spot_targets_validation_and_csv(tmp_path):
    t = SpotTargets([(1, 2), (3, 4)], [1.0, 3.0])
    np.testing.assert_allclose(t.intensities, [0.25, 0.75])
    t.to_csv(tmp_path / "t.csv")
    back = SpotTargets.from_csv(tmp_path / "t.csv")
    np.testing.assert_array_equal(back.positions, t.positions)
    np.testing.assert_array_equal(back.intensities, t.intensities)
    with pytest.raises(ValueError):
        SpotTargets([(1, 2), (1, 2)], [1, 1])
    with pytest.raises(ValueError):
        SpotTargets([(1, 2)], [0.0])


def test_feedback_step_arithmetic():
    assert adaptive_feedback_step(np.array([1.0]), np.array([4.0]), np.array([1.0]), 0.5)[0] == pytest.approx(1.5)


def test_feedback_fixed_point_and_contraction():
    g = np.array([0.5, 1.0, 2.0])
    it = np.array([0.2, 0.3, 0.5])
    np.testing.assert_allclose(adaptive_feedback_step(g, it, it, 1.0), g)
    step = adaptive_feedback_step(g, it, it, 0.6)
    assert np.all(np.abs(step - 1) < np.abs(g - 1) + 1e-15)
    np.testing.assert_allclose(adaptive_feedback_step(g, it, it, 1e-9), 1, atol=1e-8)


def test_feedback_validation_and_floor():
    with pytest.raises(ValueError):
        adaptive_feedback_step([1.0], [1.0], [1.0], 0.0)
    with pytest.raises(ValueError):
        GswConfig(a=1.5)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = adaptive_feedback_step(np.ones(2), np.ones(2), np.array([1.0, 0.0]), 1.0)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert np.all(np.isfinite(out))


def test_uniformity_error_definition():
    assert uniformity_error([0.25, 0.25, 0.5], [0.25, 0.25, 0.5]) == 0
    # ratios 0.9, 1.1 around mean 1.0
    assert uniformity_error([0.45, 0.55], [0.5, 0.5]) == pytest.approx(0.1)


def test_single_spot_converges_fast():
    mask, state = gsw_optimize(SpotTargets([(5, 9)], [1.0]), GswConfig(a=1.0), dims=DIMS)
    assert state.converged and state.iteration <= 5
    assert state.efficiency >= 0.9
    out = propagate(mask)
    assert out[5, 9] / out.sum() >= 0.9


def test_twenty_spots_ideal_camera_uniform_and_settles():
    cfg = GswConfig(a=1.0, max_iters=100, tolerance=1e-12, seed=3)
    _, state = gsw_optimize(spot_grid(4, 5), cfg, dims=DIMS)
    hist = np.array(state.history)
    assert hist.min() < 0.01
    tail = hist[cfg.fix_phase_iteration :]
    assert np.all(np.diff(tail) <= 1e-6)


def test_gsw_is_deterministic_per_seed():
    a = gsw_optimize(spot_grid(2, 3), GswConfig(seed=4, max_iters=20), dims=DIMS)
    b = gsw_optimize(spot_grid(2, 3), GswConfig(seed=4, max_iters=20), dims=DIMS)
    np.testing.assert_array_equal(a[0].phase, b[0].phase)
    assert a[1].history == b[1].history


def test_non_converged_run_returns_best_iterate():
    cfg = GswConfig(a=1.0, max_iters=3, tolerance=1e-15)
    _, state = gsw_optimize(spot_grid(4, 5), cfg, dims=DIMS)
    assert not state.converged
    assert state.uniformity == min(state.history)


def test_gain_camera_is_seeded_and_bounded():
    cam = GainFieldCamera.random(DIMS, 0.1, seed=1)
    assert np.all((cam.gain >= 0.9) & (cam.gain <= 1.1))
    np.testing.assert_array_equal(cam.gain, GainFieldCamera.random(DIMS, 0.1, seed=1).gain)


def test_spot_report_columns(tmp_path):
    targets = spot_grid(2, 2)
    _, state = gsw_optimize(targets, GswConfig(max_iters=10), dims=DIMS)
    spot_report(targets, state, tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "u,v,I_t,I_n,ratio" and len(lines) == 5


def test_uniform_amplitude_unit_energy():
    assert np.sum(uniform_amplitude((8, 4)) ** 2) == pytest.approx(1)
