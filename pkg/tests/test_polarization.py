import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aonnqst.polarization import (
    ANTIDIAGONAL,
    DIAGONAL,
    H,
    SIGMA_MINUS,
    SIGMA_PLUS,
    V,
    JonesVector,
    Waveplate,
    hwp,
    measure_unit,
    measure_xyz,
    pbs_split,
    prepare_state,
    qwp,
    retarder_matrix,
    stokes,
    theta_from_stokes,
    waveplate_matrix,
)
from aonnqst.quantum import expectation


def same_ray(a, b, tol=1e-12):
    """Equality up to a global phase."""
    return abs(abs(np.vdot(a, b)) - 1) < tol


def test_retarder_form():
    # R(-a) diag(1, e^{-iG}) R(a), R(a) = [[c, s], [-s, c]]
    a, g = 0.3, 1.1
    c, s = np.cos(a), np.sin(a)
    r = np.array([[c, s], [-s, c]])
    want = r.T @ np.diag([1, np.exp(-1j * g)]) @ r
    np.testing.assert_allclose(retarder_matrix(g, a), want, atol=1e-15)


def test_waveplates_unitary_on_angle_grid():
    for kind in ("half", "quarter"):
        for a in np.linspace(-np.pi, np.pi, 721):
            u = waveplate_matrix(Waveplate(kind, a))
            np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)


def test_waveplate_kind_validated():
    with pytest.raises(ValueError):
        Waveplate("full", 0.0)
    assert Waveplate("quarter", 0).retardance == pytest.approx(np.pi / 2)


def test_hand_jones_examples():
    assert same_ray(hwp(0) @ H, H)
    assert same_ray(hwp(np.pi / 4) @ H, V)
    circ = JonesVector(qwp(np.pi / 4) @ H)
    assert abs(stokes(circ).optical[2]) == pytest.approx(1, abs=1e-12)


@given(st.floats(-np.pi, np.pi))
def test_two_equal_half_wave_plates_cancel(a):
    m = hwp(a) @ hwp(a)
    assert abs(abs(m[0, 0]) - 1) < 1e-12
    np.testing.assert_allclose(m / m[0, 0], np.eye(2), atol=1e-12)


def test_stokes_pole_and_reference_states():
    assert stokes(JonesVector(H)).s3 == pytest.approx(1)
    assert stokes(JonesVector(DIAGONAL)).s1 == pytest.approx(1)
    assert stokes(JonesVector(ANTIDIAGONAL)).s1 == pytest.approx(-1)
    for circ in (SIGMA_PLUS, SIGMA_MINUS):
        st_ = stokes(JonesVector(circ))
        assert abs(st_.s2) == pytest.approx(1)
        assert abs(st_.optical[2]) == pytest.approx(1)


def test_optical_view_orders_h_d_r():
    st_ = stokes(JonesVector(H))
    np.testing.assert_allclose(st_.optical, [1, 0, 0], atol=1e-15)


def test_prepare_state_stokes_over_dense_grid():
    for theta in np.linspace(0, np.pi / 2, 1000):
        s = stokes(prepare_state(theta)).as_array()
        np.testing.assert_allclose(s, [np.cos(theta), np.sin(theta), 0], atol=1e-12, rtol=0)
        assert theta_from_stokes(stokes(prepare_state(theta))) == pytest.approx(theta, abs=1e-10)


def test_prepare_state_endpoints_and_worked_example():
    np.testing.assert_allclose(stokes(prepare_state(0)).as_array(), [1, 0, 0], atol=1e-12)
    np.testing.assert_allclose(stokes(prepare_state(np.pi / 2)).as_array(), [0, 1, 0], atol=1e-12)
    np.testing.assert_allclose(measure_xyz(prepare_state(1.1152)), [0.440, 0.898, 0.0], atol=5e-4)
    assert same_ray(prepare_state(0).field, DIAGONAL)


def test_prepared_state_is_the_phase_state():
    theta = 0.8
    want = np.array([1, np.exp(1j * theta)]) / np.sqrt(2)
    assert same_ray(prepare_state(theta).field, want)


def test_measurement_unit_examples():
    assert measure_unit(JonesVector(H), "Z") == pytest.approx(1)
    assert measure_unit(JonesVector(DIAGONAL), "X") == pytest.approx(1)
    for theta in np.linspace(0, np.pi / 2, 50):
        assert measure_unit(prepare_state(theta), "Y") == pytest.approx(np.sin(theta), abs=1e-12)
    with pytest.raises(ValueError):
        measure_unit(JonesVector(H), "W")


def test_measurement_units_agree_with_pauli_expectations():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        s = JonesVector(rng.normal(size=2) + 1j * rng.normal(size=2))
        q = s.to_state()
        got = measure_xyz(s)
        want = [expectation(q, lab) for lab in "XYZ"]
        np.testing.assert_allclose(got, want, atol=1e-12, rtol=0)
        np.testing.assert_allclose(stokes(s).as_array(), want, atol=1e-12, rtol=0)


def test_stokes_unit_norm():
    rng = np.random.default_rng(6)
    for _ in range(100):
        s = JonesVector(rng.normal(size=2) + 1j * rng.normal(size=2))
        assert np.linalg.norm(stokes(s).as_array()) == pytest.approx(1, abs=1e-12)


def test_finite_extinction_shrinks_contrast():
    s = JonesVector(H)
    assert pbs_split(s) == (1.0, 0.0)
    assert measure_unit(s, "Z", extinction=0.01) == pytest.approx(0.98)


def test_jones_vector_validation():
    with pytest.raises(ValueError):
        JonesVector(np.zeros(2))
    with pytest.raises(ValueError):
        JonesVector(np.ones(3))
    assert abs(np.linalg.norm(JonesVector([3, 4j]).field) - 1) < 1e-15
