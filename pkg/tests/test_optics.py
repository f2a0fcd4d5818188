"""Physical-optics layer: geometry, detector positions, far-field sampling."""

import numpy as np
import pytest

from qptycho.hilbert import dft_matrix, haar_random_state
from qptycho.optics import (
    PIXEL,
    OpticalGeometry,
    default_geometry,
    detector_positions,
    envelope,
    envelope_bias,
    far_field_intensity,
    measurement_probabilities,
    mu_indices,
    near_field_intensity,
    sample_at_detectors,
)


def test_geometry_validation():
    with pytest.raises(ValueError):
        OpticalGeometry(0.0, 0.3, 1e-4, 5e-5, 4)
    with pytest.raises(ValueError):
        OpticalGeometry(687e-9, 0.3, 1e-4, 2e-4, 4)  # slit wider than pitch
    with pytest.raises(ValueError):
        OpticalGeometry(687e-9, 0.3, 1e-4, 5e-5, 1)


def test_default_geometry_regimes():
    small = default_geometry(10)
    big = default_geometry(25)
    assert small.pitch == pytest.approx(22 * PIXEL)
    assert small.slit_width == pytest.approx(11 * PIXEL)
    assert big.pitch == pytest.approx(14 * PIXEL)
    assert big.slit_width == pytest.approx(9 * PIXEL)
    assert small.wavelength == 687e-9
    assert small.focal_length == 0.30


def test_mu_indices_centered_ordering():
    assert np.array_equal(mu_indices(6), [0, 1, 2, 3, -2, -1])
    assert np.array_equal(mu_indices(5), [0, 1, 2, -2, -1])


def test_detector_positions_formula():
    geom = default_geometry(6)
    layout = detector_positions(geom)
    expected = -geom.wavelength * geom.focal_length * layout.mu / (geom.pitch * 6)
    assert np.allclose(layout.positions, expected, atol=0.0)
    assert layout.positions[0] == 0.0


def test_envelope_peak_and_zeros():
    geom = default_geometry(8)
    assert envelope(geom, 0.0) == pytest.approx(1.0)
    # first zero at x = lambda f / a
    x0 = geom.wavelength * geom.focal_length / geom.slit_width
    assert envelope(geom, x0) == pytest.approx(0.0, abs=1e-20)
    assert float(envelope(geom, x0 / 2)) < 1.0


@pytest.mark.parametrize("d", [3, 5, 8, 16, 32])
def test_detector_sampling_equals_dft_probabilities(d):
    geom = default_geometry(d)
    rng = np.random.default_rng(d)
    F = dft_matrix(d)
    for _ in range(20):
        psi = haar_random_state(d, rng)
        samples = sample_at_detectors(psi, geom, envelope_on=False)
        assert np.allclose(samples, np.abs(F @ psi) ** 2, atol=1e-10)


@pytest.mark.parametrize("d", [4, 7, 12])
def test_measurement_probabilities_match_inverse_dft(d):
    geom = default_geometry(d)
    rng = np.random.default_rng(100 + d)
    Fh = dft_matrix(d).conj().T
    for _ in range(20):
        psi = haar_random_state(d, rng)
        probs = measurement_probabilities(psi, geom, envelope_on=False)
        assert np.allclose(probs, np.abs(Fh @ psi) ** 2, atol=1e-10)


def test_measurement_probabilities_envelope_weighting_is_even():
    # the index flip k -> -k mod d must not change the envelope weight
    d = 9
    geom = default_geometry(d)
    psi = haar_random_state(d, np.random.default_rng(5))
    ideal = measurement_probabilities(psi, geom, envelope_on=False)
    weighted = measurement_probabilities(psi, geom, envelope_on=True)
    env = envelope(geom, detector_positions(geom).positions)
    expected = ideal * env[(-np.arange(d)) % d]
    assert np.allclose(weighted, expected, atol=1e-14)
    # detectors at +x and -x carry the same envelope factor
    flip = env[(-np.arange(d)) % d]
    assert np.allclose(flip, env, atol=1e-14)


def test_far_field_intensity_is_envelope_times_interference():
    d = 6
    geom = default_geometry(d)
    psi = haar_random_state(d, np.random.default_rng(2))
    x = np.linspace(-1e-3, 1e-3, 101)
    total = far_field_intensity(psi, geom, x)
    assert np.all(total >= 0)
    assert np.all(total <= envelope(geom, x) * d + 1e-12)
    # flat state at x = 0: constructive interference of all d slits
    flat = np.full(d, 1 / np.sqrt(d))
    assert far_field_intensity(flat, geom, 0.0) == pytest.approx(d, abs=1e-10)


def test_near_field_intensity_top_hat_profile():
    d = 4
    geom = default_geometry(d)
    psi = np.array([0.8, 0.0, 0.6, 0.0], dtype=complex)
    # slit centers
    centers = np.arange(d) * geom.pitch
    assert np.allclose(near_field_intensity(psi, geom, centers), np.abs(psi) ** 2)
    # gaps are dark
    gaps = centers[:-1] + geom.pitch / 2
    assert np.allclose(near_field_intensity(psi, geom, gaps), 0.0)


def test_envelope_bias_bounds():
    for d in (5, 16, 40):
        bias = envelope_bias(default_geometry(d))
        assert 0.0 < bias <= 1.0
    # wider slits relative to the pitch mean stronger roll-off at the array edge
    tight = OpticalGeometry(687e-9, 0.3, 112e-6, 100e-6, 16)
    loose = OpticalGeometry(687e-9, 0.3, 112e-6, 20e-6, 16)
    assert envelope_bias(tight) < envelope_bias(loose)
