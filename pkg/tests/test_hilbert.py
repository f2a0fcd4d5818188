"""State-space primitives: DFT convention, Haar sampling, fidelity, purity."""

import numpy as np
import pytest

from qptycho.hilbert import (
    as_state,
    check_density_matrix,
    dft_matrix,
    fidelity,
    haar_random_state,
    is_normalized,
    mix_with_white_noise,
    normalize,
    purity,
    qft,
    qft_inverse,
    weight_for_purity,
    white_noise_purity,
)


@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 16, 32, 64])
def test_dft_matrix_is_unitary(d):
    F = dft_matrix(d)
    assert np.allclose(F @ F.conj().T, np.eye(d), atol=1e-12)


def test_dft_matrix_sign_convention():
    # F[j, k] = exp(+2*pi*i*j*k/d) / sqrt(d): entry (1, 1) at d=4 is +i/2
    F = dft_matrix(4)
    assert F[1, 1] == pytest.approx(0.5j, abs=1e-15)
    assert F[1, 3] == pytest.approx(-0.5j, abs=1e-15)


def test_dft_matrix_is_cached_and_readonly():
    F = dft_matrix(6)
    assert F is dft_matrix(6)
    with pytest.raises(ValueError):
        F[0, 0] = 0.0


def test_dft_matrix_rejects_bad_dim():
    with pytest.raises(ValueError):
        dft_matrix(0)


@pytest.mark.parametrize("d", [2, 3, 7, 16])
def test_qft_roundtrip(d):
    rng = np.random.default_rng(d)
    psi = haar_random_state(d, rng)
    assert np.allclose(qft_inverse(qft(psi)), psi, atol=1e-12)
    assert np.allclose(qft(qft_inverse(psi)), psi, atol=1e-12)


def test_qft_preserves_norm():
    rng = np.random.default_rng(0)
    for _ in range(20):
        psi = haar_random_state(9, rng)
        assert is_normalized(qft(psi))


def test_qft_of_basis_state_is_flat():
    e0 = np.zeros(5, dtype=complex)
    e0[0] = 1.0
    assert np.allclose(qft(e0), np.full(5, 1 / np.sqrt(5)), atol=1e-14)


def test_as_state_checks_shape_and_dim():
    with pytest.raises(ValueError):
        as_state(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        as_state(np.zeros(3), dim=4)
    psi = as_state([1, 0], dim=2)
    assert psi.dtype == np.complex128


def test_normalize():
    psi = normalize(np.array([3.0, 4.0j]))
    assert is_normalized(psi)
    with pytest.raises(ValueError):
        normalize(np.zeros(3))


@pytest.mark.parametrize("d", [2, 4, 10, 32])
def test_haar_random_state_is_normalized(d):
    rng = np.random.default_rng(42)
    for _ in range(50):
        assert is_normalized(haar_random_state(d, rng))


def test_haar_random_state_rejects_d1():
    with pytest.raises(ValueError):
        haar_random_state(1, np.random.default_rng(0))


def test_haar_mean_component_weight_is_uniform():
    # E |c_k|^2 = 1/d under the Haar measure
    rng = np.random.default_rng(7)
    d, trials = 6, 4000
    acc = np.zeros(d)
    for _ in range(trials):
        acc += np.abs(haar_random_state(d, rng)) ** 2
    assert np.allclose(acc / trials, 1 / d, atol=0.01)


def test_fidelity_properties():
    rng = np.random.default_rng(3)
    a = haar_random_state(5, rng)
    b = haar_random_state(5, rng)
    assert fidelity(a, a) == pytest.approx(1.0, abs=1e-12)
    assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-12)
    assert 0.0 <= fidelity(a, b) <= 1.0
    # invariant under global phase
    assert fidelity(a, np.exp(0.7j) * b) == pytest.approx(fidelity(a, b), abs=1e-12)


def test_fidelity_orthogonal_states():
    e0 = np.array([1, 0, 0], dtype=complex)
    e1 = np.array([0, 1, 0], dtype=complex)
    assert fidelity(e0, e1) == pytest.approx(0.0, abs=1e-15)


def test_check_density_matrix_rejects_bad_inputs():
    with pytest.raises(ValueError):
        check_density_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        check_density_matrix(np.array([[0.5, 0.5], [0.1, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        check_density_matrix(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        check_density_matrix(np.diag([1.5, -0.5]))  # negative eigenvalue


def test_purity_extremes():
    psi = haar_random_state(4, np.random.default_rng(1))
    assert purity(np.outer(psi, psi.conj())) == pytest.approx(1.0, abs=1e-12)
    assert purity(np.eye(4) / 4) == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("p", [0.0, 0.3, 0.9, 1.0])
def test_white_noise_purity_matches_constructed_mixture(p):
    d = 6
    psi = haar_random_state(d, np.random.default_rng(5))
    rho = mix_with_white_noise(psi, p)
    assert purity(rho) == pytest.approx(white_noise_purity(p, d), abs=1e-12)


def test_mix_with_white_noise_validates():
    psi = haar_random_state(3, np.random.default_rng(0))
    with pytest.raises(ValueError):
        mix_with_white_noise(psi, 1.5)
    with pytest.raises(ValueError):
        mix_with_white_noise(2 * psi, 0.5)


@pytest.mark.parametrize("d", [3, 6, 17])
@pytest.mark.parametrize("target", [0.5, 0.9, 0.95, 1.0])
def test_weight_for_purity_inverts_white_noise_purity(d, target):
    if target < 1 / d:
        pytest.skip("below the maximally-mixed floor")
    p = weight_for_purity(target, d)
    assert white_noise_purity(p, d) == pytest.approx(target, abs=1e-12)


def test_weight_for_purity_rejects_out_of_range():
    with pytest.raises(ValueError):
        weight_for_purity(0.05, 6)  # below 1/d
    with pytest.raises(ValueError):
        weight_for_purity(1.1, 6)
