"""Core state-space primitives: state vectors, density matrices, the discrete
Fourier transform, Haar-random sampling, fidelity and purity.

States are plain 1-D complex128 numpy arrays over the computational basis;
density matrices are 2-D complex128 arrays. All functions are pure and take
any random source explicitly.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

NORM_ATOL = 1e-12


@lru_cache(maxsize=None)
def dft_matrix(d: int) -> np.ndarray:
    """Unitary DFT matrix F with F[j, k] = exp(+2*pi*i*j*k/d) / sqrt(d).

    The + sign is the package-wide convention: sampling the Fraunhofer far
    field at the canonical detector positions reproduces (F @ psi) exactly
    (see the optics module).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    j = np.arange(d)
    F = np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)
    F.setflags(write=False)
    return F


def as_state(amplitudes, dim: int | None = None) -> np.ndarray:
    """Coerce input to a 1-D complex128 state array, checking the dimension."""
    psi = np.asarray(amplitudes, dtype=np.complex128)
    if psi.ndim != 1:
        raise ValueError(f"state must be a 1-D vector, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise ValueError(f"state has dim {psi.shape[0]}, expected {dim}")
    return psi


def is_normalized(psi: np.ndarray, atol: float = NORM_ATOL) -> bool:
    return abs(float(np.sum(np.abs(psi) ** 2)) - 1.0) <= atol


def normalize(psi: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(psi)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return psi / nrm


def haar_random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a normalized d-dimensional pure state from the Haar measure.

    I.i.d. standard complex Gaussian entries followed by normalization; the
    result is the first column of a Haar-random unitary in distribution.
    """
    if d < 2:
        raise ValueError(f"haar_random_state requires d >= 2, got {d}")
    z = rng.standard_normal(2 * d)
    psi = z[:d] + 1j * z[d:]
    return psi / np.linalg.norm(psi)


def qft(psi: np.ndarray) -> np.ndarray:
    """Apply the quantum Fourier transform F (sign convention +2*pi*i*j*k/d)."""
    psi = as_state(psi)
    return dft_matrix(psi.shape[0]) @ psi


def qft_inverse(psi: np.ndarray) -> np.ndarray:
    """Apply the adjoint transform; qft_inverse(qft(psi)) == psi."""
    psi = as_state(psi)
    return dft_matrix(psi.shape[0]).conj().T @ psi


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Squared overlap |<a|b>|^2; invariant under global phase of either state."""
    a = as_state(a)
    b = as_state(b, dim=a.shape[0])
    return float(np.abs(np.vdot(a, b)) ** 2)


def check_density_matrix(rho: np.ndarray, atol: float = NORM_ATOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}, expected 1")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {eigs.min()}")
    return rho


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2); 1 for pure states, 1/d for the maximally mixed state."""
    rho = check_density_matrix(rho)
    return float(np.trace(rho @ rho).real)


def mix_with_white_noise(psi: np.ndarray, p: float) -> np.ndarray:
    """rho = p |psi><psi| + (1 - p) I/d.

    Closed-form purity: p^2 + 2 p (1-p)/d + (1-p)^2 / d.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight p must lie in [0, 1], got {p}")
    psi = as_state(psi)
    if not is_normalized(psi):
        raise ValueError("psi must be normalized")
    d = psi.shape[0]
    return p * np.outer(psi, psi.conj()) + (1.0 - p) * np.eye(d) / d


def white_noise_purity(p: float, d: int) -> float:
    """Purity of mix_with_white_noise(psi, p) for any normalized psi."""
    return p**2 + 2.0 * p * (1.0 - p) / d + (1.0 - p) ** 2 / d


def weight_for_purity(target_purity: float, d: int) -> float:
    """Invert white_noise_purity: the p giving the requested purity at dim d."""
    if not 1.0 / d <= target_purity <= 1.0:
        raise ValueError(f"purity must lie in [1/d, 1], got {target_purity}")
    # purity = p^2 (1 - 2/d + 1/d) + (2/d - 2/d) p ... expand:
    # u = p^2 (1 - 1/d) + 1/d  (the cross and square terms in 1/d collapse)
    # since 2p(1-p)/d + (1-p)^2/d = (1 - p^2)/d.
    return float(np.sqrt((target_purity - 1.0 / d) / (1.0 - 1.0 / d)))
