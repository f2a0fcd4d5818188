"""Physical-optics layer: slit-array near field, Fraunhofer far field, and the
detector positions at which far-field samples realize the Fourier-basis
measurement.

A d-dimensional state rides on d parallel slits of width `slit_width` and
center-to-center pitch `pitch`. Behind a lens of focal length `focal_length`
the far-field intensity is the single-slit envelope times the interference
term; sampling it (envelope off) at the canonical positions x_j equals
|(F psi)_j|^2 exactly, which fixes the package's +2*pi*i DFT sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hilbert import as_state


@dataclass(frozen=True)
class OpticalGeometry:
    wavelength: float     # meters
    focal_length: float   # meters
    pitch: float          # meters, center-to-center slit separation
    slit_width: float     # meters
    dim: int

    def __post_init__(self):
        for name in ("wavelength", "focal_length", "pitch", "slit_width"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.slit_width >= self.pitch:
            raise ValueError("slit_width must be smaller than the pitch (no overlap)")
        if self.dim < 2:
            raise ValueError("geometry needs dim >= 2")


# SLM with 8 um pixels; slit width/gap of 11/11 pixels below d=20 and 9/5
# pixels at d>=20. Pitch = width + gap (edge-to-edge gap reading).
PIXEL = 8e-6


def default_geometry(d: int, wavelength: float = 687e-9, focal_length: float = 0.30) -> OpticalGeometry:
    if d < 20:
        width_px, gap_px = 11, 11
    else:
        width_px, gap_px = 9, 5
    return OpticalGeometry(
        wavelength=wavelength,
        focal_length=focal_length,
        pitch=(width_px + gap_px) * PIXEL,
        slit_width=width_px * PIXEL,
        dim=d,
    )


@dataclass(frozen=True)
class DetectorLayout:
    positions: np.ndarray   # x_j in meters
    mu: np.ndarray          # centered index map


def mu_indices(d: int) -> np.ndarray:
    """mu_j = j for j <= d/2, else j - d (centered detector ordering)."""
    j = np.arange(d)
    return np.where(j <= d / 2, j, j - d)


def detector_positions(geom: OpticalGeometry) -> DetectorLayout:
    """x_j = -lambda f mu_j / (delta d); detector j postselects Fourier state j."""
    mu = mu_indices(geom.dim)
    x = -geom.wavelength * geom.focal_length * mu / (geom.pitch * geom.dim)
    return DetectorLayout(positions=x, mu=mu)


def _sinc(u):
    """sin(u)/u with sinc(0) = 1 (unnormalized convention)."""
    return np.sinc(np.asarray(u) / np.pi)


def envelope(geom: OpticalGeometry, x) -> np.ndarray:
    """Single-slit intensity envelope sinc^2(pi a x / (lambda f))."""
    u = np.pi * geom.slit_width * np.asarray(x) / (geom.wavelength * geom.focal_length)
    return _sinc(u) ** 2


def _interference(psi: np.ndarray, geom: OpticalGeometry, x: np.ndarray) -> np.ndarray:
    """|sum_k c_k exp(-2 pi i k delta x / (lambda f))|^2 (multi-slit term)."""
    k = np.arange(geom.dim)
    phase = np.exp(
        -2j * np.pi * np.multiply.outer(x, k) * geom.pitch / (geom.wavelength * geom.focal_length)
    )
    return np.abs(phase @ psi) ** 2


def far_field_intensity(psi: np.ndarray, geom: OpticalGeometry, x) -> np.ndarray:
    """Fraunhofer intensity at transverse position(s) x in the focal plane.

    I(x) = sinc^2(pi a x / (lambda f)) * |sum_k c_k exp(-2 pi i k delta x / (lambda f))|^2
    """
    psi = as_state(psi, dim=geom.dim)
    x = np.asarray(x, dtype=float)
    return envelope(geom, x) * _interference(psi, geom, x)


def near_field_intensity(psi: np.ndarray, geom: OpticalGeometry, x) -> np.ndarray:
    """Top-hat slit profile: |c_k|^2 inside slit k (centered at k * pitch), 0 between."""
    psi = as_state(psi, dim=geom.dim)
    x = np.asarray(x, dtype=float)
    k = np.arange(geom.dim)
    inside = np.abs(np.subtract.outer(x, k * geom.pitch)) <= geom.slit_width / 2
    return inside @ (np.abs(psi) ** 2)


def sample_at_detectors(
    psi: np.ndarray, geom: OpticalGeometry, envelope_on: bool = False
) -> np.ndarray:
    """Far-field intensities at the d canonical detector positions.

    Envelope off: exactly |(F psi)_j|^2 — the Fourier-basis probabilities.
    Envelope on: each sample additionally weighted by the single-slit factor,
    emulating raw (uncorrected) camera pixels.
    """
    psi = as_state(psi, dim=geom.dim)
    layout = detector_positions(geom)
    values = _interference(psi, geom, layout.positions) / geom.dim
    if envelope_on:
        values = values * envelope(geom, layout.positions)
    return values


def measurement_probabilities(
    psi: np.ndarray, geom: OpticalGeometry, envelope_on: bool = False
) -> np.ndarray:
    """Detector samples reindexed to measurement-basis ordering.

    Under the exp(-2*pi*i k delta x / (lambda f)) Fraunhofer kernel, the
    detector at x_j records the Fourier component of spatial frequency -j, so
    the probability of postselecting Fourier-basis state k is the sample at
    detector (-k) mod d. The envelope weight is unchanged by the flip
    (x_{-k mod d} = -x_k and the envelope is even in x).
    """
    samples = sample_at_detectors(psi, geom, envelope_on=envelope_on)
    d = geom.dim
    return samples[(-np.arange(d)) % d]


def envelope_bias(geom: OpticalGeometry) -> float:
    """min/max envelope ratio across the detector array (1 = no bias)."""
    env = envelope(geom, detector_positions(geom).positions)
    return float(env.min() / env.max())
