"""Frequency-domain machinery: FFTs, frequency grids, bandpass and Riesz filters.

All filtering is done by pointwise multiplication of an unnormalized forward
DFT with precomputed frequency responses. The bandpass bank uses scale-space
derivative kernels B(w) = |w| * exp(-s * |w|**alpha) (unit peak, zero DC) and
the odd filter pair is the Riesz transform H_k(w) = -1j * w_k / |w|.

Spatial filtering with these responses is circular. Callers that need
border-artifact-free responses mirror-double the image first (see
``mirror_double`` / ``crop_quadrant``); the reflected extension is continuous
under the periodic wrap, which suppresses phantom phase edges at the borders.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as _fft

__all__ = [
    "SpectralError",
    "FrequencyGrid",
    "AssdParams",
    "SpectralBank",
    "fft_forward",
    "fft_inverse",
    "build_frequency_grid",
    "build_assd_bank",
    "build_riesz",
    "apply_filter",
    "assd_peak_frequency",
    "mirror_double",
    "crop_quadrant",
]

# Largest imaginary residue tolerated when casting an inverse DFT to a real
# field, relative to the real part. Violations signal a filter that is not
# conjugate-symmetric, i.e. a construction bug.
_ASYMMETRY_TOL = 1e-8


class SpectralError(ValueError):
    """Raised for shape mismatches and symmetry violations."""


@dataclass(frozen=True)
class FrequencyGrid:
    """Angular frequency coordinates for an FFT of the given shape.

    Frequencies are in radians per pixel, in (-pi, pi] per axis, in standard
    FFT bin ordering (DC at bin (0, 0); the Nyquist bin of an even axis maps
    to +pi). omega1 varies along axis 0, omega2 along axis 1.
    """

    height: int
    width: int
    omega1: np.ndarray = field(repr=False)
    omega2: np.ndarray = field(repr=False)
    omega_mag: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


def _axis_freqs(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.where(k <= n // 2, k, k - n) * (2.0 * np.pi / n)


def build_frequency_grid(width: int, height: int) -> FrequencyGrid:
    """Build the deterministic frequency grid for a (height, width) FFT."""
    if width < 8 or height < 8:
        raise SpectralError(f"grid {width}x{height} below 8x8 minimum")
    omega1 = np.broadcast_to(_axis_freqs(height)[:, None], (height, width)).copy()
    omega2 = np.broadcast_to(_axis_freqs(width)[None, :], (height, width)).copy()
    mag = np.hypot(omega1, omega2)
    return FrequencyGrid(height, width, omega1, omega2, mag)


# default finest scale: puts the coarsest of two octave-spaced scales at a
# 25-pixel peak wavelength (see AssdParams.from_coarsest_wavelength)
_DEFAULT_S0 = 625.0 / (16.0 * np.pi**2)


@dataclass(frozen=True)
class AssdParams:
    """Parameters of the scale-space derivative bandpass bank.

    ``s0`` is the finest (smallest) scale; scale i uses
    s_i = s0 * scale_multiplier**i, so larger indices are coarser.
    """

    alpha: float = 2.0
    s0: float = _DEFAULT_S0
    scale_multiplier: float = 2.0
    num_scales: int = 2

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must be in (0, 2], got {self.alpha}")
        if self.s0 <= 0.0:
            raise ValueError(f"s0 must be positive, got {self.s0}")
        if self.scale_multiplier <= 1.0:
            raise ValueError(f"scale_multiplier must exceed 1, got {self.scale_multiplier}")
        if self.num_scales < 1:
            raise ValueError(f"num_scales must be >= 1, got {self.num_scales}")

    def scales(self) -> list[float]:
        return [self.s0 * self.scale_multiplier**i for i in range(self.num_scales)]

    @classmethod
    def from_coarsest_wavelength(
        cls,
        wavelength: float = 25.0,
        alpha: float = 2.0,
        scale_multiplier: float = 2.0,
        num_scales: int = 2,
    ) -> "AssdParams":
        """Choose s0 so the coarsest scale peaks at the given wavelength (pixels)."""
        omega_peak = 2.0 * np.pi / wavelength
        s_coarse = 1.0 / (alpha * omega_peak**alpha)
        s0 = s_coarse / scale_multiplier ** (num_scales - 1)
        return cls(alpha=alpha, s0=s0, scale_multiplier=scale_multiplier, num_scales=num_scales)


def assd_peak_frequency(s: float, alpha: float) -> float:
    """Frequency (rad/pixel) maximizing |w| * exp(-s * |w|**alpha)."""
    return (1.0 / (s * alpha)) ** (1.0 / alpha)


@dataclass(frozen=True)
class SpectralBank:
    """Precomputed frequency responses for one image shape.

    ``bandpass`` holds one real-valued unit-peak response per scale with the
    DC bin forced to zero; ``riesz1``/``riesz2`` are the purely imaginary odd
    pair with |riesz1|**2 + |riesz2|**2 = 1 off DC.
    """

    shape: tuple[int, int]
    bandpass: tuple[np.ndarray, ...]
    riesz1: np.ndarray = field(repr=False)
    riesz2: np.ndarray = field(repr=False)

    @property
    def num_scales(self) -> int:
        return len(self.bandpass)

    @classmethod
    def build(cls, width: int, height: int, params: AssdParams) -> "SpectralBank":
        grid = build_frequency_grid(width, height)
        r1, r2 = build_riesz(grid)
        return cls(
            shape=(height, width),
            bandpass=tuple(build_assd_bank(grid, params)),
            riesz1=r1,
            riesz2=r2,
        )


def build_assd_bank(grid: FrequencyGrid, params: AssdParams) -> list[np.ndarray]:
    """Per-scale bandpass responses |w| * exp(-s_i * |w|**alpha), unit peak, zero DC."""
    mag = grid.omega_mag
    # |w|**alpha is scale-independent; libm pow per bin is the expensive part.
    mag_pow = mag * mag if params.alpha == 2.0 else mag**params.alpha
    responses = []
    for s in params.scales():
        resp = mag * np.exp(-s * mag_pow)
        resp[0, 0] = 0.0
        peak = resp.max()
        if peak <= 0.0:
            raise SpectralError(f"degenerate bandpass response at scale s={s}")
        responses.append(resp / peak)
    return responses


def build_riesz(grid: FrequencyGrid) -> tuple[np.ndarray, np.ndarray]:
    """The odd filter pair -1j * w_k / |w| (both zero at DC)."""
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = -1j * grid.omega1 / grid.omega_mag
        r2 = -1j * grid.omega2 / grid.omega_mag
    r1[0, 0] = 0.0
    r2[0, 0] = 0.0
    return r1, r2


def fft_forward(img: np.ndarray) -> np.ndarray:
    """Unnormalized forward 2-D DFT; the DC bin equals the pixel sum."""
    img = np.asarray(img)
    if not np.isfinite(img).all():
        raise SpectralError("non-finite value in FFT input")
    return _fft.fft2(img)


def fft_inverse(spectrum: np.ndarray) -> np.ndarray:
    """Inverse 2-D DFT (scaled by 1/N) cast to a real field.

    The imaginary residue must not exceed 1e-8 of the real part's magnitude;
    a larger residue means the spectrum was not conjugate-symmetric and is
    reported as a filter-construction bug rather than silently discarded.
    """
    out = _fft.ifft2(np.asarray(spectrum))
    imag_max = np.abs(out.imag).max()
    real_max = np.abs(out.real).max()
    if imag_max > _ASYMMETRY_TOL * real_max:
        raise SpectralError(
            f"inverse FFT imaginary residue {imag_max:.3e} exceeds "
            f"{_ASYMMETRY_TOL:.0e} x max|real| = {_ASYMMETRY_TOL * real_max:.3e}"
        )
    return out.real


def apply_filter(img: np.ndarray, response: np.ndarray) -> np.ndarray:
    """Filter an image with one bank entry by spectral multiplication."""
    img = np.asarray(img)
    if img.shape != response.shape:
        raise SpectralError(f"image shape {img.shape} != response shape {response.shape}")
    return fft_inverse(fft_forward(img) * response)


def mirror_double(img: np.ndarray) -> np.ndarray:
    """Reflect an image to (2H, 2W) so its periodic extension is continuous."""
    img = np.asarray(img)
    return np.pad(img, ((0, img.shape[0]), (0, img.shape[1])), mode="symmetric")


def crop_quadrant(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Crop the top-left quadrant written by ``mirror_double``."""
    return img[: shape[0], : shape[1]]
