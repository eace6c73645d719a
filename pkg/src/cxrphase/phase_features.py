"""Monogenic signal responses and their reduction to local-phase feature maps.

Per scale, the monogenic triple of an image is the bandpassed image (even
part, m1) and the two Riesz transforms of that bandpassed image (odd parts,
m2 and m3). Across scales these reduce to

* lwpa -- local weighted mean phase angle,
  arctan(sum_i m1_i / sqrt(sum_i m2_i**2 + sum_i m3_i**2 + guard**2)).
  The odd Riesz pair sits under the radical; this keeps the angle consistent
  with the even/odd split used by the energy map below. No noise threshold
  is applied: the guard exists only to make 0/0 read as 0.
* lpe -- local phase energy, (sum_i [|m1_i| - sqrt(m2_i**2 + m3_i**2)]) * lwpa
  with the radical evaluated per scale, clamped at zero from below.

lwpa is invariant under positive rescaling of the input (the guard is chosen
relative to the image's own odd energy); the energy factor of lpe is
homogeneous of degree one in the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralBank, SpectralError, crop_quadrant, fft_forward, fft_inverse, mirror_double

__all__ = [
    "MonogenicResponse",
    "PhaseFeatures",
    "GUARD_SCALE",
    "compute_monogenic",
    "compute_lwpa",
    "compute_lpe",
    "phase_energy_factor",
    "odd_energy",
    "relative_guard",
]

# Default ratio between the division guard and the image's peak odd energy.
GUARD_SCALE = 1e-6


@dataclass(frozen=True)
class PhaseFeatures:
    """The three local-phase maps of one image plus their 3-channel composite.

    ``lwpa`` is in radians, ``lpe`` in raw energy units; ``elea`` and the
    channels of ``mf`` (ordered [lwpa, lpe, elea]) are min-max normalized
    to [0, 1].
    """

    lwpa: np.ndarray = field(repr=False)
    lpe: np.ndarray = field(repr=False)
    elea: np.ndarray = field(repr=False)
    mf: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class MonogenicResponse:
    """Even/odd filter responses of one scale: m1 bandpass, m2/m3 Riesz."""

    m1: np.ndarray = field(repr=False)
    m2: np.ndarray = field(repr=False)
    m3: np.ndarray = field(repr=False)
    scale_index: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.m1.shape


def compute_monogenic(img: np.ndarray, bank: SpectralBank) -> list[MonogenicResponse]:
    """Per-scale monogenic responses of a gray image.

    The bank may be built either at the image shape (plain circular
    filtering) or at the mirror-doubled shape, in which case the image is
    reflection-padded before filtering and the responses cropped back to the
    input shape.
    """
    img = np.asarray(img, dtype=np.float64)
    shape = img.shape
    padded = bank.shape != shape
    if padded:
        doubled = (2 * shape[0], 2 * shape[1])
        if bank.shape != doubled:
            raise SpectralError(
                f"bank shape {bank.shape} matches neither image {shape} nor mirror-doubled {doubled}"
            )
        img = mirror_double(img)

    spectrum = fft_forward(img)
    responses = []
    for i, bp in enumerate(bank.bandpass):
        even_spec = spectrum * bp
        m1 = fft_inverse(even_spec)
        m2 = fft_inverse(even_spec * bank.riesz1)
        m3 = fft_inverse(even_spec * bank.riesz2)
        if padded:
            m1 = crop_quadrant(m1, shape)
            m2 = crop_quadrant(m2, shape)
            m3 = crop_quadrant(m3, shape)
        responses.append(MonogenicResponse(m1=m1, m2=m2, m3=m3, scale_index=i))
    return responses


def odd_energy(responses: list[MonogenicResponse]) -> np.ndarray:
    """Pointwise multi-scale odd energy sum_i (m2_i**2 + m3_i**2)."""
    acc = np.zeros(responses[0].shape)
    for r in responses:
        acc += r.m2 * r.m2 + r.m3 * r.m3
    return acc


def relative_guard(responses: list[MonogenicResponse], scale: float = GUARD_SCALE) -> float:
    """Division guard proportional to the image's own peak odd amplitude.

    Scaling the input by c > 0 scales the guard by c as well, which makes the
    phase angle exactly invariant under intensity rescaling. Falls back to a
    tiny absolute value for identically zero responses.
    """
    peak = float(np.sqrt(odd_energy(responses).max()))
    if peak > 0.0:
        return scale * peak
    return np.finfo(np.float64).tiny


def compute_lwpa(responses: list[MonogenicResponse], guard: float | None = None) -> np.ndarray:
    """Local weighted mean phase angle across scales, in (-pi/2, pi/2).

    ``guard`` is an absolute amplitude; when omitted it is derived from the
    responses via ``relative_guard``.
    """
    if not responses:
        raise ValueError("need at least one scale")
    if guard is None:
        guard = relative_guard(responses)
    even = np.zeros(responses[0].shape)
    for r in responses:
        even += r.m1
    denom = np.sqrt(odd_energy(responses) + guard * guard)
    out = np.zeros_like(even)
    np.divide(even, denom, out=out, where=denom > 0.0)
    return np.arctan(out)


def phase_energy_factor(responses: list[MonogenicResponse]) -> np.ndarray:
    """Multi-scale even-minus-odd energy sum_i [|m1_i| - sqrt(m2_i**2 + m3_i**2)].

    The radical is evaluated per scale inside the sum, so each response
    vector contributes its own odd magnitude. Homogeneous of degree one in
    the input image; sign-indefinite (odd-dominant structure goes negative).
    """
    acc = np.zeros(responses[0].shape)
    for r in responses:
        acc += np.abs(r.m1) - np.hypot(r.m2, r.m3)
    return acc


def compute_lpe(responses: list[MonogenicResponse], lwpa: np.ndarray) -> np.ndarray:
    """Local phase energy: the energy factor weighted by lwpa, clamped at zero.

    The signed angle is used as the weight; pixels where odd-dominant
    structure or a negative angle drives the product below zero are clamped,
    so the map is nonnegative and vanishes wherever total energy vanishes.
    """
    if not responses:
        raise ValueError("need at least one scale")
    if lwpa.shape != responses[0].shape:
        raise ValueError(f"lwpa shape {lwpa.shape} != response shape {responses[0].shape}")
    return np.maximum(phase_energy_factor(responses) * lwpa, 0.0)
