"""Transmit waveforms: mean-keyed Gaussian noise blocks and reference schemes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .mathcore import DomainError, RngStream

DEFAULT_MEAN = math.sqrt(0.5)
DEFAULT_SIGMA_X2 = 1.0


@dataclass(frozen=True)
class NoiseModParams:
    """Gaussian noise block whose mean is ``-mean_mag`` (bit 0) or ``+mean_mag`` (bit 1)."""

    mean_mag: float = DEFAULT_MEAN
    sigma_x2: float = DEFAULT_SIGMA_X2
    n_info: int = 90
    n_energy: int = 60

    def __post_init__(self):
        if not (self.mean_mag > 0 and math.isfinite(self.mean_mag)):
            raise DomainError(f"mean magnitude must be positive, got {self.mean_mag}")
        if not (self.sigma_x2 >= 0 and math.isfinite(self.sigma_x2)):
            raise DomainError(f"sample variance must be non-negative, got {self.sigma_x2}")
        if int(self.n_info) != self.n_info or self.n_info < 1:
            raise DomainError(f"n_info must be a positive integer, got {self.n_info}")
        if int(self.n_energy) != self.n_energy or self.n_energy < 0:
            raise DomainError(f"n_energy must be a non-negative integer, got {self.n_energy}")

    @property
    def sample_power(self) -> float:
        """Per-sample transmit power ``m**2 + sigma_x2`` (same for both bits)."""
        return self.mean_mag**2 + self.sigma_x2

    def normalized(self) -> "NoiseModParams":
        """Same mean/variance ratio rescaled to unit per-sample power."""
        p = self.sample_power
        return NoiseModParams(
            mean_mag=self.mean_mag / math.sqrt(p),
            sigma_x2=self.sigma_x2 / p,
            n_info=self.n_info,
            n_energy=self.n_energy,
        )


class BaselineScheme(enum.Enum):
    BPSK = "BPSK"
    PSK16 = "PSK16"
    QAM16 = "QAM16"
    RG = "RG"
    CSCG = "CSCG"


def _qam16_points():
    levels = np.array([-3.0, -1.0, 1.0, 3.0])
    pts = (levels[:, None] + 1j * levels[None, :]).ravel()
    return pts / math.sqrt(10.0)


_CONSTELLATIONS = {
    BaselineScheme.BPSK: np.array([1.0 + 0j, -1.0 + 0j]),
    BaselineScheme.PSK16: np.exp(2j * np.pi * np.arange(16) / 16),
    BaselineScheme.QAM16: _qam16_points(),
}


def constellation(scheme: BaselineScheme) -> np.ndarray:
    """Unit-average-power points of a linear scheme (a copy)."""
    try:
        return _CONSTELLATIONS[scheme].copy()
    except KeyError:
        raise DomainError(f"{scheme} has no finite constellation") from None


def noisemod_modulate(bit, count: int, params: NoiseModParams, rng: RngStream):
    """Draw ``count`` real samples ``N(+-m, sigma_x2)`` per bit.

    ``bit`` may be a scalar or an array of bits; the result has shape
    ``np.shape(bit) + (count,)``.
    """
    bits = np.asarray(bit)
    if not np.all((bits == 0) | (bits == 1)):
        raise DomainError(f"bits must be 0 or 1, got {bit!r}")
    if int(count) != count or count < 1:
        raise DomainError(f"count must be a positive integer, got {count}")
    mean = np.where(bits == 1, params.mean_mag, -params.mean_mag)[..., np.newaxis]
    z = rng.standard_normal(bits.shape + (int(count),))
    return mean + math.sqrt(params.sigma_x2) * z


def baseline_modulate(scheme: BaselineScheme, count, rng: RngStream):
    """Unit-power i.i.d. symbols of a reference scheme, one sample per symbol.

    ``count`` is an int or a shape tuple. RG is real N(0, 1) cast to complex;
    CSCG is CN(0, 1).
    """
    scheme = BaselineScheme(scheme)
    shape = (count,) if np.isscalar(count) else tuple(count)
    if any(int(c) != c or c < 1 for c in shape):
        raise DomainError(f"count must be positive, got {count}")
    if scheme is BaselineScheme.RG:
        return rng.standard_normal(shape).astype(complex)
    if scheme is BaselineScheme.CSCG:
        re = rng.standard_normal(shape)
        im = rng.standard_normal(shape)
        return (re + 1j * im) / math.sqrt(2.0)
    pts = _CONSTELLATIONS[scheme]
    return pts[rng.integers(len(pts), size=shape)]


def theoretical_moments(source) -> tuple[float, float]:
    """Exact ``(E|x|^2, E|x|^4)`` for a scheme or a NoiseMod parameter set."""
    if isinstance(source, NoiseModParams):
        mu2 = source.mean_mag**2
        s2 = source.sigma_x2
        return mu2 + s2, mu2**2 + 6.0 * mu2 * s2 + 3.0 * s2**2
    scheme = BaselineScheme(source)
    if scheme is BaselineScheme.RG:
        return 1.0, 3.0
    if scheme is BaselineScheme.CSCG:
        return 1.0, 2.0
    if scheme is BaselineScheme.QAM16:
        # unnormalised |x|^2 is 2, 10, 18 w.p. 1/4, 1/2, 1/4: mean 10, E|x|^4 132
        return 1.0, 1.32
    return 1.0, 1.0  # BPSK and 16-PSK are constant envelope
