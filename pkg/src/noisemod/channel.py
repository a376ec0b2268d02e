"""Free-space path loss, Rician block fading, AWGN and imperfect CSI."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mathcore import DomainError, RngStream, sample_complex_normal

SPEED_OF_LIGHT = 3e8


@dataclass(frozen=True)
class PathLossParams:
    distance_m: float
    carrier_hz: float = 433e6
    light_speed: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not (self.distance_m > 0 and math.isfinite(self.distance_m)):
            raise DomainError(f"distance must be positive, got {self.distance_m}")
        if not (self.carrier_hz > 0 and math.isfinite(self.carrier_hz)):
            raise DomainError(f"carrier frequency must be positive, got {self.carrier_hz}")
        if not self.light_speed > 0:
            raise DomainError(f"light speed must be positive, got {self.light_speed}")


@dataclass(frozen=True)
class FadingParams:
    k_factor: float = 5.0

    def __post_init__(self):
        if not self.k_factor >= 0:
            raise DomainError(f"Rician K must be non-negative, got {self.k_factor}")


@dataclass(frozen=True)
class ChannelState:
    """One block-fading realisation of the link.

    The effective coefficient ``h = h_bar / sqrt(loss_l)`` stays fixed for
    every sample of the block it is applied to.
    """

    h_bar: complex
    loss_l: float
    sigma_w2: float
    sigma_e2: float = 0.0

    def __post_init__(self):
        if not self.loss_l > 0:
            raise DomainError(f"loss must be positive, got {self.loss_l}")
        if not self.sigma_w2 >= 0:
            raise DomainError(f"noise variance must be non-negative, got {self.sigma_w2}")
        if not self.sigma_e2 >= 0:
            raise DomainError(f"CSI error variance must be non-negative, got {self.sigma_e2}")

    @property
    def h(self) -> complex:
        return complex(self.h_bar) / math.sqrt(self.loss_l)


def path_loss(params: PathLossParams) -> float:
    """Free-space power attenuation ``(4 pi d f_c / c) ** 2`` (linear)."""
    return (4.0 * math.pi * params.distance_m * params.carrier_hz / params.light_speed) ** 2


def rician_shape(k_factor: float) -> tuple[float, float]:
    """Return ``(s, sigma_s)`` for a unit-power Rician envelope with factor K.

    Solves ``s**2 + 2 sigma_s**2 = 1`` and ``K = s**2 / (2 sigma_s**2)``.
    ``K = inf`` gives the deterministic limit ``(1, 0)``.
    """
    if not k_factor >= 0:
        raise DomainError(f"Rician K must be non-negative, got {k_factor}")
    if math.isinf(k_factor):
        return 1.0, 0.0
    sigma_s2 = 1.0 / (2.0 * (1.0 + k_factor))
    s2 = k_factor / (1.0 + k_factor)
    return math.sqrt(s2), math.sqrt(sigma_s2)


def rician_moments(k_factor: float) -> tuple[float, float]:
    """``(E|h_bar|^2, E|h_bar|^4)`` of the unit-power Rician coefficient."""
    if not k_factor >= 0:
        raise DomainError(f"Rician K must be non-negative, got {k_factor}")
    if math.isinf(k_factor):
        return 1.0, 1.0
    return 1.0, (k_factor**2 + 4.0 * k_factor + 2.0) / (1.0 + k_factor) ** 2


def sample_fading(params: FadingParams, rng: RngStream, size=None):
    """Draw small-scale coefficients ``h_bar = h_R + j h_I``.

    Each part is N(sqrt(K / (2(1+K))), 1 / (2(1+K))), so ``E|h_bar|^2 = 1``.
    Real parts are drawn before imaginary parts.
    """
    k = params.k_factor
    if math.isinf(k):
        mean, std = math.sqrt(0.5), 0.0
    else:
        mean = math.sqrt(k / (2.0 * (1.0 + k)))
        std = math.sqrt(1.0 / (2.0 * (1.0 + k)))
    re = mean + std * rng.standard_normal(size)
    im = mean + std * rng.standard_normal(size)
    out = re + 1j * im
    return complex(out) if size is None else out


def apply_fading_blocks(x, h, sigma_w2: float, rng: RngStream):
    """Vectorised channel for a batch of blocks.

    ``x`` has shape ``(..., n)``; ``h`` broadcasts against ``x[..., 0]`` and is
    held fixed along the last axis. Returns ``h * x + w`` with
    ``w ~ CN(0, sigma_w2)`` i.i.d.
    """
    x = np.asarray(x)
    if x.size == 0 or x.ndim == 0:
        raise DomainError("channel input must be a non-empty sequence")
    h = np.asarray(h)[..., np.newaxis]
    noise = sample_complex_normal(rng, sigma_w2, size=x.shape)
    return h * x + noise


def apply_channel(x, state: ChannelState, rng: RngStream):
    """Pass one block through ``y_n = h x_n + w_n`` with a single fading value."""
    return apply_fading_blocks(x, state.h, state.sigma_w2, rng)


def corrupt_csi(h, sigma_e2: float, rng: RngStream):
    """Imperfect channel estimate ``h + eps`` with ``eps ~ CN(0, sigma_e2)``."""
    h = np.asarray(h, dtype=complex)
    eps = sample_complex_normal(rng, sigma_e2, size=h.shape if h.ndim else None)
    out = h + eps
    return complex(out) if np.ndim(out) == 0 else out
