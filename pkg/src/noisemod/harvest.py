"""Nonlinear rectenna output and the time/power splitting receiver front ends."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .mathcore import DomainError


@dataclass(frozen=True)
class RectennaParams:
    k2: float = 0.0034
    k4: float = 0.3829
    r_ant: float = 50.0

    def __post_init__(self):
        for name in ("k2", "k4", "r_ant"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive, got {value}")


class SplitMode(enum.Enum):
    TS = "TS"
    PS = "PS"


@dataclass(frozen=True)
class SplitConfig:
    mode: SplitMode = SplitMode.TS
    alpha: float = 0.4
    rho: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "mode", SplitMode(self.mode))
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [0, 1], got {self.rho}")


def z_dc_analytic(second_moment: float, fourth_moment: float, params: RectennaParams) -> float:
    """Rectenna output ``k2 R m2 + k4 R^2 m4`` from received-signal moments."""
    if second_moment < 0 or fourth_moment < 0:
        raise DomainError("moments must be non-negative")
    # Jensen: m4 >= m2^2; allow rounding slack
    if fourth_moment < second_moment**2 * (1.0 - 1e-12):
        raise DomainError(
            f"fourth moment {fourth_moment} below squared second moment {second_moment**2}"
        )
    return params.k2 * params.r_ant * second_moment + params.k4 * params.r_ant**2 * fourth_moment


def z_dc_empirical(y, params: RectennaParams, axis=-1):
    """Rectenna output with the expectations replaced by block averages.

    With a 2-D input each row is one block and one value per row is returned.
    """
    y = np.asarray(y)
    if y.ndim == 0 or y.shape[axis] == 0:
        raise DomainError("z_DC of an empty block")
    p = y.real**2 + y.imag**2 if np.iscomplexobj(y) else y**2
    m2 = p.mean(axis=axis)
    m4 = (p * p).mean(axis=axis)
    out = params.k2 * params.r_ant * m2 + params.k4 * params.r_ant**2 * m4
    return float(out) if np.ndim(out) == 0 else out


def received_moments(
    tx_moments: tuple[float, float],
    fading_moments: tuple[float, float] = (1.0, 1.0),
    loss_l: float = 1.0,
    sigma_w2: float = 0.0,
) -> tuple[float, float]:
    """``(E|y|^2, E|y|^4)`` for ``y = h_bar x / sqrt(L) + w`` with independent terms.

    ``w`` is circular CN(0, sigma_w2), so ``E|s + w|^4 = E|s|^4 + 4 E|s|^2 sigma_w2
    + 2 sigma_w2^2``.
    """
    sm2 = tx_moments[0] * fading_moments[0] / loss_l
    sm4 = tx_moments[1] * fading_moments[1] / loss_l**2
    return sm2 + sigma_w2, sm4 + 4.0 * sm2 * sigma_w2 + 2.0 * sigma_w2**2


def ts_partition(n_total: int, alpha: float) -> tuple[int, int]:
    """Split a bit interval into ``(n_energy, n_info)`` sample counts.

    ``n_energy = round(alpha * n_total)`` with halves rounded up.
    """
    if int(n_total) != n_total or n_total < 1:
        raise DomainError(f"n_total must be a positive integer, got {n_total}")
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    # guard against alpha * N landing just below an exact integer or half
    n_energy = math.floor(alpha * n_total + 0.5 + 1e-9)
    n_energy = min(max(n_energy, 0), int(n_total))
    return n_energy, int(n_total) - n_energy


def ps_partition(y, rho: float):
    """Power splitter: returns ``(sqrt(rho) y, sqrt(1 - rho) y)``."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    y = np.asarray(y)
    return math.sqrt(rho) * y, math.sqrt(1.0 - rho) * y
