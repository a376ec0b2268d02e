"""Sample-mean information harvester with a minimum-distance bit decision."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mathcore import DomainError


@dataclass(frozen=True)
class Decision:
    bit: int
    metric_low: float
    metric_high: float
    degenerate: bool = False  # set when the channel estimate is exactly zero


def sample_mean(y, axis=-1):
    """Arithmetic mean of the received samples along ``axis``."""
    y = np.asarray(y)
    if y.ndim == 0 or y.shape[axis] == 0:
        raise DomainError("sample mean of an empty sequence")
    out = y.mean(axis=axis)
    return complex(out) if np.ndim(out) == 0 else out


def decision_metrics(y_mean, h_est, mean_mag):
    """Squared distances of ``y_mean`` to ``h_est * (-m)`` and ``h_est * (+m)``."""
    y_mean = np.asarray(y_mean, dtype=complex)
    h_est = np.asarray(h_est, dtype=complex)
    low = np.abs(y_mean + h_est * mean_mag) ** 2
    high = np.abs(y_mean - h_est * mean_mag) ** 2
    return low, high


def detect_bits(y_mean, h_est, mean_mag: float):
    """Vectorised minimum-distance rule; ties resolve to bit 0."""
    low, high = decision_metrics(y_mean, h_est, mean_mag)
    return (high < low).astype(np.int8)


def detect_bit(y_mean: complex, h_est: complex, mean_mag: float) -> Decision:
    """Decide one bit from the block sample mean and the channel estimate.

    Returns bit 0 when ``|y - h(-m)|^2 < |y - h(+m)|^2`` and bit 1 when the
    reverse holds. Equal metrics (e.g. ``h_est == 0``) give bit 0.
    """
    if not mean_mag > 0:
        raise DomainError(f"mean magnitude must be positive, got {mean_mag}")
    if not (np.isfinite(y_mean) and np.isfinite(h_est)):
        raise DomainError("detector inputs must be finite")
    low, high = decision_metrics(y_mean, h_est, mean_mag)
    low, high = float(low), float(high)
    return Decision(
        bit=int(high < low),
        metric_low=low,
        metric_high=high,
        degenerate=(h_est == 0),
    )
