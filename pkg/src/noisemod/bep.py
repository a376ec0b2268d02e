"""Closed-form bit error probability of the mean-keyed scheme over Rician fading.

The conditional error probability given the channel amplitude ``r = |h|`` is a
Gaussian tail; averaging it over the (path-loss scaled) Rician amplitude
density gives the unconditional BEP. Both factors of the integrand are
combined in log space so the product stays accurate at the 1e-12 level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .channel import rician_shape
from .mathcore import (
    DomainError,
    QuadratureConvergenceError,
    QuadratureSpec,
    gaussian_q,
    integrate_adaptive,
    log_gaussian_q,
)

__all__ = [
    "LinkBudget",
    "BepResult",
    "DEFAULT_MASS_TOL",
    "BEP_QUADRATURE",
    "conditional_bep",
    "error_floor",
    "scaled_rician_pdf",
    "log_scaled_rician_pdf",
    "truncation_bound",
    "analytical_bep",
    "analytical_bep_detailed",
]

DEFAULT_MASS_TOL = 1e-13

# The integral can sit near 1e-15 in the floor region, so only the relative
# tolerance is meant to bind here.
BEP_QUADRATURE = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-10, max_subdivisions=4000)


@dataclass(frozen=True)
class LinkBudget:
    mean_mag: float
    sigma_x2: float
    sigma_w2: float
    n_info: int
    loss_l: float = 1.0
    k_factor: float = 5.0

    def __post_init__(self):
        for name in ("mean_mag", "sigma_x2", "sigma_w2", "loss_l"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        if int(self.n_info) != self.n_info or self.n_info < 1:
            raise DomainError(f"n_info must be a positive integer, got {self.n_info}")
        if not (self.k_factor >= 0 and math.isfinite(self.k_factor)):
            raise DomainError(f"k_factor must be finite and non-negative, got {self.k_factor}")

    @property
    def delta(self) -> float:
        """Variance ratio sigma_x2 / sigma_w2."""
        return self.sigma_x2 / self.sigma_w2

    @property
    def omega(self) -> float:
        """Distance between the two bit means, 2m."""
        return 2.0 * self.mean_mag


def _q_argument(r, b: LinkBudget):
    r = np.asarray(r, dtype=float)
    return 0.5 * r * b.omega / np.sqrt(r * r * b.sigma_x2 / b.n_info + b.sigma_w2 / (2.0 * b.n_info))


def conditional_bep(r, budget: LinkBudget):
    """Error probability given channel amplitude ``r``.

    ``Q(r m / sqrt((2 r^2 sigma_x2 + sigma_w2) / (2 N_i)))``; vectorised in ``r``.
    """
    if np.any(np.asarray(r) < 0):
        raise DomainError("amplitude must be non-negative")
    return gaussian_q(_q_argument(r, budget))


def error_floor(budget: LinkBudget) -> float:
    """Noise-free limit ``Q(m sqrt(N_i) / sigma_x)`` of the conditional BEP."""
    return gaussian_q(budget.mean_mag * math.sqrt(budget.n_info / budget.sigma_x2))


def log_scaled_rician_pdf(r, budget: LinkBudget):
    """Log density of ``r = |h_bar| / sqrt(L)``; ``-inf`` at ``r = 0``.

    Uses the unit-mass density
    ``(L r / s_s^2) exp(-(L r^2 + s^2) / (2 s_s^2)) I0(r sqrt(L) s / s_s^2)``,
    rewritten with the scaled Bessel function as
    ``log(L r / s_s^2) - (sqrt(L) r - s)^2 / (2 s_s^2) + log(i0e(.))``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("amplitude must be non-negative")
    s, sigma_s = rician_shape(budget.k_factor)
    ss2 = sigma_s * sigma_s
    rl = r * math.sqrt(budget.loss_l)
    with np.errstate(divide="ignore"):
        out = (
            np.log(budget.loss_l * r / ss2)
            - (rl - s) ** 2 / (2.0 * ss2)
            + np.log(special.i0e(rl * s / ss2))
        )
    return float(out) if out.ndim == 0 else out


def scaled_rician_pdf(r, budget: LinkBudget):
    """Density of the path-loss scaled Rician amplitude (integrates to one)."""
    return np.exp(log_scaled_rician_pdf(r, budget))


def truncation_bound(budget: LinkBudget, mass_tol: float = DEFAULT_MASS_TOL) -> float:
    """Amplitude ``r_max`` with density mass beyond it below ``mass_tol``.

    Since ``|h_bar| <= s + |g|`` with ``g ~ CN(0, 2 sigma_s^2)``, the tail obeys
    ``P{|h_bar| > x} <= exp(-(x - s)^2 / (2 sigma_s^2))``, which is exact for
    K = 0.
    """
    if not 0.0 < mass_tol < 1.0:
        raise DomainError(f"mass_tol must lie in (0, 1), got {mass_tol}")
    s, sigma_s = rician_shape(budget.k_factor)
    x_max = s + sigma_s * math.sqrt(2.0 * math.log(1.0 / mass_tol))
    return x_max / math.sqrt(budget.loss_l)


def _breakpoints(budget: LinkBudget, r_max: float) -> list[float]:
    """Interior points where the integrand changes character.

    The conditional BEP drops from 1/2 towards the floor around
    ``r ~ sigma_w / sigma_x``; the density peaks near ``s / sqrt(L)``.
    Geometric points between them keep the bisection from stepping over either.
    """
    s, sigma_s = rician_shape(budget.k_factor)
    scale = 1.0 / math.sqrt(budget.loss_l)
    knee = math.sqrt(budget.sigma_w2 / (2.0 * budget.sigma_x2))
    pts = {s * scale, max(s - 3 * sigma_s, 0.0) * scale, (s + 3 * sigma_s) * scale}
    lo = min(knee * 1e-3, sigma_s * scale * 1e-3)
    pts.update(np.geomspace(lo, r_max, 40).tolist())
    return sorted(p for p in pts if 0.0 < p < r_max)


@dataclass(frozen=True)
class BepResult:
    value: float
    converged: bool
    error_estimate: float | None = None


def _integrand(budget: LinkBudget):
    def f(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0
        rp = r[pos]
        out[pos] = np.exp(log_gaussian_q(_q_argument(rp, budget)) + log_scaled_rician_pdf(rp, budget))
        return out

    return f


def analytical_bep_detailed(
    budget: LinkBudget,
    spec: QuadratureSpec | None = None,
    mass_tol: float = DEFAULT_MASS_TOL,
) -> BepResult:
    """Like :func:`analytical_bep` but reports non-convergence instead of raising."""
    spec = spec or BEP_QUADRATURE
    r_max = truncation_bound(budget, mass_tol)
    f = _integrand(budget)
    edges = [0.0, *_breakpoints(budget, r_max), r_max]
    pieces, converged, err = [], True, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        try:
            pieces.append(integrate_adaptive(f, a, b, spec, vectorized=True))
        except QuadratureConvergenceError as exc:
            pieces.append(exc.estimate)
            err += exc.error
            converged = False
    return BepResult(math.fsum(pieces), converged, err if not converged else None)


def analytical_bep(
    budget: LinkBudget,
    spec: QuadratureSpec | None = None,
    mass_tol: float = DEFAULT_MASS_TOL,
) -> float:
    """Unconditional BEP: the conditional BEP averaged over the amplitude density.

    The integral over ``[0, r_max]`` is split at :func:`_breakpoints` and each
    piece handed to :func:`integrate_adaptive`.

    Raises
    ------
    QuadratureConvergenceError
        If any piece fails to converge; ``.estimate`` carries the summed best
        estimate over all pieces.
    """
    res = analytical_bep_detailed(budget, spec, mass_tol)
    if not res.converged:
        raise QuadratureConvergenceError(res.value, res.error_estimate, BEP_QUADRATURE.max_subdivisions)
    return res.value
