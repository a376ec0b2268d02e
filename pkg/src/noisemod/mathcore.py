"""Special functions, adaptive quadrature and seeded random streams.

Everything numeric the link simulator and the BEP integral lean on lives here.
The Gaussian tail and Bessel routines delegate to ``scipy.special`` (Cephes
rational approximations); the quadrature is a self-contained adaptive
Gauss-Kronrod (7, 15) scheme so that its convergence contract is explicit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "QuadratureConvergenceError",
    "QuadratureSpec",
    "RngStream",
    "RNG_ALGORITHMS",
    "gaussian_q",
    "log_gaussian_q",
    "bessel_i0",
    "bessel_i0e",
    "log_bessel_i0",
    "integrate_adaptive",
    "sample_standard_normal",
    "sample_complex_normal",
]


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class QuadratureConvergenceError(ArithmeticError):
    """Subdivision budget exhausted before the tolerance was met.

    The best available estimate and its error bound are kept on the
    exception so callers can still report a value.
    """

    def __init__(self, estimate: float, error: float, intervals: int):
        super().__init__(
            f"adaptive quadrature did not converge after {intervals} intervals "
            f"(estimate={estimate!r}, error={error!r})"
        )
        self.estimate = estimate
        self.error = error
        self.intervals = intervals


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def _check_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def _unwrap(arr):
    return float(arr) if arr.ndim == 0 else arr


def gaussian_q(x):
    """Standard normal upper tail probability ``Q(x) = P{Z > x}``.

    Evaluated as ``0.5 * erfc(x / sqrt(2))`` so the far tail keeps full
    relative precision. Accepts scalars or arrays.
    """
    arr = _check_finite(x)
    return _unwrap(0.5 * special.erfc(arr / math.sqrt(2.0)))


def log_gaussian_q(x):
    """Natural log of :func:`gaussian_q`, finite even where Q underflows."""
    arr = _check_finite(x)
    return _unwrap(special.log_ndtr(-arr))


def bessel_i0e(x):
    """Exponentially scaled modified Bessel function ``exp(-|x|) * I0(x)``."""
    arr = _check_finite(x)
    return _unwrap(special.i0e(arr))


# Above this |x|, I0(x) exceeds ~1e300 and exp(x) overflows shortly after,
# so the unscaled value is refused rather than returned as inf.
I0_OVERFLOW_THRESHOLD = 700.0


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Raises
    ------
    DomainError
        If ``|x|`` exceeds :data:`I0_OVERFLOW_THRESHOLD`; use
        :func:`bessel_i0e` or :func:`log_bessel_i0` there instead.
    """
    arr = _check_finite(x)
    if np.any(np.abs(arr) > I0_OVERFLOW_THRESHOLD):
        raise DomainError(
            f"I0 overflows for |x| > {I0_OVERFLOW_THRESHOLD}; "
            "use bessel_i0e or log_bessel_i0"
        )
    a = np.abs(arr)
    return _unwrap(special.i0e(a) * np.exp(a))


def log_bessel_i0(x):
    """``log I0(x)`` computed from the scaled form; never overflows."""
    arr = _check_finite(x)
    a = np.abs(arr)
    return _unwrap(np.log(special.i0e(a)) + a)


# ---------------------------------------------------------------------------
# Adaptive quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and subdivision budget for :func:`integrate_adaptive`."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    max_subdivisions: int = 500

    def __post_init__(self):
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError(
                f"max_subdivisions must be a positive integer, got {self.max_subdivisions}"
            )


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half, centre last).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7(centre), 9, 11, 13).
_GAUSS_W = np.zeros(15)
_GAUSS_W[[1, 3, 5]] = _WG[:3]
_GAUSS_W[7] = _WG[3]
_GAUSS_W[[9, 11, 13]] = _WG[2::-1]


def _gk15(f, a, b, vectorized):
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = centre + half * _NODES
    if vectorized:
        fx = np.asarray(f(x), dtype=float)
    else:
        fx = np.array([f(float(xi)) for xi in x], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise DomainError(f"integrand not finite on [{a}, {b}]")
    kronrod = half * float(fx @ _KRONROD_W)
    gauss = half * float(fx @ _GAUSS_W)
    return kronrod, abs(kronrod - gauss)


def integrate_adaptive(
    f: Callable,
    lower: float,
    upper: float,
    spec: QuadratureSpec | None = None,
    *,
    vectorized: bool = False,
) -> float:
    """Integrate ``f`` over ``[lower, upper]`` by adaptive Gauss-Kronrod bisection.

    The interval with the largest error estimate is bisected until the summed
    error falls below ``max(abs_tol, rel_tol * |result|)``. The procedure is
    fully deterministic.

    Parameters
    ----------
    f : callable
        Integrand. With ``vectorized=True`` it is called with a 1-D array of
        15 abscissae and must return an array of the same shape.
    lower, upper : float
        Finite limits with ``lower < upper``.
    spec : QuadratureSpec, optional
        Tolerances; defaults to ``QuadratureSpec()``.

    Raises
    ------
    QuadratureConvergenceError
        When ``spec.max_subdivisions`` intervals are in use and the
        tolerance is still unmet. ``.estimate`` holds the best value.
    """
    spec = spec or QuadratureSpec()
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise DomainError("integration limits must be finite")
    if not lower < upper:
        raise DomainError(f"need lower < upper, got [{lower}, {upper}]")

    value, err = _gk15(f, lower, upper, vectorized)
    # max-heap on error; the counter keeps ordering deterministic on ties
    heap = [(-err, 0, lower, upper, value)]
    total, total_err = value, err
    counter = 1
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if len(heap) >= spec.max_subdivisions:
            raise QuadratureConvergenceError(total, total_err, len(heap))
        neg_err, _, a, b, v = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not a < mid < b:
            # interval collapsed to adjacent floats; nothing left to refine
            heapq.heappush(heap, (neg_err, counter, a, b, v))
            raise QuadratureConvergenceError(total, total_err, len(heap))
        v1, e1 = _gk15(f, a, mid, vectorized)
        v2, e2 = _gk15(f, mid, b, vectorized)
        heapq.heappush(heap, (-e1, counter, a, mid, v1))
        heapq.heappush(heap, (-e2, counter + 1, mid, b, v2))
        counter += 2
        # resum from scratch so rounding does not accumulate across updates
        total = math.fsum(item[4] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    return total


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

_U64 = 2**64

RNG_ALGORITHMS = {
    "philox4x64": "numpy Philox 4x64-10; key = seed + 2**64 * stream_id, counter from 0",
    "pcg64": "numpy PCG64 seeded by SeedSequence(entropy=seed, spawn_key=(stream_id,))",
}


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Equal identifiers yield bitwise-identical sequences on every machine;
    distinct ``stream_id`` values give independent streams. A stream is
    single-owner: do not share one instance across concurrent tasks.
    """

    def __init__(self, seed: int, stream_id: int = 0, algorithm: str = "philox4x64"):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if int(value) != value or not 0 <= value < _U64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
        if algorithm not in RNG_ALGORITHMS:
            raise DomainError(
                f"unknown rng algorithm {algorithm!r}; choose from {sorted(RNG_ALGORITHMS)}"
            )
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.algorithm = algorithm
        if algorithm == "philox4x64":
            bitgen = np.random.Philox(key=self.seed + _U64 * self.stream_id)
        else:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
            bitgen = np.random.PCG64(ss)
        self.generator = np.random.Generator(bitgen)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, algorithm={self.algorithm!r})"

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def bits(self, size=None):
        """Uniform {0, 1} integers."""
        return self.generator.integers(0, 2, size=size, dtype=np.int8)

    def integers(self, high, size=None):
        return self.generator.integers(0, high, size=size)


def sample_standard_normal(rng: RngStream, size=None):
    """Draw i.i.d. N(0, 1) samples (a float when ``size`` is None)."""
    return rng.standard_normal(size)


def sample_complex_normal(rng: RngStream, variance: float, size=None):
    """Draw circularly symmetric complex Gaussian samples CN(0, variance).

    Real and imaginary parts are independent N(0, variance / 2). The real
    parts are drawn first, then the imaginary parts.
    """
    if not variance >= 0:
        raise DomainError(f"variance must be non-negative, got {variance}")
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    out = scale * (re + 1j * im)
    return complex(out) if size is None else out
