import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from noisemod.bep import (
    LinkBudget,
    analytical_bep,
    conditional_bep,
    error_floor,
    scaled_rician_pdf,
    truncation_bound,
)
from noisemod.channel import PathLossParams, path_loss
from noisemod.mathcore import DomainError, QuadratureSpec, gaussian_q, integrate_adaptive

M = math.sqrt(0.5)
L3 = path_loss(PathLossParams(3.0))


def budget(delta=1e3, n_info=90, loss=L3, k=5.0, m=M, sx2=1.0):
    return LinkBudget(m, sx2, sx2 / delta, n_info, loss, k)


def quadpack_bep(b: LinkBudget):
    """Independent route: QUADPACK over |h_bar| (unscaled), then substitute r = x / sqrt(L)."""
    k = b.k_factor
    s2, ss2 = k / (1 + k), 1 / (2 * (1 + k))
    s = math.sqrt(s2)

    def f(x):
        pdf = x / ss2 * math.exp(-((x - s) ** 2) / (2 * ss2)) * special.i0e(x * s / ss2)
        r = x / math.sqrt(b.loss_l)
        arg = r * b.mean_mag / math.sqrt((2 * r * r * b.sigma_x2 + b.sigma_w2) / (2 * b.n_info))
        return special.ndtr(-arg) * pdf

    knee = math.sqrt(b.loss_l * b.sigma_w2 / (2 * b.sigma_x2))
    pts = sorted({min(knee, 5.0), s})
    total, edges = 0.0, [0.0, *pts, 12.0]
    for a, c in zip(edges[:-1], edges[1:]):
        if c > a:
            total += integrate.quad(f, a, c, epsabs=0, epsrel=1e-12, limit=500)[0]
    return total


def integrate_pdf(b, weight=lambda r: 1.0):
    r_max = truncation_bound(b)
    f = lambda r: weight(r) * scaled_rician_pdf(r, b)
    return integrate_adaptive(f, 0.0, r_max, QuadratureSpec(1e-15, 1e-12, 2000), vectorized=True)


# -- conditional BEP --------------------------------------------------------------

def test_conditional_bep_zero_gain():
    assert conditional_bep(0.0, budget()) == 0.5


def test_conditional_bep_noise_free_limit():
    b = LinkBudget(M, 1.0, 1e-300, 90)
    floor = gaussian_q(M * math.sqrt(90))
    assert conditional_bep(np.array([0.01, 1.0, 10.0]), b) == pytest.approx([floor] * 3, rel=1e-12)
    assert floor == pytest.approx(9.85e-12, rel=1e-3)
    assert error_floor(b) == floor


def test_conditional_bep_unit_gain_example():
    b = LinkBudget(M, 1.0, 1.0, 90)
    arg = M / math.sqrt(3 / 180)
    assert arg == pytest.approx(5.477, rel=1e-4)
    assert conditional_bep(1.0, b) == pytest.approx(gaussian_q(arg), rel=1e-14)
    assert conditional_bep(1.0, b) == pytest.approx(2.16e-8, rel=0.01)


def test_conditional_bep_range():
    r = np.linspace(0, 0.1, 500)
    p = conditional_bep(r, budget())
    assert np.all(p <= 0.5) and np.all(p > 0) and np.all(np.diff(p) < 0)
    with pytest.raises(DomainError):
        conditional_bep(-1.0, budget())


# -- density --------------------------------------------------------------------

@pytest.mark.parametrize("k", [0.0, 5.0, 10.0])
@pytest.mark.parametrize("d", [1.0, 3.0, 10.0])
def test_density_normalised(k, d):
    b = budget(k=k, loss=path_loss(PathLossParams(d)))
    assert integrate_pdf(b) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("k", [0.0, 5.0, 10.0])
def test_density_second_moment_is_inverse_loss(k):
    b = budget(k=k)
    assert integrate_pdf(b, lambda r: r * r) == pytest.approx(1.0 / b.loss_l, rel=1e-9)


def test_rayleigh_density_shape():
    b = budget(k=0.0, loss=1.0)
    r = np.linspace(0.01, 4, 400)
    assert np.allclose(scaled_rician_pdf(r, b), 2 * r * np.exp(-r * r), rtol=1e-12)
    fine = np.linspace(0.5, 0.9, 40001)
    assert fine[np.argmax(scaled_rician_pdf(fine, b))] == pytest.approx(math.sqrt(0.5), abs=1e-4)


def test_density_matches_scipy_rice():
    b = budget(k=5.0)
    s2, ss2 = 5 / 6, 1 / 12
    r = np.linspace(1e-4, 0.05, 200)
    x = r * math.sqrt(b.loss_l)
    ref = stats.rice(math.sqrt(s2 / ss2), scale=math.sqrt(ss2)).pdf(x) * math.sqrt(b.loss_l)
    assert np.allclose(scaled_rician_pdf(r, b), ref, rtol=1e-10)


def test_density_rejects_negative():
    with pytest.raises(DomainError):
        scaled_rician_pdf(-0.1, budget())


# -- truncation -----------------------------------------------------------------

def test_truncation_rayleigh_closed_form():
    r_max = truncation_bound(budget(k=0.0, loss=1.0), 1e-12)
    assert r_max == pytest.approx(math.sqrt(12 * math.log(10)), rel=1e-14)
    assert r_max == pytest.approx(5.26, abs=5e-3)
    assert math.exp(-r_max**2) <= 1e-12 * (1 + 1e-12)


def test_truncation_scales_with_loss():
    a = truncation_bound(budget(loss=1.0))
    b = truncation_bound(budget(loss=400.0))
    assert b == pytest.approx(a / 20.0, rel=1e-15)


@pytest.mark.parametrize("k", [0.0, 2.0, 5.0, 10.0])
def test_truncation_captures_mass(k):
    b = budget(k=k)
    assert integrate_pdf(b) >= 1 - 1e-12
    # Marcum-Q tail of the envelope beyond the bound stays below the target
    s, ss = math.sqrt(k / (1 + k)), math.sqrt(1 / (2 * (1 + k)))
    tail = stats.rice(s / ss, scale=ss).sf(truncation_bound(b, 1e-10) * math.sqrt(b.loss_l))
    assert tail <= 1e-10 * (1 + 1e-6)  # K = 0 attains the bound exactly


# -- unconditional BEP ------------------------------------------------------------

@pytest.mark.parametrize(
    "delta,n_info,k,d",
    [(1e2, 90, 5.0, 3.0), (1e3, 90, 5.0, 3.0), (1e4, 90, 5.0, 3.0), (1e3, 120, 0.0, 1.0),
     (3e3, 75, 10.0, 10.0), (1e6, 90, 5.0, 3.0), (1e8, 30, 5.0, 3.0), (10.0, 150, 5.0, 1.0)],
)
def test_bep_matches_independent_quadrature(delta, n_info, k, d):
    b = budget(delta=delta, n_info=n_info, k=k, loss=path_loss(PathLossParams(d)))
    assert analytical_bep(b) == pytest.approx(quadpack_bep(b), rel=1e-7)


def test_bep_limits():
    assert analytical_bep(budget(delta=1e-9)) == pytest.approx(0.5, abs=1e-4)
    p = analytical_bep(budget(delta=1e3))
    assert 0 < p < 0.5


def test_bep_approaches_floor_as_noise_vanishes():
    # the excess over the floor comes from amplitudes near zero and shrinks
    # in proportion to sigma_w2
    b = [budget(delta=10.0**e, n_info=90, loss=1.0, k=10.0) for e in (10, 12, 14)]
    floor = error_floor(b[0])
    excess = [analytical_bep(x) - floor for x in b]
    assert all(e > 0 for e in excess)
    assert excess[0] / excess[1] == pytest.approx(100, rel=0.05)
    assert abs(analytical_bep(b[2]) - floor) / floor < 1e-3


@pytest.mark.parametrize(
    "vary",
    ["delta", "n_info", "k", "m", "loss"],
)
def test_bep_monotonicity(vary):
    grids = {
        "delta": [budget(delta=10 ** (x / 10)) for x in (10, 15, 20, 25, 30, 35, 40)],
        "n_info": [budget(n_info=n) for n in (30, 60, 75, 90, 105, 120, 150)],
        "k": [budget(k=k) for k in (0.0, 1.0, 2.5, 5.0, 10.0, 20.0)],
        "m": [budget(m=m) for m in (0.2, 0.4, 0.6, M, 0.9, 1.2)],
        "loss": [budget(loss=path_loss(PathLossParams(d))) for d in (1, 2, 3, 5, 7, 10)],
    }
    p = [analytical_bep(b) for b in grids[vary]]
    if vary == "loss":
        assert all(a < c for a, c in zip(p[:-1], p[1:]))
    else:
        assert all(a > c for a, c in zip(p[:-1], p[1:]))


def test_link_budget_validation():
    with pytest.raises(DomainError):
        LinkBudget(M, 1.0, 0.0, 90)
    with pytest.raises(DomainError):
        LinkBudget(M, 1.0, 1.0, 0)
    b = budget(delta=250.0)
    assert b.delta == pytest.approx(250.0) and b.omega == pytest.approx(2 * M)
