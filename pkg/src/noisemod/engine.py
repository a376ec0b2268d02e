"""Monte Carlo BER sweeps, fading-averaged z_DC sweeps and theory curves.

Randomness is keyed by ``(seed, point, trial)`` through
:func:`derive_trial_seed`, so a sweep returns the same numbers whatever the
worker count or execution order.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bep import LinkBudget, analytical_bep_detailed, conditional_bep
from .channel import FadingParams, apply_fading_blocks, corrupt_csi, rician_moments, sample_fading
from .config import EH_SCHEMES, ExperimentConfig
from .detector import detect_bits, sample_mean
from .harvest import received_moments, z_dc_analytic, z_dc_empirical
from .mathcore import RNG_ALGORITHMS, DomainError, RngStream, sample_complex_normal
from .waveform import BaselineScheme, NoiseModParams, baseline_modulate, noisemod_modulate, theoretical_moments

log = logging.getLogger(__name__)

_INDEX_LIMIT = 2**32
EH_BLOCK_BATCH = 1000


@dataclass
class SweepResult:
    """One labelled curve over a sweep axis.

    For BER curves ``error_count`` holds bit errors and ``standard_error`` the
    binomial standard error. For z_DC curves ``trial_count`` is the number of
    fading realisations, ``error_count`` is zero and ``reference`` holds the
    moment-based analytic prediction.
    """

    label: str
    axis_name: str
    axis_values: list
    estimate: list
    trial_count: list
    error_count: list
    standard_error: list
    flags: list = field(default_factory=list)
    reference: list | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.axis_values)


def derive_trial_seed(master_seed: int, point_index: int, trial_index: int, algorithm: str = "philox4x64") -> RngStream:
    """Stream for one (grid point, trial chunk) pair.

    ``stream_id = point_index * 2**32 + trial_index`` is injective for indices
    below 2**32.
    """
    for name, v in (("point_index", point_index), ("trial_index", trial_index)):
        if not 0 <= v < _INDEX_LIMIT:
            raise DomainError(f"{name} must lie in [0, 2**32), got {v}")
    return RngStream(master_seed, point_index * _INDEX_LIMIT + trial_index, algorithm)


def _chunk_sizes(total: int, chunk: int) -> list[int]:
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def _metadata(cfg: ExperimentConfig, kind: str, **extra) -> dict:
    meta = {
        "tool_version": __version__,
        "kind": kind,
        "config": cfg.to_document(),
        "config_hash": cfg.config_hash(),
        "rng_algorithm": cfg.rng_algorithm,
        "rng_description": RNG_ALGORITHMS[cfg.rng_algorithm],
        "derived": {
            "n_total": cfg.n_total,
            "n_energy": cfg.n_energy,
            "n_info": cfg.n_info,
            "sample_power": cfg.sample_power,
        },
    }
    meta["derived"].update(extra)
    return meta


# ---------------------------------------------------------------------------
# BER
# ---------------------------------------------------------------------------

def _ber_chunk(cfg: ExperimentConfig, n_bits: int, sigma_w2: float, rng: RngStream) -> int:
    """Simulate ``n_bits`` bit intervals and return the number of bit errors.

    Draw order is fixed (bits, fading, transmit/noise, CSI error) so runs that
    differ only in a scale parameter share random numbers.
    """
    params = cfg.noisemod()
    n_info = params.n_info
    loss = cfg.loss_l
    bits = rng.bits(n_bits)
    if cfg.fading == "rician":
        h_bar = sample_fading(FadingParams(cfg.k_factor), rng, size=n_bits)
    else:
        h_bar = np.ones(n_bits, dtype=complex)
    h = h_bar / math.sqrt(loss)

    if cfg.method == "samples":
        x = noisemod_modulate(bits, n_info, params, rng)
        y = apply_fading_blocks(x, h, sigma_w2, rng)
        y_mean = sample_mean(y)
    else:
        # the block mean of N_i i.i.d. samples, drawn directly
        mean = np.where(bits == 1, params.mean_mag, -params.mean_mag)
        x_mean = mean + math.sqrt(params.sigma_x2 / n_info) * rng.standard_normal(n_bits)
        w_mean = sample_complex_normal(rng, sigma_w2 / n_info, size=n_bits)
        y_mean = h * x_mean + w_mean

    if cfg.csi_error == "small_scale":
        h_est = corrupt_csi(h_bar, cfg.sigma_e2, rng) / math.sqrt(loss)
    else:
        h_est = corrupt_csi(h, cfg.sigma_e2, rng)
    decided = detect_bits(y_mean, h_est, params.mean_mag)
    return int(np.count_nonzero(decided != bits))


def _run_point(cfg, point_index, sigma_w2, pool, workers):
    sizes = _chunk_sizes(cfg.bits_per_point, cfg.chunk_bits)
    trials = errors = 0
    j = 0
    while j < len(sizes):
        wave = range(j, min(j + workers, len(sizes)))

        def task(k):
            rng = derive_trial_seed(cfg.seed, point_index, k, cfg.rng_algorithm)
            return _ber_chunk(cfg, sizes[k], sigma_w2, rng)

        results = list(pool.map(task, wave)) if pool is not None else [task(k) for k in wave]
        # accept chunks in order; the stopping prefix does not depend on the wave width
        for k, e in zip(wave, results):
            trials += sizes[k]
            errors += e
            j = k + 1
            if cfg.min_errors and errors >= cfg.min_errors:
                return trials, errors
    return trials, errors


def run_ber_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Simulated BER over the delta grid (time-splitting receiver).

    Each grid point runs chunks of ``cfg.chunk_bits`` bits with fresh fading per
    bit interval until ``cfg.bits_per_point`` bits are used or, when
    ``cfg.min_errors`` is non-zero, that many errors have been counted.
    """
    cfg.validate()
    if cfg.axis != "delta":
        raise DomainError("BER sweeps run over the delta axis")
    if cfg.split_mode != "TS":
        raise DomainError("BER sweeps support the time-splitting receiver only")
    workers = max(1, int(workers))
    est, trials, errs, se = [], [], [], []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for i, delta in enumerate(cfg.deltas_linear()):
            sigma_w2 = cfg.sigma_x2 / delta
            n, e = _run_point(cfg, i, sigma_w2, pool, workers)
            p = e / n
            est.append(p)
            trials.append(n)
            errs.append(e)
            se.append(math.sqrt(p * (1.0 - p) / n))
            log.info("delta point %d: %d errors / %d bits", i, e, n)
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(
        label="ber_sim",
        axis_name="delta_db",
        axis_values=cfg.deltas_db(),
        estimate=est,
        trial_count=trials,
        error_count=errs,
        standard_error=se,
        flags=[""] * len(est),
        metadata=_metadata(cfg, "ber", loss_l=cfg.loss_l),
    )


def theory_point(cfg: ExperimentConfig, delta: float):
    """Analytical BEP at one linear delta; returns ``(value, converged)``."""
    sigma_w2 = cfg.sigma_x2 / delta
    budget = LinkBudget(cfg.mean_mag, cfg.sigma_x2, sigma_w2, cfg.n_info, cfg.loss_l, cfg.k_factor)
    if cfg.fading == "none":
        return float(conditional_bep(1.0 / math.sqrt(cfg.loss_l), budget)), True
    res = analytical_bep_detailed(budget)
    return res.value, res.converged


def run_theory_curve(cfg: ExperimentConfig) -> SweepResult:
    """Closed-form BEP at each delta grid point (perfect CSI, no randomness)."""
    cfg.validate()
    if cfg.axis != "delta":
        raise DomainError("theory curves run over the delta axis")
    est, flags = [], []
    for delta in cfg.deltas_linear():
        value, ok = theory_point(cfg, delta)
        est.append(value)
        flags.append("" if ok else "quadrature_not_converged")
    n = len(est)
    return SweepResult(
        label="ber_theory",
        axis_name="delta_db",
        axis_values=cfg.deltas_db(),
        estimate=est,
        trial_count=[0] * n,
        error_count=[0] * n,
        standard_error=[0.0] * n,
        flags=flags,
        metadata=_metadata(cfg, "theory", loss_l=cfg.loss_l),
    )


# ---------------------------------------------------------------------------
# Energy harvesting
# ---------------------------------------------------------------------------

def eh_waveform_params(cfg: ExperimentConfig) -> NoiseModParams:
    params = NoiseModParams(cfg.mean_mag, cfg.sigma_x2, 1, cfg.n_energy_eh)
    return params.normalized() if cfg.eh_normalize_power else params


def eh_transmit_moments(cfg: ExperimentConfig, scheme: str) -> tuple[float, float]:
    """Transmit-side ``(E|x|^2, E|x|^4)`` as seen by the harvester for a scheme."""
    if scheme == "NoiseMod-TS":
        return theoretical_moments(eh_waveform_params(cfg))
    if scheme == "NoiseMod-PS":
        m2, m4 = theoretical_moments(eh_waveform_params(cfg))
        return cfg.rho * m2, cfg.rho**2 * m4
    return theoretical_moments(BaselineScheme(scheme))


def eh_analytic(cfg: ExperimentConfig, scheme: str, distance_m: float) -> float:
    fading = rician_moments(cfg.k_factor) if cfg.fading == "rician" else (1.0, 1.0)
    m2, m4 = received_moments(eh_transmit_moments(cfg, scheme), fading, cfg.loss_at(distance_m), cfg.eh_sigma_w2)
    return z_dc_analytic(m2, m4, cfg.rectenna())


def _eh_transmit(cfg, scheme, shape, rng):
    if scheme in ("NoiseMod-TS", "NoiseMod-PS"):
        params = eh_waveform_params(cfg)
        bits = rng.bits(shape[0])
        x = noisemod_modulate(bits, shape[1], params, rng)
        return math.sqrt(cfg.rho) * x if scheme == "NoiseMod-PS" else x
    return baseline_modulate(BaselineScheme(scheme), shape, rng)


def _eh_chunk(cfg, chunk_index, n_blocks, losses):
    """Per-scheme sums of z_DC and z_DC^2 over one batch of fading blocks.

    Fading is shared by every scheme and every distance in the batch.
    """
    fad_rng = derive_trial_seed(cfg.seed, 0, chunk_index, cfg.rng_algorithm)
    if cfg.fading == "rician":
        h_bar = sample_fading(FadingParams(cfg.k_factor), fad_rng, size=n_blocks)
    else:
        h_bar = np.ones(n_blocks, dtype=complex)
    rect = cfg.rectenna()
    out = {}
    for scheme in cfg.schemes:
        # index in the canonical list, so curves do not depend on config order
        k = EH_SCHEMES.index(scheme) + 1
        rng = derive_trial_seed(cfg.seed, k, chunk_index, cfg.rng_algorithm)
        x = _eh_transmit(cfg, scheme, (n_blocks, cfg.n_energy_eh), rng)
        sx = h_bar[:, np.newaxis] * x
        noise = None
        if cfg.eh_sigma_w2 > 0:
            noise = sample_complex_normal(rng, cfg.eh_sigma_w2, size=sx.shape)
        sums = np.empty((len(losses), 2))
        for i, loss in enumerate(losses):
            y = sx / math.sqrt(loss)
            if noise is not None:
                y = y + noise
            z = z_dc_empirical(y, rect)
            sums[i] = z.sum(), (z * z).sum()
        out[scheme] = sums
    return out


def run_eh_sweep(cfg: ExperimentConfig, workers: int = 1) -> dict[str, SweepResult]:
    """Fading-averaged z_DC against distance, one :class:`SweepResult` per scheme.

    Every scheme feeds ``cfg.n_energy_eh`` samples per fading block to the
    rectenna. NoiseMod-TS uses the harvesting-phase noise samples at full
    power; NoiseMod-PS passes the same waveform through the power splitter
    (``sqrt(rho)``); the reference schemes use their full received signal.
    """
    cfg.validate()
    if cfg.axis != "distance":
        raise DomainError("EH sweeps run over the distance axis")
    distances = [float(d) for d in cfg.values]
    losses = [cfg.loss_at(d) for d in distances]
    sizes = _chunk_sizes(cfg.eh_realizations, EH_BLOCK_BATCH)

    def task(c):
        return _eh_chunk(cfg, c, sizes[c], losses)

    workers = max(1, int(workers))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(task, range(len(sizes))))
    else:
        parts = [task(c) for c in range(len(sizes))]

    n = cfg.eh_realizations
    results = {}
    for scheme in cfg.schemes:
        total = np.zeros((len(losses), 2))
        for part in parts:  # fixed order keeps the float sums reproducible
            total += part[scheme]
        mean = total[:, 0] / n
        var = np.maximum(total[:, 1] / n - mean**2, 0.0)
        results[scheme] = SweepResult(
            label=scheme,
            axis_name="distance_m",
            axis_values=distances,
            estimate=mean.tolist(),
            trial_count=[n] * len(distances),
            error_count=[0] * len(distances),
            standard_error=np.sqrt(var / n).tolist(),
            flags=[""] * len(distances),
            reference=[eh_analytic(cfg, scheme, d) for d in distances],
            metadata=_metadata(
                cfg,
                "eh",
                losses=losses,
                eh_waveform={"m": eh_waveform_params(cfg).mean_mag, "sigma_x2": eh_waveform_params(cfg).sigma_x2},
            ),
        )
    return results
