"""Experiment configuration: the resolved settings shared by the engine and CLI.

A configuration is a JSON document with the sections ``waveform``, ``channel``,
``split``, ``sweep``, ``mc``, ``eh``, ``rectenna`` and ``schemes``. Every field
is optional and falls back to the reference defaults below; unknown keys
are rejected.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

from .channel import SPEED_OF_LIGHT, PathLossParams, path_loss
from .harvest import RectennaParams, ts_partition
from .mathcore import RNG_ALGORITHMS
from .waveform import DEFAULT_MEAN, DEFAULT_SIGMA_X2, NoiseModParams

EH_SCHEMES = ("NoiseMod-TS", "NoiseMod-PS", "QAM16", "PSK16", "BPSK", "RG", "CSCG")
DEFAULT_DELTA_DB = (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)
DEFAULT_DISTANCES_M = tuple(float(d) for d in range(1, 11))
MIN_BITS_PER_POINT = 10_000
_U64 = 2**64


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists every violation found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class ExperimentConfig:
    # waveform
    mean_mag: float = DEFAULT_MEAN
    sigma_x2: float = DEFAULT_SIGMA_X2
    # channel
    distance_m: float = 3.0
    carrier_hz: float = 433e6
    light_speed: float = SPEED_OF_LIGHT
    k_factor: float = 5.0
    sigma_e2: float = 0.0
    fading: str = "rician"  # "none" pins h_bar = 1
    csi_error: str = "small_scale"  # "absolute": error added to h_bar / sqrt(L)
    # split
    split_mode: str = "TS"
    alpha: float = 0.4
    rho: float = 0.5
    n_total: int = 150
    n_energy_eh: int = 100
    # sweep
    axis: str = "delta"
    values: tuple = DEFAULT_DELTA_DB
    delta_linear: bool = False
    # Monte Carlo
    bits_per_point: int = 1_000_000
    seed: int = 1
    rng_algorithm: str = "philox4x64"
    min_errors: int = 400  # early stop threshold; 0 disables
    chunk_bits: int = 16_384
    method: str = "samples"  # or "sufficient"
    # energy harvesting
    eh_realizations: int = 10_000
    eh_sigma_w2: float = 0.0
    eh_normalize_power: bool = True
    k2: float = 0.0034
    k4: float = 0.3829
    r_ant: float = 50.0
    schemes: tuple = EH_SCHEMES

    # -- derived quantities -------------------------------------------------

    @property
    def n_energy(self) -> int:
        return ts_partition(self.n_total, self.alpha)[0]

    @property
    def n_info(self) -> int:
        return ts_partition(self.n_total, self.alpha)[1]

    @property
    def sample_power(self) -> float:
        return self.mean_mag**2 + self.sigma_x2

    def noisemod(self) -> NoiseModParams:
        return NoiseModParams(self.mean_mag, self.sigma_x2, self.n_info, self.n_energy)

    def rectenna(self) -> RectennaParams:
        return RectennaParams(self.k2, self.k4, self.r_ant)

    def loss_at(self, distance_m: float) -> float:
        return path_loss(PathLossParams(distance_m, self.carrier_hz, self.light_speed))

    @property
    def loss_l(self) -> float:
        return self.loss_at(self.distance_m)

    def deltas_linear(self) -> list[float]:
        if self.delta_linear:
            return [float(v) for v in self.values]
        return [10.0 ** (v / 10.0) for v in self.values]

    def deltas_db(self) -> list[float]:
        if self.delta_linear:
            return [10.0 * math.log10(v) for v in self.values]
        return [float(v) for v in self.values]

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    # -- validation ---------------------------------------------------------

    def violations(self) -> list[str]:
        out = []

        def need(cond, msg):
            if not cond:
                out.append(msg)

        def finite_pos(name, path):
            v = getattr(self, name)
            need(_is_number(v) and v > 0 and math.isfinite(v), f"{path}: must be a positive number, got {v!r}")

        finite_pos("mean_mag", "waveform.m")
        need(_is_number(self.sigma_x2) and self.sigma_x2 > 0, f"waveform.sigma_x2: must be positive, got {self.sigma_x2!r}")
        finite_pos("distance_m", "channel.d_m")
        finite_pos("carrier_hz", "channel.fc_hz")
        finite_pos("light_speed", "channel.light_speed")
        need(_is_number(self.k_factor) and self.k_factor >= 0 and math.isfinite(self.k_factor),
             f"channel.k_factor: must be >= 0, got {self.k_factor!r}")
        need(_is_number(self.sigma_e2) and self.sigma_e2 >= 0, f"channel.sigma_e2: must be >= 0, got {self.sigma_e2!r}")
        need(self.fading in ("rician", "none"), f"channel.fading: must be 'rician' or 'none', got {self.fading!r}")
        need(self.csi_error in ("small_scale", "absolute"),
             f"channel.csi_error: must be 'small_scale' or 'absolute', got {self.csi_error!r}")
        need(self.split_mode in ("TS", "PS"), f"split.mode: must be 'TS' or 'PS', got {self.split_mode!r}")
        need(_is_number(self.alpha) and 0 <= self.alpha <= 1, f"split.alpha: must lie in [0, 1], got {self.alpha!r}")
        need(_is_number(self.rho) and 0 <= self.rho <= 1, f"split.rho: must lie in [0, 1], got {self.rho!r}")
        need(_is_int(self.n_total) and self.n_total >= 1, f"split.n_total: must be a positive integer, got {self.n_total!r}")
        need(_is_int(self.n_energy_eh) and self.n_energy_eh >= 1,
             f"split.n_energy: must be a positive integer, got {self.n_energy_eh!r}")
        if not out and self.split_mode == "TS":
            need(self.n_info >= 1, f"split.alpha: leaves no information samples (N_i = {self.n_info})")

        need(self.axis in ("delta", "distance"), f"sweep.axis: must be 'delta' or 'distance', got {self.axis!r}")
        vals = self.values
        if not vals:
            out.append("sweep: grid must not be empty")
        elif not all(_is_number(v) and math.isfinite(v) for v in vals):
            out.append("sweep: grid values must be finite numbers")
        else:
            need(all(a < b for a, b in zip(vals[:-1], vals[1:])), "sweep: grid must be strictly increasing")
            if self.axis == "distance":
                need(all(v > 0 for v in vals), "sweep.values_m: distances must be positive")
            elif self.delta_linear:
                need(all(v > 0 for v in vals), "sweep.values_linear: delta must be positive")

        need(_is_int(self.bits_per_point) and self.bits_per_point >= MIN_BITS_PER_POINT,
             f"mc.bits_per_point: must be an integer >= {MIN_BITS_PER_POINT}, got {self.bits_per_point!r}")
        need(_is_int(self.seed) and 0 <= self.seed < _U64, f"mc.seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        need(self.rng_algorithm in RNG_ALGORITHMS,
             f"mc.rng_algorithm: must be one of {sorted(RNG_ALGORITHMS)}, got {self.rng_algorithm!r}")
        need(_is_int(self.min_errors) and self.min_errors >= 0, f"mc.min_errors: must be >= 0, got {self.min_errors!r}")
        need(_is_int(self.chunk_bits) and self.chunk_bits >= 1, f"mc.chunk_bits: must be >= 1, got {self.chunk_bits!r}")
        need(self.method in ("samples", "sufficient"), f"mc.method: must be 'samples' or 'sufficient', got {self.method!r}")

        need(_is_int(self.eh_realizations) and self.eh_realizations >= 1,
             f"eh.realizations: must be a positive integer, got {self.eh_realizations!r}")
        need(_is_number(self.eh_sigma_w2) and self.eh_sigma_w2 >= 0, f"eh.sigma_w2: must be >= 0, got {self.eh_sigma_w2!r}")
        for name in ("k2", "k4", "r_ant"):
            finite_pos(name, f"rectenna.{name}")
        if not self.schemes:
            out.append("schemes: list must not be empty")
        else:
            bad = [s for s in self.schemes if s not in EH_SCHEMES]
            need(not bad, f"schemes: unknown entries {bad}; choose from {list(EH_SCHEMES)}")
            need(len(set(self.schemes)) == len(self.schemes), "schemes: duplicate entries")
        return out

    def validate(self) -> "ExperimentConfig":
        problems = self.violations()
        if problems:
            raise ConfigError(problems)
        return self

    def warnings(self) -> list[str]:
        out = []
        if abs(self.sample_power - 1.0) > 1e-12:
            out.append(
                f"per-sample transmit power m^2 + sigma_x2 = {self.sample_power:g} "
                "differs from unit power"
            )
        return out

    # -- JSON document form -------------------------------------------------

    def to_document(self) -> dict:
        """Nested JSON-ready form; feeding it back to :func:`from_document` round-trips."""
        sweep = {"axis": self.axis}
        if self.axis == "distance":
            sweep["values_m"] = list(self.values)
        elif self.delta_linear:
            sweep["values_linear"] = list(self.values)
        else:
            sweep["values_db"] = list(self.values)
        return {
            "waveform": {"m": self.mean_mag, "sigma_x2": self.sigma_x2},
            "channel": {
                "d_m": self.distance_m,
                "fc_hz": self.carrier_hz,
                "light_speed": self.light_speed,
                "k_factor": self.k_factor,
                "sigma_e2": self.sigma_e2,
                "fading": self.fading,
                "csi_error": self.csi_error,
            },
            "split": {
                "mode": self.split_mode,
                "alpha": self.alpha,
                "rho": self.rho,
                "n_total": self.n_total,
                "n_energy": self.n_energy_eh,
            },
            "sweep": sweep,
            "mc": {
                "bits_per_point": self.bits_per_point,
                "seed": self.seed,
                "rng_algorithm": self.rng_algorithm,
                "min_errors": self.min_errors,
                "chunk_bits": self.chunk_bits,
                "method": self.method,
            },
            "eh": {
                "realizations": self.eh_realizations,
                "sigma_w2": self.eh_sigma_w2,
                "normalize_power": self.eh_normalize_power,
            },
            "rectenna": {"k2": self.k2, "k4": self.k4, "r_ant": self.r_ant},
            "schemes": list(self.schemes),
        }

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_bytes(self.to_document())).hexdigest()


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def canonical_bytes(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False).encode()


# section -> {json key: dataclass field}
_SECTIONS = {
    "waveform": {"m": "mean_mag", "sigma_x2": "sigma_x2"},
    "channel": {
        "d_m": "distance_m",
        "fc_hz": "carrier_hz",
        "light_speed": "light_speed",
        "k_factor": "k_factor",
        "sigma_e2": "sigma_e2",
        "fading": "fading",
        "csi_error": "csi_error",
    },
    "split": {"mode": "split_mode", "alpha": "alpha", "rho": "rho", "n_total": "n_total", "n_energy": "n_energy_eh"},
    "mc": {
        "bits_per_point": "bits_per_point",
        "seed": "seed",
        "rng_algorithm": "rng_algorithm",
        "min_errors": "min_errors",
        "chunk_bits": "chunk_bits",
        "method": "method",
    },
    "eh": {"realizations": "eh_realizations", "sigma_w2": "eh_sigma_w2", "normalize_power": "eh_normalize_power"},
    "rectenna": {"k2": "k2", "k4": "k4", "r_ant": "r_ant"},
}
_SWEEP_KEYS = {"axis", "values_db", "values_linear", "values_m"}


def from_document(doc, default_axis: str = "delta") -> ExperimentConfig:
    """Build and validate a config from a parsed JSON document.

    Raises :class:`ConfigError` listing every unknown key and invariant
    violation at once.
    """
    problems = []
    if not isinstance(doc, dict):
        raise ConfigError([f"top level: expected a JSON object, got {type(doc).__name__}"])
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                problems.append(f"{key}: expected an object")
                continue
            mapping = _SECTIONS[key]
            for sub, v in value.items():
                if sub not in mapping:
                    problems.append(f"{key}.{sub}: unknown key")
                else:
                    kwargs[mapping[sub]] = v
        elif key == "sweep":
            if not isinstance(value, dict):
                problems.append("sweep: expected an object")
                continue
            problems.extend(f"sweep.{k}: unknown key" for k in value if k not in _SWEEP_KEYS)
            problems.extend(_parse_sweep(value, default_axis, kwargs))
        elif key == "schemes":
            if not isinstance(value, list) or not all(isinstance(s, str) for s in value):
                problems.append("schemes: expected a list of scheme names")
            else:
                kwargs["schemes"] = tuple(value)
        else:
            problems.append(f"{key}: unknown key")
    if "sweep" not in doc:
        _default_sweep(default_axis, kwargs)
    if "eh_normalize_power" in kwargs and not isinstance(kwargs["eh_normalize_power"], bool):
        problems.append("eh.normalize_power: must be true or false")
    cfg = ExperimentConfig(**kwargs)
    problems.extend(cfg.violations())
    if cfg.axis != default_axis:
        problems.append(f"sweep.axis: this command sweeps '{default_axis}', got {cfg.axis!r}")
    if problems:
        raise ConfigError(problems)
    return cfg


def _default_sweep(axis, kwargs):
    kwargs["axis"] = axis
    kwargs["values"] = DEFAULT_DISTANCES_M if axis == "distance" else DEFAULT_DELTA_DB
    kwargs["delta_linear"] = False


def _parse_sweep(sweep, default_axis, kwargs):
    axis = sweep.get("axis", default_axis)
    kwargs["axis"] = axis
    present = [k for k in ("values_db", "values_linear", "values_m") if k in sweep]
    if len(present) > 1:
        return [f"sweep: give only one of {present}"]
    if not present:
        _default_sweep(axis, kwargs)
        kwargs["axis"] = axis
        return []
    key = present[0]
    if axis == "distance" and key != "values_m":
        return [f"sweep.{key}: distance sweeps take values_m"]
    if axis != "distance" and key == "values_m":
        return ["sweep.values_m: delta sweeps take values_db or values_linear"]
    values = sweep[key]
    if not isinstance(values, list):
        return [f"sweep.{key}: expected a list of numbers"]
    kwargs["values"] = tuple(values)
    kwargs["delta_linear"] = key == "values_linear"
    return []


def load_config(path, default_axis: str = "delta") -> ExperimentConfig:
    """Read a JSON config file; malformed JSON is reported with line and column."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    return from_document(doc, default_axis)


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "EH_SCHEMES",
    "canonical_bytes",
    "from_document",
    "load_config",
]
