"""Command-line front end: ``noisemod {ber,theory,eh,validate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, from_document, load_config
from .engine import run_ber_sweep, run_eh_sweep, run_theory_curve

log = logging.getLogger("noisemod")


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def manifest_path(out_path) -> Path:
    return Path(out_path).with_suffix(".manifest.json")


def write_manifest(out_path, command, cfg: ExperimentConfig, started, extra=None) -> Path:
    doc = {
        "tool": "noisemod",
        "tool_version": __version__,
        "command": command,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_document(),
        "derived": {
            "n_total": cfg.n_total,
            "n_energy": cfg.n_energy,
            "n_info": cfg.n_info,
            "n_energy_eh": cfg.n_energy_eh,
            "sample_power": cfg.sample_power,
            "delta_db": cfg.deltas_db() if cfg.axis == "delta" else None,
        },
        "started_utc": started,
        "finished_utc": _now(),
        "outputs": [str(out_path)],
    }
    if extra:
        doc.update(extra)
    path = manifest_path(out_path)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load(args, axis) -> ExperimentConfig:
    if args.config is None:
        cfg = from_document({}, axis)
    else:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError([f"config file not found: {path}"])
        cfg = load_config(path, axis)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_(seed=args.seed).validate()
    return cfg


def cmd_ber(args) -> int:
    started = _now()
    cfg = _load(args, "delta")
    sim = run_ber_sweep(cfg, workers=args.threads)
    theory = run_theory_curve(cfg)
    rows = [
        (d, p, t, n, e, se, flag or "ok")
        for d, p, t, n, e, se, flag in zip(
            sim.axis_values, sim.estimate, theory.estimate, sim.trial_count,
            sim.error_count, sim.standard_error, theory.flags,
        )
    ]
    write_csv(args.out, ["delta_db", "ber_sim", "ber_theory", "trials", "errors", "stderr", "theory_flag"], rows)
    write_manifest(args.out, "ber", cfg, started)
    return 0


def cmd_theory(args) -> int:
    started = _now()
    cfg = _load(args, "delta")
    theory = run_theory_curve(cfg)
    rows = [(d, p, flag or "ok") for d, p, flag in zip(theory.axis_values, theory.estimate, theory.flags)]
    write_csv(args.out, ["delta_db", "ber_theory", "theory_flag"], rows)
    write_manifest(args.out, "theory", cfg, started)
    return 0


def cmd_eh(args) -> int:
    started = _now()
    cfg = _load(args, "distance")
    curves = run_eh_sweep(cfg, workers=args.threads)
    schemes = list(cfg.schemes)
    distances = curves[schemes[0]].axis_values
    rows = [[d] + [curves[s].estimate[i] for s in schemes] for i, d in enumerate(distances)]
    write_csv(args.out, ["distance_m"] + schemes, rows)
    analytic = {s: curves[s].reference for s in schemes}
    write_manifest(args.out, "eh", cfg, started, {"z_dc_analytic": analytic})
    return 0


def cmd_validate(args) -> int:
    axis = args.axis
    cfg = _load(args, axis)
    print(f"config hash      : {cfg.config_hash()}")
    print(f"waveform         : m = {cfg.mean_mag!r}, sigma_x2 = {cfg.sigma_x2!r}")
    print(f"per-sample power : {cfg.sample_power!r}")
    print(f"split            : mode = {cfg.split_mode}, alpha = {cfg.alpha}, rho = {cfg.rho}")
    print(f"N / N_e / N_i    : {cfg.n_total} / {cfg.n_energy} / {cfg.n_info}")
    print(f"EH block N_e     : {cfg.n_energy_eh}")
    print(f"channel          : d = {cfg.distance_m} m, L = {cfg.loss_l!r}, K = {cfg.k_factor}, "
          f"sigma_e2 = {cfg.sigma_e2}, fading = {cfg.fading}")
    if cfg.axis == "delta":
        print(f"delta grid (dB)  : {cfg.deltas_db()}")
        print(f"delta grid (lin) : {cfg.deltas_linear()}")
    else:
        print(f"distance grid (m): {list(cfg.values)}")
    print(f"monte carlo      : {cfg.bits_per_point} bits/point, seed {cfg.seed}, "
          f"{cfg.rng_algorithm}, method {cfg.method}")
    for w in cfg.warnings():
        print(f"warning: {w}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisemod", description=__doc__)
    parser.add_argument("--version", action="version", version=f"noisemod {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="JSON configuration file (defaults apply when omitted)")
        if out:
            p.add_argument("--out", required=True, help="CSV output path; manifest goes next to it")
            p.add_argument("--threads", type=int, default=1, help="worker threads (results do not change)")
        p.add_argument("--seed", type=_u64, help="override mc.seed")

    p = sub.add_parser("ber", help="simulated and theoretical BER against delta")
    common(p)
    p.set_defaults(func=cmd_ber)
    p = sub.add_parser("theory", help="theoretical BEP against delta")
    common(p)
    p.set_defaults(func=cmd_theory)
    p = sub.add_parser("eh", help="fading-averaged z_DC against distance")
    common(p)
    p.set_defaults(func=cmd_eh)
    p = sub.add_parser("validate", help="check a config and print resolved values")
    common(p, out=False)
    p.add_argument("--axis", choices=("delta", "distance"), default="delta",
                   help="sweep the config is meant for (delta: ber/theory, distance: eh)")
    p.set_defaults(func=cmd_validate)
    return parser


def _u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid configuration:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
