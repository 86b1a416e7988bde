"""Command-line entry point.

One scenario per invocation:

    snlab <subcommand> [--config FILE] [--out DIR] [--seed N] [--set key=value ...]

Each run writes three artifacts into the output directory:

    metadata.txt    full config echo, constants, unit system, provenance
    timeseries.csv  one record per row, first column strictly increasing
    summary.txt     scalar results as "key: value" lines

Exit codes: 0 ok, 2 validation error, 3 convergence failure, 4 numerical
blowup.  Outputs carry no timestamps, so identical configs reproduce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, scenarios
from .config import RunConfig, parse_config, serialize_config
from .errors import BlowupError, ConvergenceError, ValidationError
from .units import CODATA2018

SCHEMA_VERSION = "1"

SUBCOMMANDS = {
    "ground-state": "ground_state",
    "evolve": "self_focus",
    "two-packet": "two_packet",
    "stern-gerlach": "stern_gerlach",
    "two-particle": "two_particle_contrast",
    "collapse-lindblad": "collapse_lindblad",
    "collapse-sde": "collapse_sde",
    "signalling": "signalling",
    "regime": "regime",
    "heating": "heating",
}


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return "none"
    return str(value)


def _write_metadata(out_dir, cfg, result):
    lines = [f"[schema]\nversion = {SCHEMA_VERSION}\nlibrary = snlab {__version__}\n"]
    lines.append("[config]")
    for raw in serialize_config(cfg, include_defaults=True).strip().splitlines():
        lines.append(f"# {raw}" if raw.startswith("[") else raw)
    lines.append("")
    lines.append("[constants]")
    for name in ("G", "hbar", "c", "kB", "atomic_mass_unit", "planck_mass", "planck_length"):
        lines.append(f"{name} = {_fmt(getattr(CODATA2018, name))}")
    lines.append("")
    lines.append("[provenance]")
    lines.append(f"scenario = {result.name}")
    lines.append(f"seed = {cfg.seed}")
    for key, value in result.provenance.items():
        if key in ("scenario", "seed"):
            continue
        lines.append(f"{key} = {_fmt(value)}")
    lines.append("")
    lines.append("[columns]")
    lines.append("timeseries = " + ",".join(result.series.keys()))
    (out_dir / "metadata.txt").write_text("\n".join(lines) + "\n")


def _write_timeseries(out_dir, result):
    series = result.series
    path = out_dir / "timeseries.csv"
    if not series:
        path.write_text("empty\n")
        return
    keys = list(series.keys())
    arrays = [np.atleast_1d(np.asarray(series[k])) for k in keys]
    n = len(arrays[0])
    rows = [",".join(keys)]
    for i in range(n):
        rows.append(",".join(_fmt(a[i].item() if hasattr(a[i], "item") else a[i])
                             for a in arrays))
    path.write_text("\n".join(rows) + "\n")


def _write_summary(out_dir, cfg, result):
    lines = [f"scenario: {result.name}", f"seed: {cfg.seed}"]
    for key, value in result.parameters.items():
        lines.append(f"param_{key}: {_fmt(value)}")
    for key, value in result.summary.items():
        lines.append(f"{key}: {_fmt(value)}")
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")


def _run_closed_form(cfg):
    """signalling / regime / heating have no time evolution; wrap their
    closed forms into a ScenarioResult so artifact writing is uniform."""
    p = cfg.full_params()
    if cfg.scenario == "signalling":
        out = scenarios.signalling_distance(**p)
        series = {k: np.array([v]) for k, v in out.items()}
        return scenarios.ScenarioResult("signalling", p, series, dict(out),
                                        {"closed_form": True})
    if cfg.scenario == "regime":
        out = scenarios.regime_classifier(**p)
        summary = dict(out)
        summary["criterion"] = "m^3*sigma (wide) or m^3*sigma^2/R (narrow) vs planck_mass^3*planck_length"
        # indeterminate inputs have no margin; keep NaN out of the CSV
        series = {"margin": np.array([out["margin"]])} if np.isfinite(out["margin"]) else {}
        return scenarios.ScenarioResult("regime", p, series, summary,
                                        {"closed_form": True})
    if cfg.scenario == "heating":
        r0_list = [float(tok) for tok in str(p["r0_list_m"]).split(",") if tok.strip()]
        rows = scenarios.heating_table(p["mass_kg"], r0_list)
        series = {
            "r0_m": np.array([r["r0_m"] for r in rows]),
            "watts": np.array([r["watts"] for r in rows]),
            "kelvin_per_second": np.array([r["kelvin_per_second"] for r in rows]),
        }
        summary = {"rows": len(rows), "mass_kg": p["mass_kg"],
                   "temperature_convention": "E = kB*T"}
        for r in rows:
            summary[f"rate_K_per_s_at_{r['r0_m']:g}m"] = r["kelvin_per_second"]
        return scenarios.ScenarioResult("heating", p, series, summary,
                                        {"closed_form": True})
    raise ValidationError(f"unhandled closed-form scenario {cfg.scenario}")


RUNNERS = {
    "self_focus": scenarios.run_self_focus,
    "two_packet": scenarios.run_two_packet,
    "stern_gerlach": scenarios.run_stern_gerlach,
    "ground_state": scenarios.run_ground_state,
    "two_particle_contrast": scenarios.run_two_particle_contrast,
    "collapse_lindblad": scenarios.run_collapse_lindblad,
    "collapse_sde": scenarios.run_collapse_sde,
}


def run(cfg, out_dir):
    """Execute one validated RunConfig and write its artifacts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.scenario in RUNNERS:
        params = cfg.full_params()
        runner = RUNNERS[cfg.scenario]
        if "seed" in runner.__code__.co_varnames[: runner.__code__.co_argcount]:
            params["seed"] = cfg.seed
        result = runner(**params)
    else:
        result = _run_closed_form(cfg)
    _write_metadata(out_dir, cfg, result)
    _write_timeseries(out_dir, result)
    _write_summary(out_dir, cfg, result)
    return result


def build_parser():
    parser = argparse.ArgumentParser(
        prog="snlab",
        description="Self-gravitating wave-packet and collapse-model laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in SUBCOMMANDS:
        sp = sub.add_parser(command, help=f"run the {SUBCOMMANDS[command]} scenario")
        sp.add_argument("--config", default=None, help="INI config file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the run seed")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scenario parameter")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    scenario = SUBCOMMANDS[args.command]
    try:
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ValidationError(f"--set expects KEY=VALUE, got {item!r}")
            key, _, value = item.partition("=")
            overrides[key.strip()] = value.strip()
        cfg = parse_config(path=args.config, scenario=scenario, overrides=overrides)
        if args.seed is not None:
            cfg = RunConfig(cfg.scenario, args.seed, cfg.params)
        out_dir = args.out or f"runs/{cfg.scenario}"
        result = run(cfg, out_dir)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return 3
    except BlowupError as exc:
        print(f"numerical blowup: {exc}", file=sys.stderr)
        return 4
    for key, value in result.summary.items():
        print(f"{key}: {_fmt(value)}")
    print(f"artifacts written to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
