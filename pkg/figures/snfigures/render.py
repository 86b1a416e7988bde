"""Figure rendering for snlab run artifacts.

    sn-render --kind KIND --in RUN_DIR [--in RUN_DIR2] --out FILE.png

Kinds: packet_comparison, two_packet, stern_gerlach, heating_table.
Output is deterministic (Agg backend, fixed size and font, pinned PNG
metadata): re-rendering the same inputs is byte-identical.  Every figure
asserts the inequality it displays and exits nonzero if the data
contradicts it.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .artifacts import ArtifactError, float_meta, read_metadata, read_summary, read_timeseries

KINDS = ("packet_comparison", "two_packet", "stern_gerlach", "heating_table")

plt.rcParams.update({
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "figure.dpi": 110,
    "svg.hashsalt": "snfigures",
})


class FigureCheckError(RuntimeError):
    """The data contradicts the inequality the figure displays."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    run_dirs: tuple
    out_path: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArtifactError(f"unknown figure kind {self.kind!r}; known: {KINDS}")
        if not self.run_dirs:
            raise ArtifactError("at least one input run directory is required")


def _load(run_dir):
    meta = read_metadata(run_dir)
    series = read_timeseries(run_dir)
    summary = read_summary(run_dir)
    return meta, series, summary


def _length_label(meta):
    scale = float_meta(meta, "provenance", "length_scale_m")
    return f"internal units (1 unit = {scale:.3g} m)" if scale else "internal units"


def _save(fig, out_path):
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="png", metadata={"Software": "snfigures"})
    plt.close(fig)


def render_packet_comparison(spec):
    meta, series, summary = _load(spec.run_dirs[0])
    for col in ("time", "width_free", "width_sn"):
        if col not in series:
            raise ArtifactError(f"{spec.run_dirs[0]}: column {col!r} missing "
                                "(need a self_focus/evolve run)")
    kappa = float_meta(meta, "provenance", "kappa", 0.0)
    t, w_free, w_sn = series["time"], series["width_free"], series["width_sn"]
    deviation = float(np.max(np.abs(w_sn - w_free)))

    if kappa < 1e-12:
        if deviation >= 1e-8:
            raise FigureCheckError(
                f"zero-coupling run but width traces deviate by {deviation:.3e} >= 1e-8")
        note = f"coupling off: traces coincide (max deviation {deviation:.1e})"
    else:
        if not w_sn[-1] < w_free[-1]:
            raise FigureCheckError(
                f"expected self-focusing (final {w_sn[-1]:.6g} < {w_free[-1]:.6g})")
        note = f"self-focusing: final width ratio {w_sn[-1] / w_free[-1]:.3f}"

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, w_free, label="free evolution", color="#7a68a6")
    ax.plot(t, w_sn, label="self-gravitating", color="#e6a13c")
    if len(spec.run_dirs) > 1:
        _, series2, _ = _load(spec.run_dirs[1])
        if "width_sn" in series2:
            ax.plot(series2["time"], series2["width_sn"], ":",
                    label="self-gravitating (run 2)", color="#b05030")
    ax.set_xlabel("time, internal units")
    ax.set_ylabel(f"rms width, {_length_label(meta)}")
    ax.set_title(f"packet spreading, kappa = {kappa:.4g}")
    ax.legend()
    ax.text(0.02, 0.02, note, transform=ax.transAxes, fontsize=8)
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"deviation": deviation, "note": note}


def render_two_packet(spec):
    meta, series, summary = _load(spec.run_dirs[0])
    for col in ("time", "separation", "centre_of_mass"):
        if col not in series:
            raise ArtifactError(f"{spec.run_dirs[0]}: column {col!r} missing "
                                "(need a two_packet run)")
    t, sep, com = series["time"], series["separation"], series["centre_of_mass"]
    com_dev = summary.get("max_abs_com_approach_internal")
    if com_dev is None:
        raise ArtifactError("summary lacks max_abs_com_approach_internal")
    if not np.min(sep) < sep[0]:
        raise FigureCheckError("expected the packets to attract (separation never decreased)")
    if not com_dev < 1e-9:
        raise FigureCheckError(f"centre of mass drifted {com_dev:.3e} >= 1e-9 during approach")

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.0, 5.4), sharex=True)
    ax1.plot(t, sep, color="#e6a13c")
    ax1.set_ylabel(f"packet separation, {_length_label(meta)}")
    ax1.set_title("mutual attraction of a two-packet superposition")
    ax2.plot(t, com, color="#7a68a6")
    ax2.set_ylabel("centre of mass")
    ax2.set_xlabel("time, internal units")
    ax2.ticklabel_format(axis="y", style="sci", scilimits=(-2, 2))
    ax2.text(0.02, 0.85, f"approach-phase |com| <= {com_dev:.1e}",
             transform=ax2.transAxes, fontsize=8)
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"com_dev": com_dev, "final_separation": float(sep[-1])}


def render_stern_gerlach(spec):
    meta, series, summary = _load(spec.run_dirs[0])
    for col in ("time", "deflection_separate", "deflection_shared"):
        if col not in series:
            raise ArtifactError(f"{spec.run_dirs[0]}: column {col!r} missing "
                                "(need a stern_gerlach run)")
    d = summary.get("deflection_separate_internal")
    d_prime = summary.get("deflection_shared_internal")
    if d is None or d_prime is None:
        raise ArtifactError("summary lacks the deflection values")
    kappa = float_meta(meta, "provenance", "kappa", 0.0)
    if kappa < 1e-12:
        if abs(d - d_prime) >= 1e-8:
            raise FigureCheckError("zero coupling but deflections differ")
    elif not d_prime < d:
        raise FigureCheckError(
            f"expected the superposition to land closer: d' = {d_prime:.6g} vs d = {d:.6g}")

    t = series["time"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, series["deflection_separate"], label="spin eigenstate (d)", color="#7a68a6")
    ax.plot(t, series["deflection_shared"], label="superposition (d')", color="#e6a13c")
    ax.axhline(d, ls=":", lw=0.8, color="#7a68a6")
    ax.axhline(d_prime, ls=":", lw=0.8, color="#e6a13c")
    ax.set_xlabel("time, internal units")
    ax.set_ylabel(f"branch deflection, {_length_label(meta)}")
    ax.set_title(f"beam splitting: d = {d:.4f}, d' = {d_prime:.4f}")
    ax.legend(loc="upper left")
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"d": d, "d_prime": d_prime}


def render_heating_table(spec):
    meta, series, summary = _load(spec.run_dirs[0])
    for col in ("r0_m", "kelvin_per_second"):
        if col not in series:
            raise ArtifactError(f"{spec.run_dirs[0]}: column {col!r} missing "
                                "(need a heating run)")
    r0 = series["r0_m"]
    rate = series["kelvin_per_second"]
    if len(r0) < 2:
        raise ArtifactError("heating table needs at least two cutoff values")
    slope = np.polyfit(np.log(r0), np.log(rate), 1)[0]
    if abs(slope + 3.0) > 1e-6:
        raise FigureCheckError(f"heating rate slope {slope:.8f} is not -3")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(r0, rate, "o-", color="#e6a13c")
    ax.set_xlabel("cutoff length R0, m")
    ax.set_ylabel("heating rate, K/s")
    ax.set_title("collapse-noise heating vs cutoff (slope -3)")
    for x, y in zip(r0, rate):
        ax.annotate(f"{y:.1e}", (x, y), textcoords="offset points",
                    xytext=(4, 4), fontsize=7)
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"slope": float(slope)}


RENDERERS = {
    "packet_comparison": render_packet_comparison,
    "two_packet": render_two_packet,
    "stern_gerlach": render_stern_gerlach,
    "heating_table": render_heating_table,
}


def render(spec):
    """Render one figure; returns the renderer's scalar report."""
    return RENDERERS[spec.kind](spec)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="sn-render", description=__doc__)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="run_dirs", action="append", required=True,
                        metavar="DIR", help="input run directory (repeatable)")
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(kind=args.kind, run_dirs=tuple(args.run_dirs),
                          out_path=args.out)
        report = render(spec)
    except (ArtifactError, FigureCheckError) as exc:
        print(f"sn-render: {exc}", file=sys.stderr)
        return 2
    for key, value in report.items():
        print(f"{key}: {value}")
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
