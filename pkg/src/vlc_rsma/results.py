"""CSV persistence of sweep records and the generated plotting script."""

from __future__ import annotations

import csv
import io
import subprocess
import sys
from pathlib import Path
from typing import List, Sequence

from .experiments import ResultRecord, sort_records

HEADER = ("scheme", "scenario_id", "snr_db", "separation_m", "wsr", "rate_u1", "rate_u2", "common_rate", "iters", "converged")


def _num(x: float) -> str:
    return "%.9g" % x


def format_results(records: Sequence[ResultRecord]) -> str:
    if not records:
        raise ValueError("refusing to write an empty result set")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in sort_records(records):
        if len(r.rates) != 2:
            raise ValueError(f"CSV layout holds two users, record has {len(r.rates)}")
        writer.writerow([
            r.scheme,
            r.scenario_id,
            _num(r.snr_db),
            "" if r.separation_m is None else _num(r.separation_m),
            _num(r.wsr),
            _num(r.rates[0]),
            _num(r.rates[1]),
            _num(r.common_rate),
            str(r.iterations_used),
            "1" if r.converged else "0",
        ])
    return buf.getvalue()


def write_results(records: Sequence[ResultRecord], out_path) -> Path:
    """Write records as UTF-8 CSV with LF line endings, sorted by (scheme, point)."""
    text = format_results(records)
    out_path = Path(out_path)
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {out_path}: {exc.strerror or exc}") from exc
    return out_path


def read_results(path) -> List[ResultRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            out.append(ResultRecord(
                scheme=row[0],
                scenario_id=row[1],
                snr_db=float(row[2]),
                separation_m=float(row[3]) if row[3] else None,
                wsr=float(row[4]),
                rates=(float(row[5]), float(row[6])),
                common_rate=float(row[7]),
                iterations_used=int(row[8]),
                converged=row[9] == "1",
            ))
    return out


PLOT_SCRIPT = '''\
"""Plot WSR curves from a sweep CSV.

usage: python plot_results.py results.csv [output_dir]
"""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

STYLE = {"RSMA": ("tab:red", "o"), "NOMA": ("tab:blue", "s"), "SDMA": ("tab:green", "^")}


def load(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def curve(ax, rows, x_key, scheme):
    pts = sorted((float(r[x_key]), float(r["wsr"])) for r in rows)
    color, marker = STYLE.get(scheme, (None, "x"))
    ax.plot([p[0] for p in pts], [p[1] for p in pts], marker=marker, color=color, label=scheme)


def main(csv_path, out_dir):
    rows = load(csv_path)
    scenario = rows[0]["scenario_id"]
    written = []
    if any(r["separation_m"] for r in rows):
        by_snr = defaultdict(lambda: defaultdict(list))
        for r in rows:
            by_snr[float(r["snr_db"])][r["scheme"]].append(r)
        snrs = sorted(by_snr)
        fig, axes = plt.subplots(1, len(snrs), figsize=(4.2 * len(snrs), 3.6), squeeze=False)
        for ax, snr in zip(axes[0], snrs):
            for scheme in sorted(by_snr[snr]):
                curve(ax, by_snr[snr][scheme], "separation_m", scheme)
            ax.set_title("SNR = %g dB" % snr)
            ax.set_xlabel("user separation (m)")
            ax.grid(True, alpha=0.3)
        axes[0][0].set_ylabel("WSR (bits/s/Hz)")
        axes[0][0].legend()
        name = "wsr_vs_separation.png"
    else:
        by_scheme = defaultdict(list)
        for r in rows:
            by_scheme[r["scheme"]].append(r)
        fig, ax = plt.subplots(figsize=(5.0, 3.8))
        for scheme in sorted(by_scheme):
            curve(ax, by_scheme[scheme], "snr_db", scheme)
        ax.set_xlabel("SNR (dB)")
        ax.set_ylabel("WSR (bits/s/Hz)")
        ax.grid(True, alpha=0.3)
        ax.legend()
        name = "wsr_vs_snr.png"
    fig.suptitle(scenario)
    fig.tight_layout()
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)
    for p in written:
        print(p)


if __name__ == "__main__":
    csv_path = sys.argv[1]
    out_dir = sys.argv[2] if len(sys.argv) > 2 else os.path.dirname(os.path.abspath(csv_path))
    main(csv_path, out_dir)
'''


def emit_plot_script(records: Sequence[ResultRecord], out_path) -> Path:
    """Write a standalone matplotlib script that plots the CSV written for ``records``."""
    if not records:
        raise ValueError("refusing to emit a plot script for an empty result set")
    out_path = Path(out_path)
    try:
        out_path.write_text(PLOT_SCRIPT, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise OSError(f"cannot write plot script to {out_path}: {exc.strerror or exc}") from exc
    return out_path


def render_figures(script_path, csv_path, out_dir) -> List[Path]:
    """Run the emitted script; returns the figure files it reports."""
    proc = subprocess.run(
        [sys.executable, str(script_path), str(csv_path), str(out_dir)],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"plot script failed: {proc.stderr.strip()}")
    return [Path(line) for line in proc.stdout.splitlines() if line.strip()]
