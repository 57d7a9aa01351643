"""Command line entry point: ``vlc-rsma run | validate | oracle``.

Exit codes: 0 success, 2 validation failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import ScenarioError, load_scenario, load_sweep_spec, run_sweep, snr_to_epsilon
from .geometry import channel_matrix
from .optimizer import brute_force_wsr, optimize_wsr
from .results import emit_plot_script, render_figures, write_results
from .schemes import SCHEMES, StreamPlan

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3


def _cmd_run(args) -> int:
    spec = load_sweep_spec(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = run_sweep(spec, workers=args.workers)
    csv_path = write_results(records, out / "results.csv")
    script = emit_plot_script(records, out / "plot_results.py")
    print(f"wrote {csv_path} ({len(records)} records)")
    print(f"wrote {script}")
    if not args.no_figures:
        for fig in render_figures(script, csv_path, out):
            print(f"wrote {fig}")
    flagged = [r for r in records if r.flags]
    for r in flagged:
        where = f"snr={r.snr_db:g} dB" + ("" if r.separation_m is None else f", d={r.separation_m:g} m")
        print(f"note: {r.scheme} at {where}: {'; '.join(r.flags)}", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    H = channel_matrix(sc)
    print(f"{sc.name}: room {sc.room_dims}, {sc.n_fixtures} fixtures, {sc.n_users} users, noise {sc.noise_mode if isinstance(sc.noise_mode, str) else 'physical'}")
    for k in range(sc.n_users):
        gains = " ".join("%.6e" % g for g in H.user(k))
        print(f"  user {k + 1} at {sc.users[k].position}: gains {gains}")
    print("ok")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    sc = load_scenario(args.scenario)
    if sc.n_fixtures > 2 or sc.n_users != 2:
        raise ScenarioError("oracle needs at most two fixtures and exactly two users")
    eps = args.epsilon if args.epsilon is not None else snr_to_epsilon(args.snr)
    H = channel_matrix(sc)
    weights = [0.5, 0.5]
    print(f"{'scheme':<6} {'ao_wsr':>14} {'grid_wsr':>14} {'gap':>10}")
    worst = 0.0
    for scheme in SCHEMES:
        plan = StreamPlan.for_scheme(scheme, H, sc.n_users)
        ao = optimize_wsr(sc, plan, weights, eps)
        grid = brute_force_wsr(sc, plan, weights, eps, args.grid * eps)
        gap = (grid.wsr - ao.wsr) / grid.wsr if grid.wsr > 0 else 0.0
        worst = max(worst, gap)
        print(f"{scheme:<6} {ao.wsr:14.8f} {grid.wsr:14.8f} {gap:10.2e}")
    print(f"largest relative shortfall of AO: {worst:.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vlc-rsma", description="RSMA/NOMA/SDMA precoding for multi-LED VLC rooms")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep and write CSV, plot script and figures")
    run.add_argument("--spec", required=True, help="sweep spec JSON")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=None, help="parallel sweep points (default: $RSMA_VLC_WORKERS or 1)")
    run.add_argument("--no-figures", action="store_true", help="skip rendering PNG figures")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a scenario file and print its channel gains")
    val.add_argument("--scenario", required=True)
    val.set_defaults(func=_cmd_validate)

    orc = sub.add_parser("oracle", help="compare AO against exhaustive grid search on a small scenario")
    orc.add_argument("--scenario", required=True)
    orc.add_argument("--snr", type=float, default=10.0, help="SNR in dB (eps = 10^(SNR/10)); default 10")
    orc.add_argument("--epsilon", type=float, default=None, help="amplitude budget, overrides --snr")
    orc.add_argument("--grid", type=float, default=0.05, help="grid step as a fraction of epsilon")
    orc.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
