"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 missing file, 4 parse error,
5 config constraint violation, 6 runtime error, 7 selfcheck failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import config as cfg
from . import io as sfio
from . import units
from .budget import SNR_CONVENTION, backaction_budget
from .dynamics import build_rates, simulate_trajectory
from .errors import ConfigError, SpinFaradayError
from .physics import SpinState
from .readout import estimate_readout_fidelity
from .scan import SweepSpec, rotation_vs_preparation, run_map, run_sweep
from .selfcheck import run_selfcheck

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_SELFCHECK = 0, 2, 6, 7
COMMANDS = ("spectrum", "map", "budget", "prepare", "trajectory", "selfcheck")


class UsageError(SpinFaradayError):
    pass


def cmd_spectrum(tree, threads=1):
    ds = run_sweep(SweepSpec.from_section(tree["spectrum"]), tree, threads=threads)
    return sfio.dataset_table("spectrum", tree, ds)


def cmd_map(tree, threads=1):
    section = tree["map"]
    if not section["axis2"]:
        raise UsageError("map needs map.axis2 (two-axis sweep)")
    try:
        ds = run_map(SweepSpec.from_section(section), tree, threads=threads)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    return sfio.dataset_table("map", tree, ds)


def cmd_prepare(tree, threads=1):
    section = tree["prepare"]
    start, stop = section["offset_range_ghz"]
    ds = rotation_vs_preparation(tree, section["probe_detunings_ghz"],
                                 np.linspace(start, stop, section["points"]), threads=threads)
    return sfio.dataset_table("prepare", tree, ds)


def budget_reports(tree):
    params = cfg.trion_parameters(tree)
    probe = cfg.probe_field(tree, params)
    spin = SpinState.up() if tree["budget"]["spin"] == "up" else SpinState.down()
    reports = []
    for beta in tree["budget"]["beta_sweep"]:
        p = replace(params, branching_ratio=beta)
        reports.append(backaction_budget(probe, spin, cfg.gate_voltage(tree), cfg.b_field(tree),
                                         p, cfg.efficiency(tree)))
    return reports


def cmd_budget(tree, threads=1):
    reports = budget_reports(tree)
    columns = ["branching_ratio", "photon_scatter_interval_us", "spin_flip_interval_ms",
               "theta_urad", "detected_flux", "t_snr1_s", "n_backaction_at_snr1",
               "qnd_margin", "order_constant"]
    rows = [[r.branching_ratio, r.photon_scatter_interval * 1e6, r.spin_flip_interval * 1e3,
             r.theta * 1e6, r.detected_flux, r.t_snr1, r.n_backaction_at_snr1, r.qnd_margin,
             r.order_constant] for r in reports]
    text = "\n\n".join(r.to_text() for r in reports)
    return sfio.Table("budget", tree, columns, rows, {"snr_convention": SNR_CONVENTION}), text


def run_trajectory(tree):
    params = cfg.trion_parameters(tree)
    probe = cfg.probe_field(tree, params)
    v, b = cfg.gate_voltage(tree), cfg.b_field(tree)
    rates = build_rates(params, probe, v, b, t1=cfg.t1(tree),
                        cotunneling_rate=cfg.cotunneling_model(tree).rate(v, params),
                        prep=cfg.prep_laser(tree, params))
    section = tree["trajectory"]
    initial = None if section["initial_spin"] == "steady" else section["initial_spin"]
    traj = simulate_trajectory(params, probe, v, b, rates,
                               units.ms_to_s(section["duration_ms"]),
                               units.ms_to_s(section["bin_ms"]),
                               efficiency=cfg.efficiency(tree), seed=tree["seed"],
                               initial_spin=initial, analysis_angle=cfg.analysis_angle(tree))
    return traj, rates


def cmd_trajectory(tree, threads=1):
    traj, rates = run_trajectory(tree)
    thr = tree["trajectory"]["fidelity_threshold"]
    meta = {"flip_up_to_down_per_s": rates.flip_up_to_down,
            "flip_down_to_up_per_s": rates.flip_down_to_up,
            "jumps": int(len(traj.jump_times))}
    report = ""
    if traj.n_bins >= 100:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fid = estimate_readout_fidelity(traj, None if thr == "auto" else thr)
        meta.update(fidelity=fid.fidelity, threshold=fid.threshold, degenerate=fid.degenerate)
        report = (f"readout fidelity = {fid.fidelity:.4f} (threshold {fid.threshold!r}"
                  f"{', degenerate trajectory' if fid.degenerate else ''})")
    else:
        report = f"fidelity not estimated: {traj.n_bins} bins (< 100)"
    table = sfio.Table("trajectory", tree, ["t_start", "hidden_spin", "diff_count", "sum_count"],
                       traj.rows(), meta)
    return table, report


RUNNERS = {
    "spectrum": cmd_spectrum,
    "map": cmd_map,
    "prepare": cmd_prepare,
    "budget": cmd_budget,
    "trajectory": cmd_trajectory,
}


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=default,
                        help="TOML config file (default: bundled defaults)")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=argparse.SUPPRESS if suppress else [],
                        help="override a config key (repeatable)")
    parser.add_argument("--out", metavar="PATH", default=default,
                        help="output file (.json for JSON, otherwise CSV)")
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("--replay", metavar="PATH", default=default,
                        help="re-run the command and config embedded in an output file")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spinfaraday",
        description="Dispersive (Faraday-rotation) readout of a quantum-dot spin.")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command")
    helps = {
        "spectrum": "1D sweep (default: probe detuning around the sigma- line)",
        "map": "2D gate-voltage x probe-detuning map",
        "budget": "shot-noise SNR and back-action budget",
        "prepare": "spin polarization and rotation angle vs. preparation detuning",
        "trajectory": "quantum-jump readout trajectory and fidelity",
        "selfcheck": "run the built-in invariant suite",
    }
    for name in COMMANDS:
        _common(sub.add_parser(name, help=helps[name]), suppress=True)
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.replay:
            command, tree = sfio.read_header(args.replay)
            if args.command and args.command != command:
                raise UsageError(f"--replay file was produced by {command!r}, "
                                 f"not {args.command!r}")
            run_cfg = cfg.RunConfig.from_tree(tree)
        else:
            command = args.command
            if command is None:
                parser.print_usage(stderr)
                stderr.write("spinfaraday: error: a subcommand or --replay is required\n")
                return EXIT_USAGE
            run_cfg = cfg.load_config(args.config)
            overrides = list(args.set or [])
            if args.seed is not None:
                overrides.append(f"seed={args.seed}")
            if overrides:
                run_cfg = run_cfg.with_overrides(overrides)
        tree = run_cfg.tree

        if command == "selfcheck":
            ok = run_selfcheck(tree, out=lambda line: stdout.write(line + "\n"))
            stdout.write("selfcheck: " + ("all checks passed\n" if ok else "FAILED\n"))
            return EXIT_OK if ok else EXIT_SELFCHECK

        result = RUNNERS[command](tree, threads=max(1, args.threads or 1))
        summary = ""
        if isinstance(result, tuple):
            result, summary = result
        text = sfio.write(result, args.out)
        if args.out is None:
            stdout.write(text)
        if summary:
            (stderr if args.out is None else stdout).write(summary + "\n")
        return EXIT_OK
    except UsageError as exc:
        stderr.write(f"spinfaraday: usage error: {exc}\n")
        return EXIT_USAGE
    except ConfigError as exc:
        stderr.write(f"spinfaraday: config error: {exc}\n")
        return exc.exit_code
    except (SpinFaradayError, ValueError, ArithmeticError) as exc:
        stderr.write(f"spinfaraday: runtime error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
