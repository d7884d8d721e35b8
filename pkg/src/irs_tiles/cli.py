"""Command-line front end.

Subcommands write UTF-8 CSV with a ``#``-prefixed manifest header::

    irs-tiles sweep-response --config steer_30_45.ini --out steer_30_45.csv
    irs-tiles codebook --config codebook_5modes.ini --out codebook_5modes.csv
    irs-tiles e2e --config scenario.ini
    irs-tiles optimize --config scenario.ini --seed 7
    irs-tiles link-budget --rho-d 200 --rho-t 100 --rho-r 100 --freq 5e9
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import datetime as _dt
import math
import sys
from typing import Optional, Sequence

import numpy as np

from irs_tiles import __version__
from irs_tiles.channel import (
    ConfigurationError,
    apply_channel,
    end_to_end_matrix,
    matrix_to_csv_rows,
    required_irs_area,
)
from irs_tiles.codebook import mode_peak_direction
from irs_tiles.config import ConfigError, Experiment, config_hash, load
from irs_tiles.geometry import AnglePair, AngleTriple, WaveSpec
from irs_tiles.optimizer import SearchBudgetExceeded, exhaustive_search, greedy_search
from irs_tiles.response import TransmissionMode, response_db
from irs_tiles.sweeps import grid, response_model

SPEED_OF_LIGHT = 299_792_458.0
DB_NOTE = "g_abs_db = 20*log10(|g|/lambda)"


def manifest_lines(exp: Experiment) -> list[str]:
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return [
        f"# irs_tiles {__version__}",
        f"# config_sha256: {config_hash(exp)}",
        f"# rng_seed: {exp.seed}",
        f"# timestamp: {stamp}",
    ]


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load(args) -> Experiment:
    exp = load(args.config, angle_unit=args.angle_unit)
    if args.seed is not None:
        exp.seed = args.seed
    return exp


def _require(exp: Experiment, *names: str) -> None:
    for name in names:
        if getattr(exp, name) is None:
            raise ConfigError(f"{name} section is required for this command")


def _models(exp: Experiment, variants):
    return {
        v: response_model(v, exp.tile, exp.wave, exp.cell_spacing, exp.cell_edge, exp.gap_cell_edge)
        for v in variants
    }


def cmd_sweep_response(args) -> int:
    exp = _load(args)
    _require(exp, "tile", "sweep")
    sw = exp.sweep
    models = _models(exp, sw.variants)
    points = grid(sw.start, sw.stop, sw.step)
    column = "beta_bar_x" if sw.variable == "beta_x" else f"{sw.variable}_deg"
    with _output(args.out) as fh:
        for line in manifest_lines(exp) + [f"# {DB_NOTE}"]:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([column, "g_abs_db", "g_phase_rad", "variant"])
        for variant, model in models.items():
            for x in points:
                theta_t, theta_r, mode = sw.theta_t, sw.theta_r, sw.mode
                if sw.variable == "theta_r":
                    theta_r = float(x)
                elif sw.variable == "theta_t":
                    theta_t = float(x)
                else:
                    mode = TransmissionMode(float(x), mode.beta_bar_y, mode.beta_bar_0)
                g = model(AngleTriple(theta_t, sw.phi_t, sw.phi_pol), AnglePair(theta_r, sw.phi_r), mode)
                shown = float(x) if sw.variable == "beta_x" else math.degrees(x)
                writer.writerow([f"{shown:.6f}", f"{response_db(g, exp.wave):.6f}",
                                 f"{np.angle(g):.9f}", variant])
    return 0


def cmd_codebook(args) -> int:
    exp = _load(args)
    _require(exp, "tile", "sweep", "codebook")
    sw = exp.sweep
    model = _models(exp, sw.variants[:1])[sw.variants[0]]
    psi_t = AngleTriple(sw.theta_t, sw.phi_t, sw.phi_pol)
    thetas = grid(sw.start, sw.stop, sw.step)
    summary = []
    with _output(args.out) as fh:
        for line in manifest_lines(exp) + [f"# {DB_NOTE}", f"# model: {sw.variants[0]}",
                                           f"# phi_r_deg: {math.degrees(sw.phi_r):.6f}"]:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["mode_index", "theta_r_deg", "g_abs_db"])
        for m, mode in enumerate(exp.codebook.modes):
            dbs = []
            for th in thetas:
                db = response_db(model(psi_t, AnglePair(float(th), sw.phi_r), mode), exp.wave)
                dbs.append(db)
                writer.writerow([m, f"{math.degrees(th):.6f}", f"{db:.6f}"])
            peak = mode_peak_direction(mode, psi_t)
            predicted = "none" if peak is None else f"{math.degrees(peak.theta_r):.6f}"
            sweep_peak = math.degrees(thetas[int(np.argmax(dbs))])
            summary.append([m, repr(mode.beta_bar_x), repr(mode.beta_bar_y), predicted, f"{sweep_peak:.6f}"])
        fh.write("# summary\n")
        writer.writerow(["mode_index", "beta_bar_x", "beta_bar_y", "predicted_peak_deg", "sweep_peak_deg"])
        writer.writerows(summary)
    return 0


def cmd_e2e(args) -> int:
    exp = _load(args)
    scenario = exp.scenario()
    selection = exp.mode_selection()
    with _output(args.out) as fh:
        for line in manifest_lines(exp):
            fh.write(line + "\n")
        fh.write("# selection: " + " ".join(str(m) for m in selection.assignment) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        for j in range(len(scenario.receivers)):
            for i in range(len(scenario.transmitters)):
                H = end_to_end_matrix(j, i, selection, scenario)
                fh.write(f"# H rx={j} tx={i} shape={H.shape[0]}x{H.shape[1]} (re,im pairs, row-major)\n")
                writer.writerows(matrix_to_csv_rows(H))
        if exp.objective is not None and exp.objective.transmit is not None:
            xs = [np.asarray(exp.objective.transmit[i]) for i in range(len(scenario.transmitters))]
            received = apply_channel(selection, scenario, xs)
            fh.write("# received\n")
            writer.writerow(["rx", "antenna", "re", "im"])
            for j, y in enumerate(received):
                for a, v in enumerate(y):
                    writer.writerow([j, a, repr(float(v.real)), repr(float(v.imag))])
    return 0


def cmd_optimize(args) -> int:
    exp = _load(args)
    scenario = exp.scenario()
    objective = exp.objective_obj()
    spec = exp.objective
    algorithm = spec.algorithm if spec else "both"
    results = {}
    notes = []
    if algorithm in ("exhaustive", "both"):
        try:
            results["exhaustive"] = exhaustive_search(scenario, objective, spec.budget if spec else 10**6)
        except SearchBudgetExceeded as exc:
            notes.append(f"# exhaustive refused: {exc}")
            print(f"irs-tiles: exhaustive search refused: {exc}", file=sys.stderr)
    if algorithm in ("greedy", "both"):
        results["greedy"] = greedy_search(
            scenario, objective,
            passes=spec.passes if spec else 10,
            restarts=spec.restarts if spec else 0,
            seed=exp.seed,
        )
    with _output(args.out) as fh:
        for line in manifest_lines(exp) + [f"# objective: {objective.kind}"] + notes:
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["algorithm", "objective_value", "evaluations", "selection"])
        for name, res in results.items():
            writer.writerow([name, repr(res.objective_value), res.evaluations,
                             " ".join(str(m) for m in res.selection.assignment)])
        if "exhaustive" in results and "greedy" in results:
            ex, gr = results["exhaustive"].objective_value, results["greedy"].objective_value
            fh.write("# comparison\n")
            writer.writerow(["greedy_objective", "exhaustive_objective", "greedy_to_exhaustive"])
            writer.writerow([repr(gr), repr(ex), repr(gr / ex) if ex > 0 else "1.0"])
    if args.out not in (None, "-"):
        for res in results.values():
            sys.stdout.write(res.to_record())
    return 0


def link_budget_report(rho_d: float, rho_t: float, rho_r: float, freq: float,
                       cell_spacing: float = 0.5) -> dict:
    """Area and unit-cell count for equal direct and IRS-assisted path loss.

    ``cell_spacing`` is in wavelengths.
    """
    for name, value in (("rho_d", rho_d), ("rho_t", rho_t), ("rho_r", rho_r),
                        ("freq", freq), ("cell_spacing", cell_spacing)):
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive, got {value!r}")
    wave = WaveSpec(SPEED_OF_LIGHT / freq)
    area = required_irs_area(rho_d, rho_t, rho_r, wave)
    cell = cell_spacing * wave.wavelength
    return {"wavelength_m": wave.wavelength, "area_m2": area, "unit_cells": area / cell**2}


def cmd_link_budget(args) -> int:
    report = link_budget_report(args.rho_d, args.rho_t, args.rho_r, args.freq, args.cell_spacing)
    text = (
        f"wavelength_m = {report['wavelength_m']:.6g}\n"
        f"required_area_m2 = {report['area_m2']:.6g}\n"
        f"cell_spacing_wavelengths = {args.cell_spacing:g}\n"
        f"required_unit_cells = {report['unit_cells']:.1f}\n"
    )
    with _output(args.out) as fh:
        fh.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="override the config seed")
    units = common.add_mutually_exclusive_group()
    units.add_argument("--degrees", dest="angle_unit", action="store_const", const="deg",
                       help="config angles are in degrees (default)")
    units.add_argument("--radians", dest="angle_unit", action="store_const", const="rad",
                       help="config angles are in radians")
    common.set_defaults(angle_unit="deg")

    parser = argparse.ArgumentParser(prog="irs-tiles", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"irs_tiles {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("sweep-response", cmd_sweep_response, "tile response vs. one swept variable"),
        ("codebook", cmd_codebook, "per-mode angle sweeps and peak summary"),
        ("e2e", cmd_e2e, "end-to-end channel matrices for a mode selection"),
        ("optimize", cmd_optimize, "select one mode per tile"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--config", required=True)
        p.set_defaults(func=fn)
    p = sub.add_parser("link-budget", parents=[common], help="IRS size for path-loss parity")
    p.add_argument("--rho-d", type=float, required=True, help="transmitter-receiver distance, m")
    p.add_argument("--rho-t", type=float, required=True, help="transmitter-IRS distance, m")
    p.add_argument("--rho-r", type=float, required=True, help="IRS-receiver distance, m")
    p.add_argument("--freq", type=float, required=True, help="carrier frequency, Hz")
    p.add_argument("--cell-spacing", type=float, default=0.5, help="unit-cell spacing in wavelengths")
    p.set_defaults(func=cmd_link_budget)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError, ValueError, OSError) as exc:
        print(f"irs-tiles {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
