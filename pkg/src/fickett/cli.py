"""Command-line entry point: ``fickett <subcommand> <config> [options]``."""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .asymptotics import AsymptoticsError, closed_form_fire, compare_to_numerics, iterate_fire
from .characteristics import cplus_fan
from .fronts import (fire_trajectory, internal_shock_events, reaction_end_trajectory,
                     shock_trajectory, Trajectory)
from .regimes import classify, sweep
from .solver import SolverError, run

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args):
    cfg = fio.load_config(args.config)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.svg:
        overrides["emit_svg"] = True
    if args.frames:
        overrides["emit_snapshots"] = True
    if args.resolution is not None:
        overrides["points_per_unit"] = args.resolution
    if overrides:
        cfg = fio.config_from_dict({**fio.config_to_dict(cfg), **overrides})
    return cfg


def _report_dict(report) -> dict:
    d = dataclasses.asdict(report)
    d["params"] = dataclasses.asdict(report.params)
    return d


def _seeds(cfg):
    return [tuple(s) for s in cfg.seeds] or None


def _products(record, cfg, out: Path) -> dict:
    """Trajectories, C+ fan, regime report and diagram for one run."""
    events = internal_shock_events(record)
    fire = fire_trajectory(record)
    trajectories = {
        "shock": shock_trajectory(record),
        "fire": fire,
        "reaction_end": reaction_end_trajectory(record, cfg.reaction_end_threshold),
        "internal_shock": events.trajectory,
    }
    x = np.linspace(0.0, min(0.95, record.grid.length), 200)
    trajectories["analytic"] = Trajectory(x, closed_form_fire(x, cfg.Q, cfg.params.zeta), "analytic")
    fan = cplus_fan(record, seeds=_seeds(cfg), spacing=cfg.seed_spacing)
    if cfg.emit_trajectories or cfg.emit_diagram:
        fio.emit_diagram(record, trajectories, fan.paths, out,
                         svg=cfg.emit_diagram and cfg.emit_svg)
    if cfg.emit_snapshots:
        fio.emit_frames(record, out / "frames")
    report = classify(record)
    fio.write_json(out / "regime.json", _report_dict(report))
    return {"regime": report.regime, "fan_failures": [list(map(str, f)) for f in fan.failures]}


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    record = run(cfg.params, cfg.solver)
    fio.save_record(record, out / "record.npz")
    summary = _products(record, cfg, out)
    summary.update(n_steps=record.n_steps, t_end=record.t_end, n_frames=int(record.frame_times.size))
    fio.atomic_write_text(out / "config.json", fio.serialize_config(cfg))
    fio.write_json(out / "summary.json", summary)
    print(f"run complete: regime {summary['regime']}, outputs in {out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if not cfg.grid:
        raise UsageError("sweep needs a non-empty 'grid' of [K, epsilon] pairs")
    out = Path(cfg.out_dir)
    result = sweep(cfg.sweep_params(), cfg.solver, workers=cfg.workers)
    rows = {name: [] for name in ("K", "epsilon", "chi", "regime", "formation_x", "formation_t",
                                  "merge_x", "merge_t", "merge_speed", "speed_ratio_to_cj",
                                  "acceleration_fit")}
    for params, rep in zip(cfg.sweep_params(), result.reports):
        rows["K"].append(params.K)
        rows["epsilon"].append(params.epsilon)
        rows["chi"].append(params.chi)
        rows["regime"].append("failed" if rep is None else rep.regime)
        form = rep.internal_shock_formation if rep else None
        merge = rep.merge_event if rep else None
        rows["formation_x"].append(form[0] if form else None)
        rows["formation_t"].append(form[1] if form else None)
        rows["merge_x"].append(merge[0] if merge else None)
        rows["merge_t"].append(merge[1] if merge else None)
        rows["merge_speed"].append(merge[2] if merge else None)
        rows["speed_ratio_to_cj"].append(rep.speed_ratio_to_cj if rep else None)
        rows["acceleration_fit"].append(rep.fire_origin_acceleration_fit if rep else None)
    fio.write_columns(out / "regimes.csv", list(rows), list(rows.values()))
    fio.write_json(out / "sweep_failures.json",
                   [{"K": p.K, "epsilon": p.epsilon, "error": msg} for p, msg in result.failures])
    print(f"sweep complete: {len(result.reports)} runs, {len(result.failures)} failures, outputs in {out}")
    return EXIT_NUMERICAL if result.failures else EXIT_OK


def cmd_asymptotics(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    fire = iterate_fire(cfg.params, x_max=cfg.x_max, n_iter=cfg.n_iter, n_nodes=cfg.n_nodes)
    names = ["x", "t_closed_form"] + [f"t_iter{k}" for k in range(len(fire.iterates))]
    cols = [fire.x, closed_form_fire(fire.x, cfg.Q, cfg.params.zeta)] + [m.t for m in fire.iterates]
    fio.write_columns(out / "asymptotic_fire.csv", names, cols)
    fio.write_json(out / "asymptotics.json", {"a0": fire.a0, "cauchy_gaps": fire.cauchy_gaps(),
                                              "chi": cfg.params.chi, "x_max": cfg.x_max})
    print(f"asymptotics: a0={fire.a0:.6g}, last Cauchy gap {fire.cauchy_gaps()[-1]:.3e}")
    return EXIT_OK


def cmd_characteristics(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    record = fio.load_record(args.record) if args.record else run(cfg.params, cfg.solver)
    fan = cplus_fan(record, seeds=_seeds(cfg), spacing=cfg.seed_spacing)
    fio.write_paths(fan.paths, out / "cplus.csv")
    if cfg.emit_svg:
        trajectories = {"shock": shock_trajectory(record), "fire": fire_trajectory(record),
                        "reaction_end": reaction_end_trajectory(record, cfg.reaction_end_threshold)}
        fio.emit_diagram(record, trajectories, fan.paths, out, svg=True)
    fio.write_json(out / "fan_failures.json", [{"seed": list(s), "error": m} for s, m in fan.failures])
    print(f"traced {len(fan.paths)} paths ({len(fan.failures)} failed), outputs in {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    out = Path(cfg.out_dir)
    record = fio.load_record(args.record)
    params = record.params
    events = internal_shock_events(record)
    limit = events.formation[0] if events.found else None
    asym = iterate_fire(params, x_max=cfg.x_max, n_iter=cfg.n_iter, n_nodes=cfg.n_nodes)
    rep = compare_to_numerics(fire_trajectory(record), params, (0.0, cfg.compare_x_max), asym, limit)
    fio.write_columns(out / "compare.csv",
                      ("x", "t_numeric", "t_closed_form", "rel_closed_form", "t_iterate", "rel_iterate"),
                      [rep.x, rep.t_numeric, rep.t_closed_form, rep.rel_closed_form,
                       rep.t_iterate, rep.rel_iterate])
    summary = {"max_rel_closed_form": rep.max_rel_closed_form, "max_rel_iterate": rep.max_rel_iterate,
               "x_limit": limit}
    fio.write_json(out / "compare.json", summary)
    print(f"max relative deviation: closed form {rep.max_rel_closed_form:.4%}, "
          f"iterate {rep.max_rel_iterate:.4%}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fickett", description="Piston problem for the reactive Burgers model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output directory (overrides out_dir)")
        p.add_argument("--svg", action="store_true", help="also write an SVG t-x diagram")
        p.add_argument("--frames", action="store_true", help="write one file per stored frame")
        p.add_argument("--resolution", type=int, help="grid points per unit length")

    p = sub.add_parser("run", help="integrate one case and extract its fronts")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="classify every (K, epsilon) in the config grid")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("asymptotics", help="iterate the asymptotic fire trajectory")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_asymptotics)

    p = sub.add_parser("characteristics", help="trace a C+ fan")
    p.add_argument("config")
    p.add_argument("--record", help="stored run (.npz) to trace through; runs the case if absent")
    common(p)
    p.set_defaults(func=cmd_characteristics)

    p = sub.add_parser("compare", help="compare a stored run's fire with the asymptotics")
    p.add_argument("record")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, fio.ConfigError) as exc:
        print(f"fickett: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, AsymptoticsError, FloatingPointError) as exc:
        print(f"fickett: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"fickett: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"fickett: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
