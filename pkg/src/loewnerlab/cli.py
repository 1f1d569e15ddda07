"""Command-line entry point: reproducible runs with file I/O and figures.

Exit codes: 0 success, 2 input error, 3 domain error (self-intersection or
certificate refusal), 4 internal tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as lio
from . import plots
from .core import Trace, compute_trace
from .driver import zero_driver
from .errors import DomainError, InputError, ToleranceError
from .grid import uniform_grid
from .support import (certify_closeness, christmas_tree, support_probe,
                      wong_zakai_experiment)
from .zipper import zip_curve

EXPERIMENTS = ("wong-zakai", "support-probe", "christmas-tree", "certify")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loewner-lab",
                                description="Chordal Loewner evolution toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trace", help="synthesize a trace from a driver CSV")
    t.add_argument("--driver", required=True, help="driver CSV (t,value) with JSON sidecar")
    t.add_argument("--resolution", type=int, default=512, help="output cells")
    t.add_argument("--y0", type=float, default=None, help="tip evaluation offset")
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--no-svg", action="store_true", help="skip figure emission")
    t.set_defaults(func=cmd_trace)

    z = sub.add_parser("zip", help="recover a driver from a curve CSV")
    z.add_argument("--curve", required=True, help="trace CSV (t,re,im) or polyline (re,im)")
    z.add_argument("--out", required=True, help="output directory")
    z.add_argument("--no-svg", action="store_true")
    z.set_defaults(func=cmd_zip)

    e = sub.add_parser("experiment", help="run a named experiment")
    e.add_argument("name", choices=EXPERIMENTS)
    e.add_argument("--config", help="JSON config file; flags override its entries")
    e.add_argument("--kappa", type=float)
    e.add_argument("--seed", type=int)
    e.add_argument("--n", type=int)
    e.add_argument("--epsilon", type=float)
    e.add_argument("--a", type=float, dest="a")
    e.add_argument("--tol", type=float)
    e.add_argument("--xi", help="driver CSV for the certified path")
    e.add_argument("--lam", help="driver CSV for the reference path")
    e.add_argument("--out", required=True)
    e.add_argument("--no-svg", action="store_true")
    e.set_defaults(func=cmd_experiment)
    return p


def _echo_config(out: Path, payload: dict):
    lio.write_report(out / "config.json", payload)


def cmd_trace(args) -> int:
    out = Path(args.out)
    d = lio.read_driver(args.driver)
    grid = uniform_grid(args.resolution, d.t_end)
    tr = compute_trace(d, out_grid=grid, y0=args.y0)
    ref = lio.content_hash(args.driver)
    tr = Trace(tr.grid, tr.points, err_est=tr.err_est, y0=tr.y0, driver_ref=ref)
    lio.write_trace(out / "trace.csv", tr, extra_meta={
        "driver_file": str(args.driver), "resolution": args.resolution})
    _echo_config(out, {"command": "trace", "driver": str(args.driver),
                       "driver_hash": ref, "resolution": args.resolution,
                       "y0": tr.y0})
    if not args.no_svg:
        plots.plot_trace(out / "trace.svg", [tr], labels=["trace"],
                         title=f"trace of {Path(args.driver).name}")
    print(f"trace: {len(tr.grid)} points, tip {tr.points[-1]:.6g} -> {out / 'trace.csv'}")
    return 0


def cmd_zip(args) -> int:
    out = Path(args.out)
    curve = lio.read_curve(args.curve)
    d, times = zip_curve(curve)
    lio.write_driver(out / "driver.csv", d)
    _echo_config(out, {"command": "zip", "curve": str(args.curve),
                       "curve_hash": lio.content_hash(args.curve)})
    if not args.no_svg:
        plots.plot_driver(out / "driver.svg", [d], labels=["recovered driver"])
    print(f"zip: capacity {2 * times[-1]:.6g}, sup|driver| "
          f"{np.max(np.abs(d.values)):.6g} -> {out / 'driver.csv'}")
    return 0


def _merged_config(args, defaults: dict) -> dict:
    cfg = dict(defaults)
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"config {args.config}: {exc}") from None
    for key in ("kappa", "seed", "n", "epsilon", "a", "tol", "xi", "lam"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def cmd_experiment(args) -> int:
    out = Path(args.out)
    name = args.name
    svg = not args.no_svg

    if name == "wong-zakai":
        cfg = _merged_config(args, {"kappa": 2.0, "seed": 1, "n": 512,
                                    "n_list": [16, 64, 256, 512]})
        rep = wong_zakai_experiment(cfg["kappa"], int(cfg["seed"]), cfg["n_list"],
                                    out_cells=int(cfg["n"]))
        lio.write_report(out / "report.json", rep.to_dict())
        _echo_config(out, cfg)
        rows = [(n, d) for n, d in sorted(rep.results["distances"].items(),
                                          key=lambda kv: int(kv[0]))]
        lio.write_table(out / "distances.csv", ["n", "sup_distance"], rows)
        if svg:
            plots.plot_distance_decay(out / "decay.svg",
                                      [int(n) for n, _ in rows], [d for _, d in rows],
                                      "interpolation cells n", "sup distance",
                                      title="piecewise-linear driver convergence")
        print(f"wong-zakai: distances {rep.results['distances']}")
        return 0

    if name == "support-probe":
        cfg = _merged_config(args, {"kappa": 2.0, "epsilon": 0.5, "n": 1000,
                                    "seed": 1, "cells": 256})
        lam = lio.read_driver(cfg["lam"]) if cfg.get("lam") else zero_driver()
        rep = support_probe(cfg["kappa"], lam, cfg["epsilon"], int(cfg["n"]),
                            int(cfg["seed"]), n_cells=int(cfg["cells"]))
        lio.write_report(out / "report.json", rep.to_dict())
        _echo_config(out, cfg)
        lio.write_table(out / "hits.csv", ["hits", "n_samples", "p_hat", "ci_lo", "ci_hi"],
                        [(rep.results["hits"], rep.results["n_samples"],
                          rep.results["p_hat"], rep.results["ci95"][0],
                          rep.results["ci95"][1])])
        if svg:
            grid = uniform_grid(int(cfg["cells"]), 1.0)
            ref = compute_trace(lam, grid)
            plots.plot_trace(out / "target.svg", [ref], labels=["reference"],
                             epsilon=cfg["epsilon"],
                             title=f"target tube, eps={cfg['epsilon']}")
        print(f"support-probe: {rep.results['hits']}/{rep.results['n_samples']} hits, "
              f"CI {rep.results['ci95']}")
        return 0

    if name == "christmas-tree":
        cfg = _merged_config(args, {"n": 16})
        curve, driver, rep = christmas_tree(int(cfg["n"]))
        lio.write_report(out / "report.json", rep.to_dict())
        _echo_config(out, cfg)
        lio.write_driver(out / "driver.csv", driver)
        res = rep.results
        lio.write_table(out / "metrics.csv",
                        ["n", "sup_driver", "fitted_c", "sup_distance", "strong_distance"],
                        [(res["n"], res["sup_driver"], res["driver_bound_constant"],
                          res["sup_distance"], res["strong_distance"])])
        if svg:
            grid = uniform_grid(512, 1.0)
            from .zipper import reparam_by_hcap
            tree = reparam_by_hcap(curve, grid)
            slit = Trace(grid, 2j * np.sqrt(grid.times))
            plots.plot_trace(out / "tree.svg", [tree, slit],
                             labels=[f"comb n={cfg['n']}", "slit 2i sqrt(t)"],
                             title="set-close, path-far")
        print(f"christmas-tree: sup driver {res['sup_driver']:.4g}, "
              f"sup dist {res['sup_distance']:.4g}, strong dist {res['strong_distance']:.4g}")
        return 0

    if name == "certify":
        cfg = _merged_config(args, {"a": 1.0})
        if not cfg.get("xi") or not cfg.get("lam"):
            raise InputError("certify needs --xi and --lam driver files")
        xi = lio.read_driver(cfg["xi"])
        lam = lio.read_driver(cfg["lam"])
        rep = certify_closeness(xi, lam, float(cfg["a"]))
        lio.write_report(out / "report.json", rep.to_dict())
        _echo_config(out, cfg)
        if rep.conditions:
            lio.write_table(out / "conditions.csv",
                            ["k", "t_left", "t_right", "c", "eps", "gap", "gap_ok"],
                            [(c.k, c.t_left, c.t_right, c.c, c.eps, c.gap, c.gap_ok)
                             for c in rep.conditions])
            if svg:
                plots.plot_schedule(out / "schedule.svg", rep)
        if rep.refusal:
            print(f"certify: refused ({rep.refusal})", file=sys.stderr)
            return 3
        print(f"certify: certified={rep.certified}, bound {rep.bound:.4g}, "
              f"measured {rep.measured_sup:.4g}")
        return 0

    raise InputError(f"unknown experiment {name!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToleranceError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 4
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
