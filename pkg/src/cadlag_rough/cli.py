"""Command line front end.

Five subcommands: simulate a model to a path CSV, lift a path CSV to a
level-2 rough path, solve an RDE along a driver, evaluate metrics between
paths, and run a named experiment with its report files.  Exit status is 0
on success; `experiment` exits 1 when an experiment rule fails so shell
pipelines can gate on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .cadlag import (hoff_phi, linear_phi, loglinear_phi, read_path_csv,
                     write_path_csv, _write_table)
from .lift import interpolate_rough, marcus_lift, write_rough_csv
from .metrics import (alpha_estimate, beta_estimate, osc_count_bound, pvar,
                      rho_pvar, sigma_estimate)
from .rde import fields_from_spec, solve_canonical_rde, solve_marcus_sde
from .harness import EXPERIMENTS, default_spec, run_experiment
from .stochastic import model_from_spec, simulate

_PHI = {"linear": linear_phi, "loglinear": loglinear_phi, "hoff": hoff_phi}


def _phi_by_name(name: str):
    try:
        return _PHI[name]()
    except KeyError:
        raise SystemExit(f"unknown path function {name!r}; "
                         f"choose from {sorted(_PHI)}")


def _load_spec_arg(text: str):
    """JSON object given inline or as a file path."""
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise SystemExit(f"{text!r} is neither a file nor valid JSON")


def _floats(text: str) -> np.ndarray:
    return np.asarray([float(v) for v in text.split(",") if v.strip()])


def _out_path(args, default_name: str) -> str:
    if args.out:
        return args.out
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, default_name)


def cmd_simulate(args) -> int:
    model = model_from_spec(_load_spec_arg(args.model))
    sp = simulate(model, args.n, args.seed, index=args.index)
    out = _out_path(args, "path.csv")
    write_path_csv(sp.path, out)
    print(f"simulated {model.name} n={sp.path.n} d={sp.path.d} "
          f"jumps={len(sp.path.jump_indices())} -> {out}")
    return 0


def cmd_lift(args) -> int:
    path = read_path_csv(args.infile)
    rough = marcus_lift(path)
    if args.interpolate:
        phi = _phi_by_name(args.phi)
        rough, _ = interpolate_rough(rough, phi, delta=args.delta)
    out = _out_path(args, "lift.csv")
    write_rough_csv(rough, out)
    print(f"lifted {args.infile} n={rough.n} d={rough.d} -> {out}")
    return 0


def cmd_solve(args) -> int:
    path = read_path_csv(args.driver)
    fields = fields_from_spec(
        args.fields if args.fields.startswith("builtin:")
        else _load_spec_arg(args.fields))
    y0 = _floats(args.y0)
    if args.phi == "marcus":
        sol = solve_marcus_sde(path, fields, y0,
                               base_substeps=args.base_substeps)
    else:
        sol = solve_canonical_rde(marcus_lift(path), _phi_by_name(args.phi),
                                  fields, y0,
                                  base_substeps=args.base_substeps)
    out = _out_path(args, "solution.csv")
    cols = ["t"] + [f"y{k + 1}" for k in range(sol.states.shape[1])]
    arrays = [sol.times] + [sol.states[:, k]
                            for k in range(sol.states.shape[1])]
    with open(out, "w") as fh:
        _write_table(fh, cols, arrays)
    print(f"solved {fields.name} along {args.driver}: "
          f"y_end={np.array2string(sol.y_end, precision=8)} -> {out}")
    return 0


def cmd_metric(args) -> int:
    two = {"rho", "sigma", "alpha", "beta"}
    if args.metric in two and len(args.inputs) < 2:
        raise SystemExit(f"metric {args.metric} needs two input paths")
    a = read_path_csv(args.inputs[0])
    b = read_path_csv(args.inputs[1]) if len(args.inputs) > 1 else None
    deltas = tuple(_floats(args.delta_levels))
    if args.p is None:
        # uniform-distance metrics default to p = inf, variation ones to 2.5
        args.p = math.inf if args.metric in ("sigma", "alpha") else 2.5
    if args.metric == "pvar":
        value = pvar(marcus_lift(a) if args.lift else a, args.p)
        report = {"metric": "pvar", "p": args.p, "value": value}
    elif args.metric == "osc":
        value = osc_count_bound(a, args.p)
        report = {"metric": "osc_count_bound", "p": args.p, "value": value}
    elif args.metric == "rho":
        value = rho_pvar(marcus_lift(a), marcus_lift(b), args.p,
                         resample=True)
        report = {"metric": "rho_pvar", "p": args.p, "value": value}
    elif args.metric == "sigma":
        rep = sigma_estimate(marcus_lift(a), marcus_lift(b), p=args.p)
        value, report = rep.value, rep.to_dict()
    elif args.metric in ("alpha", "beta"):
        est = alpha_estimate if args.metric == "alpha" else beta_estimate
        phi = _phi_by_name(args.phi)
        phi_bar = _phi_by_name(args.phi_bar) if args.phi_bar else None
        rep = est(a, phi, b, phi_bar, p=args.p, deltas=deltas)
        value, report = rep.value, rep.to_dict()
    else:
        raise SystemExit(f"unknown metric {args.metric!r}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, default=str)
            fh.write("\n")
    print(f"{args.metric} = {value:.12g}")
    return 0


def cmd_experiment(args) -> int:
    spec = default_spec(args.name, seed=args.seed, threads=args.threads,
                        out_dir=args.out_dir)
    if args.samples is not None:
        spec.samples = args.samples
    if args.meshes:
        spec.meshes = [int(v) for v in _floats(args.meshes)]
    for text in args.option or []:
        key, _, raw = text.partition("=")
        try:
            spec.options[key] = json.loads(raw)
        except json.JSONDecodeError:
            spec.options[key] = raw
    rep = run_experiment(spec)
    for rule in rep.rules:
        print(f"[{'PASS' if rule['passed'] else 'FAIL'}] {rule['rule']}")
    print(f"experiment {rep.name}: "
          f"{'all rules passed' if rep.passed else 'RULES FAILED'} "
          f"({rep.runtime_s:.1f}s) -> {args.out_dir}/report.json")
    return 0 if rep.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cadlag-rough",
        description="rough-path numerics for paths with jumps")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out-dir", default=".",
                        help="directory for default output locations")

    ps = sub.add_parser("simulate", help="sample a stochastic model to CSV")
    common(ps)
    ps.add_argument("--model", required=True,
                    help="model config: JSON file or inline JSON")
    ps.add_argument("--n", type=int, default=257,
                    help="number of regular grid samples")
    ps.add_argument("--index", type=int, default=0,
                    help="stream index (independent sample per index)")
    ps.add_argument("--out", help="output CSV path")
    ps.set_defaults(fn=cmd_simulate)

    pl = sub.add_parser("lift", help="level-2 lift of a path CSV")
    common(pl)
    pl.add_argument("infile")
    pl.add_argument("--interpolate", action="store_true",
                    help="interpolate jumps before writing")
    pl.add_argument("--phi", default="loglinear",
                    choices=sorted(_PHI))
    pl.add_argument("--delta", type=float, default=1.0)
    pl.add_argument("--out", help="output CSV path")
    pl.set_defaults(fn=cmd_lift)

    pv = sub.add_parser("solve", help="solve an RDE along a driver CSV")
    common(pv)
    pv.add_argument("--driver", required=True)
    pv.add_argument("--phi", default="marcus",
                    choices=["marcus"] + sorted(_PHI),
                    help="jump traversal: marcus scheme or a path function")
    pv.add_argument("--fields", required=True,
                    help="builtin:<name>, JSON file, or inline JSON")
    pv.add_argument("--y0", required=True, help="comma separated start")
    pv.add_argument("--base-substeps", type=int, default=4)
    pv.add_argument("--out", help="output CSV path")
    pv.set_defaults(fn=cmd_solve)

    pm = sub.add_parser("metric", help="distances and variation functionals")
    common(pm)
    pm.add_argument("--metric", required=True,
                    choices=["pvar", "osc", "rho", "sigma", "alpha", "beta"])
    pm.add_argument("--p", type=float,
                    help="variation exponent; inf for uniform distance "
                         "(default: inf for sigma/alpha, 2.5 otherwise)")
    pm.add_argument("--in", dest="inputs", nargs="+", required=True,
                    metavar="CSV")
    pm.add_argument("--lift", action="store_true",
                    help="pvar of the level-2 lift instead of the path")
    pm.add_argument("--phi", default="linear", choices=sorted(_PHI))
    pm.add_argument("--phi-bar", choices=sorted(_PHI))
    pm.add_argument("--delta-levels", default="1.0,0.5,0.25,0.125")
    pm.add_argument("--out", help="write the full report as JSON")
    pm.set_defaults(fn=cmd_metric)

    pe = sub.add_parser("experiment", help="run a named experiment")
    common(pe)
    pe.add_argument("--name", required=True, choices=sorted(EXPERIMENTS))
    pe.add_argument("--samples", type=int)
    pe.add_argument("--meshes", help="comma separated cell counts")
    pe.add_argument("--option", action="append", metavar="KEY=JSON",
                    help="override an experiment option")
    pe.set_defaults(fn=cmd_experiment)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
