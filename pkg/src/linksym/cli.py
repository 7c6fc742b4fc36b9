"""Command-line entry point."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import ExperimentConfig, format_index, load_configs, normalized_index, results_csv, run_matrix
from .lifting import LiftingConfig, lift
from .linkage import LinkageError, load_linkage, simulate
from .metrics import score
from .optimizers import Budget, LinkageObjective, budget_sweep, default_space, enum_ga, format_sweep, grid_search, pso
from .plotting import render_mechanism
from .targets import make_target, read_csv, write_csv


def _target(spec: str, n_points: int):
    """A shape name or a path to an x,y CSV file."""
    p = Path(spec)
    if p.suffix == ".csv" and p.exists():
        return read_csv(p)
    return make_target(spec, n_points)


def cmd_run(args) -> int:
    if args.config:
        configs = load_configs(args.config)
    else:
        configs = [ExperimentConfig(shape=args.shape, optimizer=args.optimizer, samples=args.samples, seed=args.seed)]
    rows = run_matrix(configs, args.out, workers=args.workers)
    sys.stdout.write(results_csv(rows))
    return 0


def cmd_target(args) -> int:
    traj = make_target(args.shape, args.n_points)
    if args.out:
        write_csv(traj, args.out)
    else:
        for x, y in traj.samples:
            print(f"{float(x)!r},{float(y)!r}")
    return 0


def cmd_simulate(args) -> int:
    lk = load_linkage(args.linkage)
    sim = simulate(lk, args.steps)
    info = {
        "name": lk.name,
        "dof": sim.dof,
        "links": sim.n_links,
        "joints": sim.n_joints,
        "buildable": sim.buildable,
        "diagnostics": [str(d) for d in sim.diagnostics],
    }
    if sim.buildable and args.target:
        info["chamfer"] = score(sim.effector.samples, _target(args.target, args.n_points).samples).chamfer
    print(json.dumps(info, indent=2))
    if args.svg:
        target = _target(args.target, args.n_points) if args.target else None
        render_mechanism(lk, sim, args.svg, target=target)
    return 0 if sim.buildable else 1


def cmd_lift(args) -> int:
    lk = load_linkage(args.linkage)
    target = _target(args.target, args.n_points)
    sim = simulate(lk, args.steps)
    sc = score(sim.effector.samples, target.samples) if sim.buildable else None
    bundle = lift(sim, target, LiftingConfig(dr=not args.no_dr, cl=not args.no_cl, seed=args.seed), sc.transform if sc else None)
    print(bundle.to_json() if args.json else bundle.to_text())
    return 0


def cmd_optimize(args) -> int:
    lk = load_linkage(args.linkage)
    target = _target(args.target, args.n_points)
    space = default_space(lk)
    obj = LinkageObjective(lk, space, target, args.steps)
    if args.method == "grid":
        res = grid_search(obj, space, args.resolution)
    else:
        res = pso(obj, space, Budget.parse(args.budget), seed=args.seed, init=space.values_of(lk))
    best = obj.linkage(res.best_params)
    if args.trace:
        res.write_trace(args.trace)
    if args.out:
        Path(args.out).write_text(best.to_json(indent=2), encoding="utf-8")
    print(json.dumps({"best_value": res.best_value, "evaluations": res.n_evals, "params": dict(zip(space.ids, res.best_params.tolist()))}, indent=2))
    return 0


def cmd_baseline(args) -> int:
    target = _target(args.target, args.n_points)
    if args.sweep:
        budgets = [Budget.parse(b) for b in args.sweep]
        rows = budget_sweep({args.target: target}, budgets, tuple(args.bars), tuple(args.seeds))
        sys.stdout.write(format_sweep(rows))
        return 0
    res = enum_ga(target, args.bars[0], Budget.parse(args.budget), args.seeds[0])
    if args.out:
        Path(args.out).write_text(res.best_linkage.to_json(indent=2), encoding="utf-8")
    print(json.dumps({"best_value": res.best_value, "linkage": res.best_linkage.name, "trace": res.trace}, indent=2))
    return 0


def cmd_index(args) -> int:
    for v, r in zip(args.values, format_index(normalized_index(args.values, args.baseline))):
        print(f"{v!r},{r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linksym", description="Linkage synthesis with symbolic feedback.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def shared(sp, target_required=True):
        sp.add_argument("--target", required=target_required, help="shape name or x,y CSV file")
        sp.add_argument("--n-points", type=int, default=100)
        sp.add_argument("--steps", type=int, default=100)

    r = sub.add_parser("run", help="run an experiment matrix")
    r.add_argument("--config", help="JSON list of experiment records")
    r.add_argument("--out", required=True)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--shape", default="line")
    r.add_argument("--optimizer", default="grid", choices=["grid", "pso"])
    r.add_argument("--samples", type=int, default=5)
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("target", help="write a normalized target curve")
    t.add_argument("shape")
    t.add_argument("--n-points", type=int, default=100)
    t.add_argument("--out")
    t.set_defaults(func=cmd_target)

    s = sub.add_parser("simulate", help="simulate a linkage JSON file")
    s.add_argument("linkage")
    shared(s, target_required=False)
    s.add_argument("--svg")
    s.set_defaults(func=cmd_simulate)

    lf = sub.add_parser("lift", help="print the representation bundle")
    lf.add_argument("linkage")
    shared(lf)
    lf.add_argument("--no-dr", action="store_true")
    lf.add_argument("--no-cl", action="store_true")
    lf.add_argument("--seed", type=int, default=0)
    lf.add_argument("--json", action="store_true")
    lf.set_defaults(func=cmd_lift)

    o = sub.add_parser("optimize", help="fit the parameters of one linkage")
    o.add_argument("linkage")
    shared(o)
    o.add_argument("--method", choices=["grid", "pso"], default="grid")
    o.add_argument("--resolution", type=int, default=5)
    o.add_argument("--budget", default="30x100")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--trace")
    o.add_argument("--out")
    o.set_defaults(func=cmd_optimize)

    b = sub.add_parser("baseline", help="Enum+GA baseline")
    b.add_argument("--target", required=True)
    b.add_argument("--n-points", type=int, default=100)
    b.add_argument("--bars", type=int, nargs="+", default=[4])
    b.add_argument("--budget", default="3x20")
    b.add_argument("--seeds", type=int, nargs="+", default=[0])
    b.add_argument("--sweep", nargs="+", metavar="PxG", help="budgets to sweep, e.g. 3x20 6x20")
    b.add_argument("--out")
    b.set_defaults(func=cmd_baseline)

    ix = sub.add_parser("index", help="normalize values by a baseline")
    ix.add_argument("--baseline", type=float, required=True)
    ix.add_argument("values", type=float, nargs="+")
    ix.set_defaults(func=cmd_index)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (LinkageError, ValueError, OSError) as e:
        print(f"linksym: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
