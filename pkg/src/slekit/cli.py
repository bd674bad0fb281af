"""Command-line entry point.

Every experiment and formula is reachable through a subcommand; artifacts
(CSV/JSON) go to --out, a one-line JSON summary goes to stdout, and all
randomness flows from --seed (a fixed default, never the clock).  Exit codes:
0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

DEFAULT_SEED = 20260125


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {obj!r}")


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True, default=_json_default))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(args, t0: float, artifacts: list, extra: dict) -> int:
    payload = {
        "subcommand": args.subcommand,
        "seed": args.seed,
        "wall_time_s": round(time.time() - t0, 3),
        "artifact_paths": [str(p) for p in artifacts],
    }
    payload.update(extra)
    _emit(payload)
    return 0


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=None,
                    help=f"master seed (default {DEFAULT_SEED})")
    sp.add_argument("--threads", type=int, default=None, help="worker count")
    sp.add_argument("--out", type=str, default=None, help="artifact directory")
    sp.add_argument("--config", type=str, default=None,
                    help="JSON config file (flags override it)")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slekit",
                                description="Loewner-evolution simulation toolkit")
    sub = p.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("trace", help="chordal trace CSV")
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--sample-every", type=int, default=None)
    _add_common(sp)

    sp = sub.add_parser("sle-sample", help="sampled driving path CSV")
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--kind", choices=["chordal", "radial"], default="chordal")
    _add_common(sp)

    sp = sub.add_parser("side-hit", help="boundary side-hitting experiment")
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--a", type=float, default=-1.0)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=4000)
    sp.add_argument("--dt", type=float, default=2e-4)
    _add_common(sp)

    sp = sub.add_parser("radial-survival", help="weighted boundary survival")
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--x", type=float, default=math.pi)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--trials", type=int, default=20000)
    _add_common(sp)

    sp = sub.add_parser("lerw", help="loop-erased exit walk on a disc")
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--mesh", type=float, default=0.05)
    _add_common(sp)

    sp = sub.add_parser("ust", help="wired uniform spanning tree sample")
    sp.add_argument("--width", type=int, default=16)
    sp.add_argument("--height", type=int, default=16)
    _add_common(sp)

    sp = sub.add_parser("peano", help="spanning-tree contour path")
    sp.add_argument("--width", type=int, default=8)
    sp.add_argument("--height", type=int, default=8)
    _add_common(sp)

    sp = sub.add_parser("perco-cross", help="rhombus crossing probability")
    sp.add_argument("--side", type=int, default=64)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--trials", type=int, default=10000)
    _add_common(sp)

    sp = sub.add_parser("cardy", help="triangle crossing probabilities")
    sp.add_argument("--side", type=int, default=64)
    sp.add_argument("--fractions", type=float, nargs="+",
                    default=[0.25, 0.5, 0.75])
    sp.add_argument("--trials", type=int, default=10000)
    _add_common(sp)

    sp = sub.add_parser("arms", help="one-arm decay over annulus radii")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--scales", type=int, nargs="+", default=[8, 16, 32, 64])
    sp.add_argument("--trials", type=int, default=4000)
    _add_common(sp)

    sp = sub.add_parser("wedge", help="wedge-walk hitting histogram")
    sp.add_argument("--n", type=int, default=30)
    sp.add_argument("--walks", type=int, default=100000)
    _add_common(sp)

    sp = sub.add_parser("excursion", help="half-plane excursion avoidance")
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=2000)
    sp.add_argument("--dt", type=float, default=1e-3)
    _add_common(sp)

    sp = sub.add_parser("disconnect", help="walk non-disconnection decay")
    sp.add_argument("--scales", type=int, nargs="+", default=[4, 8, 16, 32])
    sp.add_argument("--mesh", type=int, default=8)
    sp.add_argument("--trials", type=int, default=20000)
    _add_common(sp)

    sp = sub.add_parser("nonintersect", help="two-walk avoidance decay")
    sp.add_argument("--log2-scales", type=int, nargs="+",
                    default=[6, 7, 8, 9, 10, 11, 12])
    sp.add_argument("--trials", type=int, default=20000)
    _add_common(sp)

    sp = sub.add_parser("exponents", help="closed-form exponent table (JSON)")
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--n", type=int, default=1)
    _add_common(sp)

    sp = sub.add_parser("formulas", help="evaluate one closed-form oracle")
    sp.add_argument("--name", required=True,
                    choices=["hitting-cdf", "cardy", "winding", "avoid",
                             "slit-deriv", "smirnov-h1"])
    sp.add_argument("--kappa", type=float, default=6.0)
    sp.add_argument("--z", type=float, default=0.5)
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--exponent", type=float, default=0.625)
    sp.add_argument("--re", type=float, default=0.5)
    sp.add_argument("--im", type=float, default=0.5)
    _add_common(sp)

    sp = sub.add_parser("removal-map", help="hull-removal map evolution")
    sp.add_argument("--kappa", type=float, default=0.0)
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--t", type=float, default=0.25)
    sp.add_argument("--dt", type=float, default=2.5e-4)
    _add_common(sp)

    return p


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    """Config-file values fill in wherever flags were left at their default.

    Precedence: explicit flags > config file > built-in defaults.
    """
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        known = set(vars(args))
        for key in cfg:
            dest = key.replace("-", "_")
            if dest not in known:
                raise KeyError(key)
    argv_flags = {a.split("=")[0] for a in sys.argv[1:] if a.startswith("--")}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if f"--{key}" not in argv_flags:
            setattr(args, dest, value)
    if args.seed is None:
        args.seed = DEFAULT_SEED
    if args.threads is None:
        args.threads = 1
    if args.out is None:
        args.out = "slekit-out"


def run(args) -> int:
    from . import formulas, lattice, loewner, models, montecarlo, sle
    from .conformal import SlitParams
    from .seeds import child_rng

    t0 = time.time()
    out = _out_dir(args)
    cmd = args.subcommand

    if cmd == "exponents":
        tab = formulas.exponent_table(args.kappa, b=args.b, k=args.k, n=args.n)
        payload = {
            "subcommand": cmd, "seed": args.seed,
            "wall_time_s": round(time.time() - t0, 3), "artifact_paths": [],
            "kappa": tab.kappa, "b": tab.b, "k": tab.k, "n": tab.n,
            "q0": tab.q0, "lambda0": tab.lambda0, "q": tab.q,
            "lambda": tab.lam, "eta_k": tab.eta_k, "xi_k": tab.xi_k,
            "alpha_n": tab.alpha_n, "bessel_dim": tab.bessel_dim,
            "xi_halfplane_pair": tab.xi_halfplane_pair,
        }
        _emit(payload)
        return 0

    if cmd == "formulas":
        if args.name == "hitting-cdf":
            value = formulas.hitting_cdf(args.kappa, args.z)
        elif args.name == "cardy":
            frame = formulas.equilateral_triangle()
            X = frame.C + args.z * (frame.A - frame.C)
            value = formulas.cardy_equilateral(frame, X)
        elif args.name == "winding":
            value = formulas.ust_winding_h(0.0, 1.0, complex(args.re, args.im))
        elif args.name == "avoid":
            value = formulas.avoid_probability(args.z, args.exponent)
        elif args.name == "slit-deriv":
            value = formulas.slit_derivative_at_zero(args.x0, args.h)
        else:
            frame = formulas.equilateral_triangle()
            value = formulas.smirnov_h1(complex(args.re, args.im), frame)
        _emit({"subcommand": cmd, "seed": args.seed,
               "wall_time_s": round(time.time() - t0, 3),
               "artifact_paths": [], "name": args.name, "value": value})
        return 0

    if cmd == "trace":
        params = sle.SleParams(kappa=args.kappa, horizon=args.t, dt=args.dt,
                               seed=args.seed)
        driving = sle.sample_driving(params)
        every = args.sample_every or max(1, params.n_steps // 2000)
        trace = loewner.chordal_trace(driving, sample_every=every)
        path = out / "trace.csv"
        loewner.trace_to_csv(trace, path)
        return _finish(args, t0, [path],
                       {"tips": len(trace.tips), "clamped": trace.clamped})

    if cmd == "sle-sample":
        params = sle.SleParams(kappa=args.kappa, horizon=args.t, dt=args.dt,
                               seed=args.seed)
        driving = sle.sample_driving(params, kind=args.kind)
        path = out / "driving.csv"
        with open(path, "w") as fh:
            fh.write("t,w\n")
            for t, w in zip(driving.times, driving.values):
                fh.write(f"{t:.12g},{w:.12g}\n")
        return _finish(args, t0, [path], {"steps": driving.n_steps})

    if cmd == "side-hit":
        params = sle.SleParams(kappa=args.kappa, horizon=1.0, dt=args.dt,
                               seed=args.seed)
        right, left, undecided = sle.side_hit_batch(args.a, args.c, params,
                                                    args.trials)
        z = -args.a / (args.c - args.a)
        exact = formulas.hitting_cdf(args.kappa, z)
        decided = right + left
        value = right / decided if decided else float("nan")
        rec = montecarlo.EstimateRecord(
            name="side_hit_right_first", scale=z, value=value,
            stderr=math.sqrt(max(value * (1 - value), 0.0) / max(decided, 1)),
            trials=decided, seed=args.seed)
        path = out / "side_hit.csv"
        montecarlo.estimates_to_csv([rec], path)
        return _finish(args, t0, [path],
                       {"value": value, "exact": exact, "undecided": undecided})

    if cmd == "radial-survival":
        params = sle.SleParams(kappa=args.kappa, horizon=max(args.t, 2 * args.dt),
                               dt=args.dt, seed=args.seed)
        rec = sle.radial_boundary_survival(args.x, args.b, args.t, params,
                                           args.trials)
        path = out / "radial_survival.csv"
        montecarlo.estimates_to_csv([rec], path)
        return _finish(args, t0, [path],
                       {"value": rec.value, "stderr": rec.stderr})

    if cmd == "lerw":
        dom = lattice.build_domain("disc", args.mesh, "square",
                                   radius=args.radius)
        start = dom.index[(0, 0)]
        walk = models.sample_lerw(dom, start, None, child_rng(args.seed, 0))
        path = out / "lerw.csv"
        with open(path, "w") as fh:
            fh.write("t,re,im\n")
            for k, v in enumerate(walk.vertices):
                p_, q_ = dom.vertices[v]
                fh.write(f"{k},{p_},{q_}\n")
        return _finish(args, t0, [path], {"length": len(walk)})

    if cmd == "ust":
        adj, root, coords = models.wired_grid_graph(args.width, args.height)
        tree = models.wilson_ust(adj, list(range(len(adj))),
                                 child_rng(args.seed, 0), root=root)
        path = out / "ust_edges.csv"
        with open(path, "w") as fh:
            fh.write("vx,vy,px,py\n")
            for v, p_ in tree.edges():
                cv = coords[v]
                cp = coords[p_] if coords[p_] is not None else (cv[0], 0)
                fh.write(f"{cv[0]},{cv[1]},{cp[0]},{cp[1]}\n")
        return _finish(args, t0, [path], {"edges": len(tree.edges())})

    if cmd == "peano":
        adj, root, coords = models.wired_grid_graph(args.width, args.height)
        tree = models.wilson_ust(adj, list(range(len(adj))),
                                 child_rng(args.seed, 0), root=root)
        contour = models.ust_peano(tree, coords, args.width, args.height)
        path = out / "peano.csv"
        with open(path, "w") as fh:
            fh.write("t,re,im\n")
            for k, (x4, y4) in enumerate(contour):
                fh.write(f"{k},{x4 / 4:.12g},{y4 / 4:.12g}\n")
        return _finish(args, t0, [path], {"length": len(contour)})

    if cmd == "perco-cross":
        rng = child_rng(args.seed, 0)
        hits = sum(
            models.crossing(models.percolation_sample(args.side, args.side,
                                                      args.p, rng))
            for _ in range(args.trials))
        value = hits / args.trials
        rec = montecarlo.EstimateRecord(
            name="crossing", scale=float(args.side), value=value,
            stderr=math.sqrt(max(value * (1 - value), 0.0) / args.trials),
            trials=args.trials, seed=args.seed)
        path = out / "crossing.csv"
        montecarlo.estimates_to_csv([rec], path)
        return _finish(args, t0, [path], {"value": value})

    if cmd == "cardy":
        recs = []
        for j, f in enumerate(args.fractions):
            rng = child_rng(args.seed, j)
            hits, n = models.cardy_crossing_experiment(args.side, f,
                                                       args.trials, rng)
            value = hits / n
            recs.append(montecarlo.EstimateRecord(
                name="cardy", scale=f, value=value,
                stderr=math.sqrt(max(value * (1 - value), 0.0) / n),
                trials=n, seed=args.seed))
        path = out / "cardy.csv"
        montecarlo.estimates_to_csv(recs, path)
        return _finish(args, t0, [path],
                       {"values": {str(r.scale): r.value for r in recs}})

    if cmd == "arms":
        recs = []
        for j, N in enumerate(args.scales):
            rng = child_rng(args.seed, j)
            hits, n = models.arm_probability(N, args.trials, rng,
                                             n_arms=args.n)
            value = hits / n
            recs.append(montecarlo.EstimateRecord(
                name=f"arm{args.n}", scale=float(N), value=value,
                stderr=math.sqrt(max(value * (1 - value), 0.0) / n),
                trials=n, seed=args.seed))
        fit = montecarlo.fit_power_law(recs, drop_outlier_scales=True)
        csv_path = out / "arms.csv"
        montecarlo.estimates_to_csv(recs, csv_path)
        fit_path = out / "arms_fit.json"
        fit_path.write_text(json.dumps(
            {"slope": fit.slope, "intercept": fit.intercept,
             "slope_stderr": fit.slope_stderr}, sort_keys=True))
        return _finish(args, t0, [csv_path, fit_path], {"slope": fit.slope})

    if cmd == "wedge":
        counts = models.wedge_hitting_counts(args.n, args.walks, args.seed)
        pval = montecarlo.chi_square_uniform(counts)
        path = out / "wedge_counts.csv"
        with open(path, "w") as fh:
            fh.write("index,count\n")
            for k, c_ in enumerate(counts):
                fh.write(f"{k},{c_}\n")
        return _finish(args, t0, [path], {"chi2_p": pval})

    if cmd == "excursion":
        hits, n = models.excursion_avoid_batch(args.x0, args.h, args.trials,
                                               args.seed, dt=args.dt)
        value = hits / n
        exact = formulas.slit_derivative_at_zero(args.x0, args.h)
        rec = montecarlo.EstimateRecord(
            name="excursion_avoid", scale=args.x0, value=value,
            stderr=math.sqrt(max(value * (1 - value), 0.0) / n),
            trials=n, seed=args.seed)
        path = out / "excursion.csv"
        montecarlo.estimates_to_csv([rec], path)
        return _finish(args, t0, [path], {"value": value, "exact": exact})

    if cmd == "disconnect":
        recs = [montecarlo.disconnection_probability(R, args.mesh, args.trials,
                                                     args.seed + j)
                for j, R in enumerate(args.scales)]
        fit = montecarlo.fit_power_law(recs, drop_outlier_scales=True)
        csv_path = out / "disconnect.csv"
        montecarlo.estimates_to_csv(recs, csv_path)
        fit_path = out / "disconnect_fit.json"
        fit_path.write_text(json.dumps(
            {"slope": fit.slope, "intercept": fit.intercept,
             "slope_stderr": fit.slope_stderr}, sort_keys=True))
        return _finish(args, t0, [csv_path, fit_path], {"slope": fit.slope})

    if cmd == "nonintersect":
        recs = [montecarlo.nonintersection_probability(2 ** k, args.trials,
                                                       args.seed + k)
                for k in args.log2_scales]
        fit = montecarlo.fit_power_law(recs, drop_outlier_scales=True)
        csv_path = out / "nonintersect.csv"
        montecarlo.estimates_to_csv(recs, csv_path)
        fit_path = out / "nonintersect_fit.json"
        fit_path.write_text(json.dumps(
            {"slope": fit.slope, "intercept": fit.intercept,
             "slope_stderr": fit.slope_stderr}, sort_keys=True))
        return _finish(args, t0, [csv_path, fit_path], {"slope": fit.slope})

    if cmd == "removal-map":
        params = sle.SleParams(kappa=max(args.kappa, 1e-12), horizon=args.t,
                               dt=args.dt, seed=args.seed)
        driving = (loewner.DrivingPath.zeros("chordal", args.t, args.dt)
                   if args.kappa == 0.0 else sle.sample_driving(params))
        state = sle.evolve_removal_map(driving,
                                       SlitParams(foot=args.x0, height=args.h))
        path = out / "removal_map.csv"
        with open(path, "w") as fh:
            fh.write("t,a,w_tilde,deriv_at_w\n")
            for t_, a_, wt_, c_ in zip(state.times, state.a, state.w_tilde,
                                       state.deriv_at_w):
                fh.write(f"{t_:.12g},{a_:.12g},{wt_:.12g},{c_:.12g}\n")
        return _finish(args, t0, [path],
                       {"steps": len(state.times),
                        "stopped_by_hull": state.stopped_by_hull,
                        "final_martingale": float(state.martingale[-1])})

    raise ValueError(f"unknown subcommand {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        _apply_config(args, parser)
    except KeyError as exc:
        print(f"unknown config key: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"bad config file: {exc}", file=sys.stderr)
        return 2
    try:
        return run(args)
    except (ValueError, NotImplementedError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
