"""Command-line front end: ``negdep check | experiment | fixtures``.

JSON goes to standard output, human-readable summaries to standard error.
Exit codes: 0 everything holds, 1 some property fails (the verdict is still
printed), 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import crs, dependence, dominance, fixtures, optimize, probing, spi
from .core import Distribution, LP_TOL, coverage, load_json

CHECKS = ("wnr", "na", "nr", "ncd", "dominance")
EXPERIMENTS = ("spi", "crs", "probing", "maximize", "dominance-sweep")


class InputError(Exception):
    pass


def _log(msg: str):
    print(msg, file=sys.stderr)


def _seeds(seed: int, count: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def _map(fn, items, workers: int):
    """Ordered map, in a process pool when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- check -------------------------------------------------------------------

def _load_distribution(source: str, exact: bool) -> tuple[str, Distribution]:
    if source in fixtures.CATALOG:
        D = fixtures.get(source)
    else:
        path = Path(source)
        if not path.exists():
            raise InputError(f"{source!r} is neither a fixture name ({', '.join(fixtures.names())}) "
                             f"nor a readable file")
        try:
            data = load_json(path)
        except json.JSONDecodeError as err:
            raise InputError(f"{source}: malformed JSON ({err})") from None
        try:
            D = Distribution.from_json(data)
        except ValueError as err:
            raise InputError(f"{source}: {err}") from None
    return source, (D.as_exact() if exact else D.as_float())


def run_check(D: Distribution, which, tol: float = LP_TOL) -> dict:
    out = {}
    for name in which:
        if name == "wnr":
            out[name] = dependence.check_wnr(D).to_json()
        elif name == "na":
            out[name] = dependence.check_na(D).to_json()
        elif name == "nr":
            out[name] = dependence.check_nr(D).to_json()
        elif name == "ncd":
            out[name] = dependence.check_ncd(D).to_json()
        elif name == "dominance":
            out[name] = dominance.check_dominance(D, tol=tol).to_json()
    return out


def cmd_check(args) -> int:
    requested = [args.which] if isinstance(args.which, str) else args.which
    which = CHECKS if "all" in requested else tuple(dict.fromkeys(requested))
    name, D = _load_distribution(args.source, args.exact)
    result = run_check(D, which, args.tol)
    print(json.dumps(result, indent=1))
    for k, v in result.items():
        _log(f"{name}: {k:<9} {'holds' if v['holds'] else 'FAILS'}")
    return 0 if all(v["holds"] for v in result.values()) else 1


# -- fixtures ----------------------------------------------------------------

def cmd_fixtures(args) -> int:
    if args.action == "list":
        for name in fixtures.names():
            print(name)
        return 0
    if args.name is None or args.path is None:
        raise InputError("usage: fixtures emit NAME PATH")
    if args.name not in fixtures.CATALOG:
        raise InputError(f"unknown fixture {args.name!r}; known: {', '.join(fixtures.names())}")
    fixtures.emit(args.name, args.path)
    _log(f"wrote {args.path}")
    return 0


# -- experiments -------------------------------------------------------------

def _dominance_trial(job):
    n, seed = job
    D = dependence.random_wnr(n, seed)
    v = dominance.check_dominance(D)
    return {"seed": seed, "n": n, "holds": v.holds, "gap": float(v.gap)}


def exp_dominance_sweep(cfg, args):
    n, trials = cfg.get("n", 4), cfg.get("trials", 100)
    rows = _map(_dominance_trial, [(n, s) for s in _seeds(args.seed, trials)], args.workers)
    passed = sum(r["holds"] for r in rows)
    summary = {"n": n, "trials": trials, "passed": passed, "holds": passed == trials}
    _log(f"dominance-sweep: {passed}/{trials} WNR distributions satisfy dominance")
    return rows, summary


def _crs_trial(job):
    n, rank, seed = job
    rep = crs.verify_crs_theorem(optimize.Matroid.uniform(n, rank), 1, seed)
    return {"seed": seed, "n": n, "rank": rank, "c_star": float(rep.c_stars[0])}


def exp_crs(cfg, args):
    n, rank, trials = cfg.get("n", 3), cfg.get("rank", 1), cfg.get("trials", 50)
    rows = _map(_crs_trial, [(n, rank, s) for s in _seeds(args.seed, trials)], args.workers)
    cs = [r["c_star"] for r in rows]
    bound = crs.ONE_MINUS_INV_E
    summary = {"n": n, "rank": rank, "trials": trials, "min_c_star": min(cs),
               "median_c_star": float(np.median(cs)), "bound": bound,
               "holds": min(cs) >= bound - 1e-9}
    _log(f"crs: min c* = {min(cs):.4f} (bound {bound:.4f}) over {trials} WNR distributions")
    return rows, summary


def _spi_trial(job):
    inst_json, b, steps, mode, eps, seed = job
    inst = spi.SPIInstance.from_json(inst_json)
    rep = spi.spi_competitive_ratio(inst, b, steps, mode, eps=eps, seed=seed)
    row = rep.row()
    row["inner_ok"] = rep.inner_ok
    row["holds"] = rep.inner_ok and rep.ratio_worst >= rep.floor
    return row


def exp_spi(cfg, args):
    b = cfg.get("b", math.log(2))
    steps = cfg.get("steps", 200)
    mode = cfg.get("ordering", "worst")
    eps = cfg.get("eps", 0.05)
    if "instances" in cfg or "instance" in cfg:
        instances = cfg.get("instances") or [cfg["instance"]]
    else:
        n, m = cfg.get("n", 3), cfg.get("m", 2)
        instances = [spi.random_instance(n, m, s, cfg.get("rank", 1)).to_json()
                     for s in _seeds(args.seed, cfg.get("trials", 5))]
    for k, inst in enumerate(instances):
        try:
            spi.SPIInstance.from_json(inst)
        except (ValueError, TypeError, KeyError) as err:
            raise InputError(f"spi instance {k}: {err}") from None
    jobs = [(inst, b, steps, mode, eps, s) for inst, s in zip(instances, _seeds(args.seed, len(instances)))]
    rows = _map(_spi_trial, jobs, args.workers)
    for k, r in enumerate(rows):
        r["instance_id"] = k
    summary = {"instances": len(rows), "b": b, "steps": steps, "ordering": mode,
               "min_ratio": min(r["ratio_worst"] for r in rows),
               "max_floor": max(r["floor"] for r in rows),
               "holds": all(r["holds"] for r in rows)}
    for r in rows:
        _log(f"spi[{r['instance_id']}]: ratio {r['ratio_worst']:.4f} >= floor {r['floor']:.4f}"
             f" {'ok' if r['holds'] else 'VIOLATED'}")
    return rows, summary


def _probing_trial(job):
    n, kind, steps, seed = job
    inst = probing.random_instance(n, seed, kind)
    rep = probing.adaptivity_gap_report([inst], steps, seed)
    row = dict(rep.rows[0])
    row.update({"seed": seed, "n": n, "system": kind})
    return row


def exp_probing(cfg, args):
    n, trials, steps = cfg.get("n", 4), cfg.get("trials", 50), cfg.get("steps", 100)
    jobs = [(1 + k % n, ("uniform", "partition")[k % 2], steps, s)
            for k, s in enumerate(_seeds(args.seed, trials))]
    rows = _map(_probing_trial, jobs, args.workers)
    for k, r in enumerate(rows):
        r["instance_id"] = k
    worst = max(r["ratio"] for r in rows)
    bound = probing.GAP_BOUND + 0.03
    summary = {"trials": trials, "max_ratio": worst, "bound": bound, "holds": worst <= bound}
    _log(f"probing: max adaptive/non-adaptive = {worst:.4f} (bound {bound:.4f})")
    return rows, summary


def _coverage_instance(n: int, seed: int):
    rng = np.random.default_rng(seed)
    universe = 2 * n
    covers = [int(rng.integers(1, 1 << universe)) for _ in range(n)]
    weights = [int(v) for v in rng.integers(1, 6, size=universe)]
    return coverage(n, covers, weights)


def _maximize_trial(job):
    n, rank, samples, steps, seed = job
    f = _coverage_instance(n, seed)
    M = optimize.Matroid.uniform(n, rank)
    _, opt = optimize.brute_force_max(f, M)
    rng = np.random.default_rng(seed)
    vals = np.array([float(f(optimize.maximize_submodular(f, M, steps, rng))) for _ in range(samples)])
    mean, se = vals.mean(), vals.std(ddof=1) / math.sqrt(samples) if samples > 1 else 0.0
    return {"seed": seed, "n": n, "rank": rank, "opt": float(opt), "mean": float(mean),
            "ci_low": float(mean - 1.96 * se), "ratio": float(mean / float(opt)) if opt else 1.0}


def exp_maximize(cfg, args):
    n, rank = cfg.get("n", 5), cfg.get("rank", 2)
    trials, samples, steps = cfg.get("trials", 10), cfg.get("samples", 10_000), cfg.get("steps", 100)
    jobs = [(n, rank, samples, steps, s) for s in _seeds(args.seed, trials)]
    rows = _map(_maximize_trial, jobs, args.workers)
    ok = all(r["ci_low"] >= 0.60 * r["opt"] for r in rows)
    summary = {"trials": trials, "samples": samples, "min_ratio": min(r["ratio"] for r in rows),
               "threshold": 0.60, "holds": ok}
    _log(f"maximize: min mean/OPT = {summary['min_ratio']:.4f} over {trials} coverage instances")
    return rows, summary


RUNNERS = {"dominance-sweep": exp_dominance_sweep, "crs": exp_crs, "spi": exp_spi,
           "probing": exp_probing, "maximize": exp_maximize}


def _write_rows(path: Path, rows: list):
    if not rows:
        return
    keys = list(dict.fromkeys(k for r in rows for k in r))
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, keys)
        w.writeheader()
        w.writerows(rows)


def cmd_experiment(args) -> int:
    cfg = {}
    if args.config:
        try:
            cfg = load_json(args.config)
        except (OSError, json.JSONDecodeError) as err:
            raise InputError(f"cannot read config {args.config}: {err}") from None
        if not isinstance(cfg, dict):
            raise InputError("config must be a JSON object")
    for key in ("n", "trials", "rank", "steps", "samples"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    rows, summary = RUNNERS[args.kind](cfg, args)
    summary = {"experiment": args.kind, "seed": args.seed, **summary}
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / f"{args.kind}.csv", rows)
        (out / f"{args.kind}.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(json.dumps(summary, indent=1))
    return 0 if summary["holds"] else 1


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    arith = common.add_mutually_exclusive_group()
    arith.add_argument("--exact", dest="exact", action="store_true", default=True,
                       help="rational arithmetic (default)")
    arith.add_argument("--float", dest="exact", action="store_false", help="float64 arithmetic")
    common.add_argument("--tol", type=float, default=LP_TOL, help="dominance LP tolerance (float backend)")
    common.add_argument("--out", help="directory for CSV and JSON reports")

    parser = argparse.ArgumentParser(prog="negdep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run dependence checkers on a distribution")
    p.add_argument("source", help="fixture name or Distribution JSON file")
    p.add_argument("which", nargs="*", default="all", choices=CHECKS + ("all",))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("experiment", parents=[common], help="run an experiment sweep")
    p.add_argument("kind", choices=EXPERIMENTS)
    p.add_argument("--config")
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("fixtures", help="list or write the built-in distributions")
    p.add_argument("action", choices=("list", "emit"))
    p.add_argument("name", nargs="?")
    p.add_argument("path", nargs="?")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except InputError as err:
        _log(f"error: {err}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
