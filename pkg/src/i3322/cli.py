"""
Command-line interface.

Verbs: ``eval``, ``classical``, ``quantum-exact``, ``seesaw``, ``npa``
(and ``npa sweep``), ``pv``, ``sweep`` and ``report``. Run
``python -m i3322 VERB --help`` for the options of each verb. Floats are
printed with 9 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .functional import FunctionalParams, evaluate, load_behavior
from .grid import COARSE_GRID, DEFAULT_GRID, Axis, Grid, fmt

log = logging.getLogger("i3322")


def _params(ns) -> FunctionalParams:
    p, flip = FunctionalParams.normalize(ns.alpha1, ns.alpha2, ns.alpha3)
    if flip.flip_all or flip.flip_A3:
        log.info("parameters normalized to %s", p.as_tuple())
    return p


def _add_params(sp, alpha2_default: Optional[int] = None):
    sp.add_argument("--alpha1", type=float, required=True)
    if alpha2_default is None:
        sp.add_argument("--alpha2", type=int, choices=(0, 1), required=True)
    else:
        sp.add_argument("--alpha2", type=int, choices=(0, 1),
                        default=alpha2_default)
    sp.add_argument("--alpha3", type=float, required=True)


def _add_common(sp):
    sp.add_argument("--out", default=None, help="output file or prefix")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)


def _print_kv(pairs):
    for k, v in pairs:
        print(f"{k} = {v if isinstance(v, str) else fmt(v)}")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- verbs --------------------------------------------------------------------

def cmd_eval(ns) -> int:
    p = _params(ns)
    b = load_behavior(ns.behavior)
    _print_kv([("beta", evaluate(p, b))])
    return 0


def cmd_classical(ns) -> int:
    from .bounds_classical import (classify_region, local_value_closed,
                                   local_value_enum, ns_value_closed,
                                   ns_value_lp)
    p = _params(ns)
    if ns.oracle == "enum":
        bL, strat = local_value_enum(p)
        rows = [("beta_L", bL), ("strategy_a", str(strat.a)),
                ("strategy_b", str(strat.b)), ("beta_NS", ns_value_lp(p))]
    elif ns.oracle == "lp":
        rows = [("beta_L", local_value_enum(p)[0]), ("beta_NS", ns_value_lp(p))]
    else:
        rows = [("beta_L", local_value_closed(p)),
                ("beta_NS", ns_value_closed(p))]
    rows.append(("region", "|".join(classify_region(p).tags)))
    _print_kv(rows)
    return 0


def cmd_quantum_exact(ns) -> int:
    from .realization import dump_realization, value
    from . import quantum_exact as qe
    p = _params(ns)
    if p.alpha2 == 0:
        v, regime = qe.quantum_value_branch0(p)
        rows = [("beta_Q", v), ("regime", regime)]
        r = None
        if regime == "nu":
            r = qe.optimal_realization_branch0(p, ns.mu)
            rows += [("realization_value", value(p, r)),
                     ("sos_residual", qe.sos_residual(p, r))]
    else:
        v, phi, r = qe.trivial_measurement_value(p)
        rows = [("beta_trivial", v), ("phi_opt", phi)]
        if p.alpha1 + p.alpha3 <= 2:
            r = qe.triangular_region_realization(p)
            rows.append(("beta_triangular", value(p, r)))
    _print_kv(rows)
    if ns.emit_realization:
        if r is None:
            print("no realization for this regime", file=sys.stderr)
            return 1
        dump_realization(r, ns.emit_realization)
    return 0


def cmd_seesaw(ns) -> int:
    from .realization import dump_realization
    from .seesaw import SeesawConfig, gap_report, seesaw
    p = _params(ns)
    cfg = SeesawConfig(dA=ns.dim, dB=ns.dim, trials=ns.trials,
                       iterations=ns.iters, seed=ns.seed)
    r = seesaw(p, cfg)
    rows = [("beta_2x2" if ns.dim == 2 else f"beta_{ns.dim}x{ns.dim}", r.value),
            ("best_trial", r.trial), ("converged", str(r.converged))]
    if ns.npa_level:
        from .npa import npa_value
        g = gap_report(p, cfg, npa_value(p, ns.npa_level), beta_2x2=r.value)
        rows += [("beta_npa", g["beta_npa"]), ("gap", g["gap"]),
                 ("flag", g["flag"])]
    _print_kv(rows)
    if ns.emit_realization:
        dump_realization(r.realization, ns.emit_realization)
    return 0


def _grid_from(ns, alpha2: int) -> Grid:
    if ns.grid == "default":
        g = DEFAULT_GRID
    elif ns.grid == "coarse":
        g = COARSE_GRID
    else:
        g = DEFAULT_GRID
    a1 = Axis(*ns.alpha1_range) if ns.alpha1_range else g.alpha1
    a3 = Axis(*ns.alpha3_range) if ns.alpha3_range else g.alpha3
    return Grid(a1, a3, alpha2)


def cmd_npa(ns) -> int:
    from .npa import (ADVANTAGE_COLUMNS, advantage_region, build_moment_problem,
                      npa_solve)
    if ns.action == "sweep":
        grid = _grid_from(ns, 1 if ns.alpha2 is None else ns.alpha2)
        out = ns.out or "region.csv"
        failures = 0
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ADVANTAGE_COLUMNS + ("error",))
            for row in advantage_region(ns.level, grid):
                failures += bool(row["error"])
                w.writerow([row[c] if isinstance(row[c], str) else fmt(row[c])
                            for c in ADVANTAGE_COLUMNS + ("error",)])
        print(f"wrote {len(grid)} rows to {out}")
        return 1 if failures else 0
    if ns.alpha1 is None or ns.alpha3 is None or ns.alpha2 is None:
        print("npa: --alpha1, --alpha2 and --alpha3 are required",
              file=sys.stderr)
        return 2
    p = _params(ns)
    if ns.dump_sdp:
        from .optim.sdp import dump_sdp
        dump_sdp(build_moment_problem(p, ns.level).sdp(), ns.dump_sdp)
    mp, res = npa_solve(p, ns.level)
    _print_kv([("level", mp.level), ("m", mp.m), ("beta_npa", mp.offset + res.bound),
               ("primal_value", mp.offset + res.value), ("solver_gap", res.gap),
               ("status", res.status), ("iterations", res.iterations)])
    return 0 if res.converged or res.status == "numerical" else 1


def cmd_pv(ns) -> int:
    from .pv import (LadderSchedule, analyze_solution, default_schedule,
                     ladder_run, warm_optimize)
    from .sweep import NpaCache
    p = _params(ns)
    bound = None
    if ns.npa_level:
        cache = NpaCache(ns.npa_cache)
        bound = cache.value(p, ns.npa_level)
        cache.save()
    if ns.n:
        r = warm_optimize(p, ns.n)
        dims, values, sol = [ns.n], [r.value], r.params
        flag, closing = r.status, None
    else:
        lr = ladder_run(p, bound, LadderSchedule(tuple(default_schedule(ns.cap))))
        dims, values = lr.dims, lr.values
        _, _, sol = lr.best
        flag, closing = lr.flag, lr.closing_n
    a = analyze_solution(sol)
    _print_kv([("n", dims[-1]), ("beta_pv", values[-1]),
               ("best", max(values)), ("flag", flag)]
              + ([("beta_npa", bound), ("gap", bound - max(values))]
                 if bound is not None else [])
              + ([("min_closing_n", closing)] if closing else [])
              + [("peak_class", a["peak_class"])])
    if ns.out:
        pre = ns.out
        with open(f"{pre}_values.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("n", "beta_pv", "gap"))
            for n, v in zip(dims, values):
                w.writerow((n, fmt(v), fmt(None if bound is None else bound - v)))
        with open(f"{pre}_angles.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("j", "theta_A", "theta_B"))
            tA, tB = a["angles_A"], a["angles_B"]
            for j in range(max(len(tA), len(tB))):
                w.writerow((j, fmt(tA[j]) if j < len(tA) else "",
                            fmt(tB[j]) if j < len(tB) else ""))
        with open(f"{pre}_schmidt.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("k", "lambda"))
            for k, lam in enumerate(a["schmidt"]):
                w.writerow((k, fmt(lam)))
        _write_json(f"{pre}_class.json",
                    {k: a[k] for k in ("n", "peak_class", "peaks", "theta_0",
                                       "theta_c")} | {"flag": flag,
                                                      "min_closing_n": closing})
    return 0


def cmd_sweep(ns) -> int:
    from .sweep import SweepSpec, run_sweep
    grid = _grid_from(ns, ns.alpha2)
    spec = SweepSpec(grid=grid, tasks=tuple(t for t in ns.tasks.split(",") if t),
                     out_dir=ns.out or "sweep_out", workers=ns.workers,
                     seed=ns.seed, seesaw_trials=ns.trials,
                     seesaw_iterations=ns.iters, pv_cap=ns.cap,
                     npa_cache=ns.npa_cache)
    s = run_sweep(spec)
    print(f"{s.rows} rows ({s.computed} computed) in {s.csv_path}; "
          f"{s.failures} with errors")
    return s.exit_code


def cmd_report(ns) -> int:
    from .sweep import report
    node = None
    if ns.alpha1 is not None:
        node = (ns.alpha1, ns.alpha2 if ns.alpha2 is not None else 1,
                ns.alpha3)
    try:
        text = report(ns.file, node)
    except (ValueError, KeyError) as exc:
        print(f"report: {exc}", file=sys.stderr)
        return 2
    print(text)
    return 1 if "!! INCONSISTENT" in text else 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="i3322", description="Values and realizations of a family of "
        "I3322-like Bell functionals.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("eval", help="evaluate a functional on a behavior")
    _add_params(sp)
    sp.add_argument("--behavior", required=True, help="behavior JSON file")
    sp.set_defaults(fn=cmd_eval)

    sp = sub.add_parser("classical", help="local and no-signalling values")
    _add_params(sp)
    sp.add_argument("--oracle", choices=("enum", "closed", "lp"),
                    default="closed")
    sp.set_defaults(fn=cmd_classical)

    sp = sub.add_parser("quantum-exact", help="analytic quantum constructions")
    _add_params(sp, alpha2_default=0)
    sp.add_argument("--mu", type=float, default=0.0)
    sp.add_argument("--emit-realization", metavar="FILE")
    sp.set_defaults(fn=cmd_quantum_exact)

    sp = sub.add_parser("seesaw", help="see-saw lower bound in fixed dimension")
    _add_params(sp)
    _add_common(sp)
    sp.add_argument("--dim", type=int, default=2)
    sp.add_argument("--trials", type=int, default=150)
    sp.add_argument("--iters", type=int, default=50)
    sp.add_argument("--npa-level", default=None,
                    help="also report the gap to this NPA level")
    sp.add_argument("--emit-realization", metavar="FILE")
    sp.set_defaults(fn=cmd_seesaw)

    sp = sub.add_parser("npa", help="NPA upper bound; 'npa sweep' for a grid")
    sp.add_argument("action", nargs="?", choices=("sweep",))
    sp.add_argument("--alpha1", type=float)
    sp.add_argument("--alpha2", type=int, choices=(0, 1))
    sp.add_argument("--alpha3", type=float)
    sp.add_argument("--level", default="3", help="1, 1ab, 2 or 3")
    sp.add_argument("--dump-sdp", metavar="FILE")
    sp.add_argument("--grid", choices=("default", "coarse"), default="default")
    sp.add_argument("--alpha1-range", type=float, nargs=3,
                    metavar=("LO", "HI", "STEP"))
    sp.add_argument("--alpha3-range", type=float, nargs=3,
                    metavar=("LO", "HI", "STEP"))
    _add_common(sp)
    sp.set_defaults(fn=cmd_npa)

    sp = sub.add_parser("pv", help="PV realizations in dimension n or along "
                        "the dimension ladder")
    _add_params(sp)
    _add_common(sp)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--n", type=int)
    g.add_argument("--ladder", action="store_true", default=True)
    sp.add_argument("--cap", type=int, default=1200)
    sp.add_argument("--npa-level", default=None,
                    help="stop the ladder when the gap to this level closes")
    sp.add_argument("--npa-cache", metavar="FILE")
    sp.set_defaults(fn=cmd_pv)

    sp = sub.add_parser("sweep", help="grid sweep to CSV + summary JSON")
    sp.add_argument("--alpha2", type=int, choices=(0, 1), default=1)
    sp.add_argument("--tasks", default="local,ns",
                    help="comma list of local, ns, exact, npa:<level>, "
                    "seesaw:<dim>, pv")
    sp.add_argument("--grid", choices=("default", "coarse"), default="default")
    sp.add_argument("--alpha1-range", type=float, nargs=3,
                    metavar=("LO", "HI", "STEP"))
    sp.add_argument("--alpha3-range", type=float, nargs=3,
                    metavar=("LO", "HI", "STEP"))
    sp.add_argument("--trials", type=int, default=150)
    sp.add_argument("--iters", type=int, default=50)
    sp.add_argument("--cap", type=int, default=1200)
    sp.add_argument("--npa-cache", metavar="FILE")
    _add_common(sp)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("report", help="summarize sweep rows")
    sp.add_argument("file")
    sp.add_argument("--alpha1", type=float)
    sp.add_argument("--alpha2", type=int, choices=(0, 1))
    sp.add_argument("--alpha3", type=float)
    sp.set_defaults(fn=cmd_report)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.fn(ns)
    except ValueError as exc:
        print(f"{ns.verb}: {exc}", file=sys.stderr)
        return 2
