"""
Grid sweeps composing every module, with a resumable CSV artifact.

One row per node, with the columns in :data:`COLUMNS`; floats carry 9
significant digits and absent values are empty. Rows are written in grid
order by a single writer, so the file does not depend on the number of
workers, and nodes already present in the output are skipped on re-runs.
Each node draws its random numbers from a seed derived from the global seed
and the node's grid indices.

Every row is checked at write time: ``beta_L <= beta_NS``, the NPA bound is
at least ``beta_L``, and every realization value (exact construction,
see-saw, PV) is at most the NPA bound and the no-signalling value.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .bounds_classical import (classify_region, local_value_closed,
                               ns_value_closed)
from .functional import FunctionalParams
from .grid import Grid, fmt
from .npa import ADVANTAGE_TOL, npa_solve, parse_level

__all__ = ["COLUMNS", "SweepSpec", "NpaCache", "node_seed", "compute_node",
           "sandwich_violations", "run_sweep", "read_rows", "report_record",
           "report", "SweepSummary"]

log = logging.getLogger(__name__)

COLUMNS = ("alpha1", "alpha3", "alpha2", "beta_L", "beta_NS", "beta_exact",
           "npa_level", "beta_npa", "npa_gap", "beta_2x2", "beta_pv",
           "pv_flag", "pv_n", "min_closing_n", "peak_class", "region",
           "sandwich_ok", "errors")
"""Fixed CSV header of :func:`run_sweep`."""

SANDWICH_TOL = 1e-6
LOCAL_TOL = 1e-7
TASK_NAMES = ("local", "ns", "exact", "npa", "seesaw", "pv")


def _parse_task(t: str) -> Tuple[str, Optional[str]]:
    name, _, arg = t.strip().partition(":")
    if name not in TASK_NAMES:
        raise ValueError(f"unknown task {t!r}; expected one of {TASK_NAMES}")
    if name == "npa":
        arg = parse_level(arg or "3")
    elif name == "seesaw":
        arg = str(int(arg or 2))
    elif arg:
        raise ValueError(f"task {name!r} takes no argument")
    return name, arg or None


@dataclass(frozen=True)
class SweepSpec:
    """What to compute and where.

    Attributes
    ----------
    grid : Grid
        Defaults to ``alpha1 in [0, 4]``, ``alpha3 in [0, 2]``, step 0.025.
    tasks : tuple of str
        Subset of ``local``, ``ns``, ``exact``, ``npa:<level>``,
        ``seesaw:<dim>``, ``pv``.
    out_dir : path
        Receives ``sweep.csv`` and ``summary.json``.
    workers : int
    seed : int
    seesaw_trials, seesaw_iterations : int
    pv_cap : int
        Largest dimension of the PV ladder.
    npa_cache : path, optional
        JSON cache of NPA values, shared between runs.
    """

    grid: Grid = Grid()
    tasks: Tuple[str, ...] = ("local", "ns")
    out_dir: Union[str, Path] = "sweep_out"
    workers: int = 1
    seed: int = 0
    seesaw_trials: int = 150
    seesaw_iterations: int = 50
    pv_cap: int = 1200
    npa_cache: Optional[Union[str, Path]] = None

    def __post_init__(self):
        tasks = tuple(self.tasks)
        if not tasks:
            raise ValueError("the task list must not be empty")
        parsed = [_parse_task(t) for t in tasks]
        names = [n for n, _ in parsed]
        if len(set(names)) != len(names):
            raise ValueError("each task may appear once")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "tasks", tasks)

    @property
    def parsed_tasks(self) -> Dict[str, Optional[str]]:
        return dict(_parse_task(t) for t in self.tasks)


def node_seed(seed: int, i1: int, i3: int) -> int:
    """Per-node seed from the global seed and the node's grid indices."""
    return int(np.random.SeedSequence([seed, i1, i3]).generate_state(1)[0])


def _key(p: FunctionalParams, level: str) -> str:
    return f"{fmt(p.alpha1)},{p.alpha2},{fmt(p.alpha3)},{level}"


class NpaCache:
    """NPA values keyed by node and level, optionally persisted as JSON."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self.data: Dict[str, List[float]] = {}
        if self.path and self.path.exists():
            self.data = json.loads(self.path.read_text())

    def get(self, p: FunctionalParams, level) -> Optional[Tuple[float, float]]:
        v = self.data.get(_key(p, parse_level(level)))
        return None if v is None else (float(v[0]), float(v[1]))

    def put(self, p: FunctionalParams, level, value: float, gap: float):
        self.data[_key(p, parse_level(level))] = [float(value), float(gap)]

    def value(self, p: FunctionalParams, level) -> float:
        """Cached value, solving and storing it on a miss."""
        hit = self.get(p, level)
        if hit is None:
            mp, res = npa_solve(p, level)
            hit = (mp.offset + res.bound, res.gap)
            self.put(p, level, *hit)
        return hit[0]

    def save(self):
        if self.path:
            self.path.write_text(json.dumps(self.data, sort_keys=True,
                                            indent=0))


def _exact_value(p: FunctionalParams) -> float:
    if p.alpha2 == 0:
        from .quantum_exact import quantum_value_branch0
        return quantum_value_branch0(p)[0]
    # best explicit two-qubit construction available for alpha2 = 1
    from .quantum_exact import trivial_measurement_value
    best = trivial_measurement_value(p)[0]
    if p.alpha1 + p.alpha3 <= 2:
        best = max(best, 4 + p.alpha3 ** 2)
    return best


def sandwich_violations(rec: dict) -> List[str]:
    """Consistency problems of a record (values may be ``None``)."""
    out = []
    bL, bNS, bN = rec.get("beta_L"), rec.get("beta_NS"), rec.get("beta_npa")
    if bL is not None and bNS is not None and bL > bNS + LOCAL_TOL:
        out.append(f"beta_L={fmt(bL)} > beta_NS={fmt(bNS)}")
    if bL is not None and bN is not None and bN < bL - LOCAL_TOL:
        out.append(f"beta_npa={fmt(bN)} < beta_L={fmt(bL)}")
    for name in ("beta_exact", "beta_2x2", "beta_pv"):
        v = rec.get(name)
        if v is None:
            continue
        if bN is not None and v > bN + SANDWICH_TOL:
            out.append(f"{name}={fmt(v)} > beta_npa={fmt(bN)}")
        if bNS is not None and v > bNS + SANDWICH_TOL:
            out.append(f"{name}={fmt(v)} > beta_NS={fmt(bNS)}")
    return out


def compute_node(p: FunctionalParams, tasks: Dict[str, Optional[str]],
                 seed: int = 0, npa_hit: Optional[Tuple[float, float]] = None,
                 seesaw_trials: int = 150, seesaw_iterations: int = 50,
                 pv_cap: int = 1200) -> dict:
    """All requested quantities at one node; failures go to ``errors``."""
    rec: dict = {c: None for c in COLUMNS}
    rec.update(alpha1=p.alpha1, alpha3=p.alpha3, alpha2=p.alpha2)
    errors = []
    regions = []

    def attempt(name, fn):
        try:
            return fn()
        except Exception as exc:
            errors.append(f"{name}: {type(exc).__name__}: {exc}")
            return None

    # the classical values are cheap and anchor the sandwich checks
    rec["beta_L"] = local_value_closed(p)
    if "ns" in tasks or "local" in tasks:
        rec["beta_NS"] = ns_value_closed(p)
        lab = attempt("region", lambda: classify_region(p))
        if lab is not None:
            regions.extend(lab.tags)
    if "exact" in tasks:
        rec["beta_exact"] = attempt("exact", lambda: _exact_value(p))
    if "npa" in tasks:
        level = tasks["npa"]
        rec["npa_level"] = level
        if npa_hit is None:
            def solve():
                mp, res = npa_solve(p, level)
                return mp.offset + res.bound, res.gap
            npa_hit = attempt("npa", solve)
        if npa_hit is not None:
            rec["beta_npa"], rec["npa_gap"] = npa_hit
            regions.append("NPA_gt_L" if rec["beta_npa"] - rec["beta_L"]
                           > ADVANTAGE_TOL else "NPA_eq_L")
    if "seesaw" in tasks:
        from .seesaw import GAP_TOL, SeesawConfig, seesaw
        d = int(tasks["seesaw"])
        cfg = SeesawConfig(dA=d, dB=d, trials=seesaw_trials,
                           iterations=seesaw_iterations, seed=seed)
        r = attempt("seesaw", lambda: seesaw(p, cfg))
        if r is not None:
            rec["beta_2x2"] = r.value
            if rec["beta_npa"] is not None:
                regions.append("two-qubit-optimal"
                               if rec["beta_npa"] - r.value < GAP_TOL
                               else "gap-open")
    if "pv" in tasks:
        from .pv import LadderSchedule, analyze_solution, default_schedule, \
            ladder_run
        sched = LadderSchedule(tuple(default_schedule(pv_cap)))
        lr = attempt("pv", lambda: ladder_run(p, rec["beta_npa"], sched))
        if lr is not None and lr.values:
            n, v, sol = lr.best
            rec.update(beta_pv=v, pv_flag=lr.flag, pv_n=n,
                       min_closing_n=lr.closing_n,
                       peak_class=analyze_solution(sol)["peak_class"])
    bad = sandwich_violations(rec)
    rec["sandwich_ok"] = not bad
    errors.extend(f"sandwich: {b}" for b in bad)
    rec["region"] = "|".join(regions)
    rec["errors"] = "; ".join(errors)
    return rec


def _job(args):
    i1, i3, pt, tasks, seed, hit, st, si, cap = args
    p = FunctionalParams(*pt)
    return compute_node(p, tasks, seed, hit, st, si, cap)


def _row_strings(rec: dict) -> List[str]:
    out = []
    for c in COLUMNS:
        v = rec.get(c)
        out.append(v if isinstance(v, str) else fmt(v))
    return out


def read_rows(path: Union[str, Path]) -> List[dict]:
    """Rows of a sweep CSV as dicts of strings.

    Raises
    ------
    ValueError
        If the header lacks the node coordinates.
    """
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or not {"alpha1", "alpha3", "alpha2"} <= set(
                rd.fieldnames):
            raise ValueError(f"{path}: not a sweep CSV (missing coordinates)")
        return list(rd)


@dataclass
class SweepSummary:
    csv_path: Path
    summary_path: Path
    rows: int
    computed: int
    failures: int

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0


def _summarize(rows: List[dict]) -> dict:
    def floats(col):
        return [float(r[col]) for r in rows if r.get(col)]

    regions: Dict[str, int] = {}
    for r in rows:
        for t in filter(None, r.get("region", "").split("|")):
            regions[t] = regions.get(t, 0) + 1
    summary = {"nodes": len(rows),
               "failures": sum(1 for r in rows if r.get("errors")),
               "region_counts": dict(sorted(regions.items()))}
    for col in ("beta_L", "beta_NS", "beta_exact", "beta_npa", "beta_2x2",
                "beta_pv"):
        v = floats(col)
        if v:
            summary[col] = {"count": len(v), "min": float(fmt(min(v))),
                            "max": float(fmt(max(v)))}
    return summary


def run_sweep(spec: SweepSpec) -> SweepSummary:
    """Compute every missing node of ``spec.grid`` and write the artifacts.

    Returns
    -------
    SweepSummary
        ``exit_code`` is 1 if any row has errors or sandwich violations.
    """
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    done = set()
    if csv_path.exists():
        for r in read_rows(csv_path):
            done.add((r["alpha1"], r["alpha3"], r["alpha2"]))
    else:
        with open(csv_path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(COLUMNS)
    tasks = spec.parsed_tasks
    cache = NpaCache(spec.npa_cache)
    jobs = []
    for i1, i3, p in spec.grid.nodes():
        if (fmt(p.alpha1), fmt(p.alpha3), str(p.alpha2)) in done:
            continue
        hit = cache.get(p, tasks["npa"]) if "npa" in tasks else None
        jobs.append((i1, i3, p.as_tuple(), tasks, node_seed(spec.seed, i1, i3),
                     hit, spec.seesaw_trials, spec.seesaw_iterations,
                     spec.pv_cap))
    if spec.workers > 1 and len(jobs) > 1:
        pool = Pool(spec.workers)
        results = pool.imap(_job, jobs)
    else:
        pool = None
        results = map(_job, jobs)
    computed = 0
    try:
        with open(csv_path, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for rec in results:
                w.writerow(_row_strings(rec))
                fh.flush()
                computed += 1
                if rec["npa_level"] and rec["beta_npa"] is not None:
                    cache.put(FunctionalParams(rec["alpha1"], rec["alpha2"],
                                               rec["alpha3"]),
                              rec["npa_level"], rec["beta_npa"],
                              rec["npa_gap"])
                if rec["errors"]:
                    log.warning("node (%s, %s, %s): %s", rec["alpha1"],
                                rec["alpha2"], rec["alpha3"], rec["errors"])
    finally:
        if pool is not None:
            pool.close()
            pool.join()
        cache.save()
    rows = read_rows(csv_path)
    summary = _summarize(rows)
    summary["tasks"] = list(spec.tasks)
    summary["seed"] = spec.seed
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True)
                            + "\n")
    return SweepSummary(csv_path, summary_path, len(rows), computed,
                        summary["failures"])


# -- reporting ----------------------------------------------------------------

_LABELS = [("beta_L", "local value"), ("beta_NS", "no-signalling value"),
           ("beta_exact", "explicit construction"),
           ("beta_npa", "NPA bound"), ("beta_2x2", "two-qubit see-saw"),
           ("beta_pv", "PV realization")]


def _as_float(v):
    if v is None or v == "":
        return None
    return float(v)


def report_record(rec: dict) -> str:
    """Human-readable summary of one record (strings or numbers).

    Only the fields that are present are printed; sandwich violations are
    flagged on lines starting with ``!! INCONSISTENT``.
    """
    num = {k: _as_float(rec.get(k)) for k, _ in _LABELS}
    lines = [f"node alpha1={rec.get('alpha1')} alpha2={rec.get('alpha2')} "
             f"alpha3={rec.get('alpha3')}"]
    for k, label in _LABELS:
        if num[k] is not None:
            extra = ""
            if k == "beta_npa" and rec.get("npa_level"):
                extra = f"  (level {rec['npa_level']})"
            if k == "beta_pv" and rec.get("pv_n"):
                extra = f"  (n={rec['pv_n']}, {rec.get('pv_flag', '')})"
            lines.append(f"  {label:<24s}{k:<11s}= {fmt(num[k])}{extra}")
    for k in ("min_closing_n", "peak_class", "region"):
        if rec.get(k) not in (None, ""):
            lines.append(f"  {k:<35s}= {rec[k]}")
    for bad in sandwich_violations(num):
        lines.append(f"!! INCONSISTENT: {bad}")
    errs = rec.get("errors")
    if errs and not str(errs).startswith("sandwich"):
        lines.append(f"!! errors: {errs}")
    return "\n".join(lines)


def report(source: Union[str, Path, dict],
           node: Optional[Tuple[float, int, float]] = None) -> str:
    """Report a record, or every row (or one node) of a sweep CSV."""
    if isinstance(source, dict):
        return report_record(source)
    rows = read_rows(source)
    if node is not None:
        a1, a2, a3 = node
        rows = [r for r in rows if float(r["alpha1"]) == a1
                and int(r["alpha2"]) == a2 and float(r["alpha3"]) == a3]
        if not rows:
            raise KeyError(f"node {node} not in {source}")
    return "\n\n".join(report_record(r) for r in rows)
