"""Batch benchmark harness: run a manifest of instances, collect one
record per run, and pivot records into times matrices for profiles.

A manifest is JSON: either a list of run entries, or an object
`{"defaults": {...}, "runs": [...]}` whose defaults are merged into
every entry.  Each entry names its instance through exactly one of

  * "instance": path to an instance JSON file,
  * "graph": path to a DIMACS ascii file (with "relaxation"),
  * "family": a named graph family such as "myciel4" or "c5"
    (with "relaxation"),
  * "gen": generator recipe {"n", "m", "p", "density", "seed"},

plus optional keys: name, solver (label), relaxation (theta | theta+ |
thetabar+), complement (bool), cuts (int), cut_seed (int), eps,
max_iter, time_limit, sigma0, sigma_rule, postproc_every, lp_tol,
no_postproc (bool), exclude_from_profile (bool).

Relative paths resolve against the manifest's directory, then the
ADALSDP_DATA environment variable.  Failures of individual runs become
error rows; the batch continues.
"""

from __future__ import annotations

import csv
import json
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import families
from .bounds import make_bound_callback
from .core import GeneralSdp, read_instance, with_added_inequalities
from .graphs import Graph, complement, read_dimacs
from .randgen import GenSpec, generate
from .relaxations import (build_theta, build_theta_bar_plus, build_theta_plus,
                          sample_triangle_cuts)
from .solver import SolverConfig, solve

DATA_ENV_VAR = "ADALSDP_DATA"

_RELAXATIONS = {
    "theta": build_theta,
    "theta+": build_theta_plus,
    "thetabar+": build_theta_bar_plus,
}

_ENTRY_KEYS = {
    "name", "solver", "instance", "graph", "family", "gen", "relaxation",
    "complement", "cuts", "cut_seed", "eps", "max_iter", "time_limit",
    "sigma0", "sigma_rule", "postproc_every", "lp_tol", "no_postproc",
    "exclude_from_profile",
}


@dataclass
class BenchRecord:
    instance: str
    solver: str
    status: str
    objective: float
    best_bound: float | None
    r_P: float
    r_D: float
    iters: int
    total_time_sec: float
    bound_time_sec: float | None
    postproc_time_sec: float
    error: str = ""
    in_profile: bool = True


BENCH_COLUMNS = [f.name for f in fields(BenchRecord)]


def resolve_data_path(path: str, base_dir: str | None = None) -> Path:
    """Resolve a possibly-relative data path: as given, then relative to
    `base_dir`, then relative to $ADALSDP_DATA; first hit wins."""
    p = Path(path)
    if p.is_absolute():
        return p
    candidates = [Path.cwd() / p]
    if base_dir:
        candidates.append(Path(base_dir) / p)
    env = os.environ.get(DATA_ENV_VAR)
    if env:
        candidates.append(Path(env) / p)
    for cand in candidates:
        if cand.exists():
            return cand
    return candidates[1] if base_dir else candidates[0]


def _load_graph(entry: dict, base_dir: str | None) -> tuple[str, Graph]:
    if "graph" in entry:
        path = resolve_data_path(entry["graph"], base_dir)
        return path.stem, read_dimacs(str(path))
    g = families.by_name(entry["family"])
    return entry["family"], g


def build_instance(entry: dict, base_dir: str | None = None
                   ) -> tuple[str, GeneralSdp]:
    """Materialize one manifest entry into a (name, problem) pair."""
    unknown = set(entry) - _ENTRY_KEYS
    if unknown:
        raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
    sources = [k for k in ("instance", "graph", "family", "gen") if k in entry]
    if len(sources) != 1:
        raise ValueError(
            f"entry must name exactly one of instance/graph/family/gen, got {sources}")

    if sources[0] == "instance":
        path = resolve_data_path(entry["instance"], base_dir)
        name = entry.get("name", path.stem)
        return name, read_instance(str(path))

    if sources[0] == "gen":
        spec = GenSpec(**entry["gen"])
        name = entry.get("name",
                         f"rand_n{spec.n}_m{spec.m}_p{spec.p}_s{spec.seed}")
        return name, generate(spec).sdp

    default_name, g = _load_graph(entry, base_dir)
    if entry.get("complement"):
        g = complement(g)
    relaxation = entry.get("relaxation", "theta")
    if relaxation not in _RELAXATIONS:
        raise ValueError(f"unknown relaxation {relaxation!r}; "
                         f"choose from {sorted(_RELAXATIONS)}")
    sdp = _RELAXATIONS[relaxation](g)
    cuts = int(entry.get("cuts", 0))
    if cuts:
        if relaxation != "thetabar+":
            raise ValueError("triangle cuts only apply to the thetabar+ "
                             "coloring relaxation")
        cut_list = sample_triangle_cuts(g, cuts, int(entry.get("cut_seed", 0)))
        sdp = with_added_inequalities(sdp, cut_list)
    name = entry.get("name", default_name)
    return name, sdp


def _config_from_entry(entry: dict) -> SolverConfig:
    kwargs = {}
    for src, dst in (("eps", "eps"), ("max_iter", "max_iter"),
                     ("time_limit", "time_limit"), ("sigma0", "sigma0"),
                     ("sigma_rule", "sigma_rule"),
                     ("postproc_every", "postprocess_every")):
        if src in entry and entry[src] is not None:
            kwargs[dst] = entry[src]
    return SolverConfig(**kwargs)


def _run_entry_full(entry: dict, base_dir: str | None
                    ) -> tuple[BenchRecord, list]:
    solver_label = str(entry.get("solver", "adal"))
    in_profile = not bool(entry.get("exclude_from_profile", False))
    try:
        name, sdp = build_instance(entry, base_dir)
        config = _config_from_entry(entry)
        callback = None
        if not entry.get("no_postproc", False):
            callback = make_bound_callback(tol=float(entry.get("lp_tol", 1e-5)))
        result = solve(sdp, config, bound_callback=callback)
        best = result.best_bound
        record = BenchRecord(
            instance=name, solver=solver_label, status=result.status.value,
            objective=result.primal_objective,
            best_bound=None if best is None else best.value,
            r_P=result.r_P, r_D=result.r_D, iters=result.iterations,
            total_time_sec=result.total_time,
            bound_time_sec=result.best_bound_time,
            postproc_time_sec=result.postproc_time,
            in_profile=in_profile)
        return record, result.history
    except Exception as exc:  # per-run isolation: the batch must continue
        record = BenchRecord(
            instance=str(entry.get("name",
                                   entry.get("instance",
                                             entry.get("graph",
                                                       entry.get("family", "?"))))),
            solver=solver_label, status="Error", objective=math.nan,
            best_bound=None, r_P=math.nan, r_D=math.nan, iters=0,
            total_time_sec=0.0, bound_time_sec=None, postproc_time_sec=0.0,
            error=f"{type(exc).__name__}: {exc}", in_profile=in_profile)
        return record, []


def run_entry(entry: dict, base_dir: str | None = None) -> BenchRecord:
    """Run one manifest entry to completion; exceptions become error rows."""
    return _run_entry_full(entry, base_dir)[0]


def read_manifest(path: str) -> tuple[list[dict], str]:
    """Load a manifest; returns (entries with defaults merged, base dir)."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        defaults, runs = {}, doc
    elif isinstance(doc, dict):
        defaults = doc.get("defaults", {})
        runs = doc.get("runs", [])
    else:
        raise ValueError("manifest must be a JSON list or object")
    entries = [{**defaults, **run} for run in runs]
    return entries, str(Path(path).resolve().parent)


def _safe_filename(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._+-]", "_", text)


def _write_run_log(log_dir: str, idx: int, entry: dict,
                   record: BenchRecord, history: list) -> None:
    name = _safe_filename(f"{idx:03d}_{record.instance}__{record.solver}")
    path = Path(log_dir) / f"{name}.log"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# entry: {json.dumps(entry, sort_keys=True)}\n")
        fh.write(f"# status: {record.status}  objective: {record.objective!r}"
                 f"  best_bound: {record.best_bound!r}\n")
        fh.write("iter\tr_P\tr_D\tsigma\tobjective\telapsed_sec\n")
        for row in history:
            fh.write("\t".join(_cell(v) for v in row) + "\n")


def _worker(args: tuple[int, dict, str | None, str | None]) -> BenchRecord:
    idx, entry, base_dir, log_dir = args
    record, history = _run_entry_full(entry, base_dir)
    if log_dir is not None:
        _write_run_log(log_dir, idx, entry, record, history)
    return record


def run_manifest(path: str, jobs: int = 1,
                 log_dir: str | None = None) -> list[BenchRecord]:
    """Run every manifest entry, up to `jobs` concurrently; output order
    follows the manifest regardless of completion order."""
    entries, base_dir = read_manifest(path)
    if log_dir:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
    work = [(i, e, base_dir, log_dir) for i, e in enumerate(entries)]
    if jobs <= 1 or len(work) <= 1:
        return [_worker(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_worker, work))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr even for numpy scalars
    return str(value)


def write_bench_csv(records: Sequence[BenchRecord], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_COLUMNS)
        for rec in records:
            writer.writerow([_cell(getattr(rec, col)) for col in BENCH_COLUMNS])


def read_bench_csv(path: str) -> list[BenchRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != BENCH_COLUMNS:
        raise ValueError(f"not a benchmark CSV (expected header {BENCH_COLUMNS})")
    records = []
    for row in rows[1:]:
        if not row:
            continue
        d = dict(zip(BENCH_COLUMNS, row))
        records.append(BenchRecord(
            instance=d["instance"], solver=d["solver"], status=d["status"],
            objective=float(d["objective"]),
            best_bound=None if d["best_bound"] == "" else float(d["best_bound"]),
            r_P=float(d["r_P"]), r_D=float(d["r_D"]), iters=int(d["iters"]),
            total_time_sec=float(d["total_time_sec"]),
            bound_time_sec=(None if d["bound_time_sec"] == ""
                            else float(d["bound_time_sec"])),
            postproc_time_sec=float(d["postproc_time_sec"]),
            error=d["error"], in_profile=d["in_profile"] == "1"))
    return records


def times_from_records(records: Sequence[BenchRecord],
                       success: frozenset[str] = frozenset({"Converged"})
                       ) -> tuple[list[str], list[str], np.ndarray]:
    """Pivot records into (instances, solver labels, times matrix) for
    perf_profile.  Non-success runs and missing combinations become inf;
    instances whose records are all flagged out of profile are dropped."""
    instances: list[str] = []
    labels: list[str] = []
    for rec in records:
        if rec.instance not in instances:
            instances.append(rec.instance)
        if rec.solver not in labels:
            labels.append(rec.solver)
    excluded = {name for name in instances
                if all(not r.in_profile for r in records if r.instance == name)}
    instances = [name for name in instances if name not in excluded]
    if not instances or not labels:
        raise ValueError("no profile-eligible records")
    times = np.full((len(instances), len(labels)), np.inf)
    for rec in records:
        if rec.instance in excluded:
            continue
        i = instances.index(rec.instance)
        s = labels.index(rec.solver)
        if rec.status in success and rec.total_time_sec > 0:
            times[i, s] = rec.total_time_sec
    return instances, labels, times
