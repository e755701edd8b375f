"""Multi-run campaigns, summary statistics and CSV/JSON output.

A campaign is one or more problems crossed with dimensions and FE budgets;
every cell gets ``runs`` independent GA runs whose seeds are derived from
the master seed and the cell coordinates, so results do not depend on the
order runs are dispatched in.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import logging
import math
import os
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import operators as ops
from .benchmarks import get_problem
from .engine import GAConfig, check_config, run_ga
from .errors import ConfigurationError, EvaluationError, HarnessError
from .fitness import Penalty

log = logging.getLogger(__name__)

SUMMARY_HEADER = ["problem", "dimension", "max_fes", "runs", "best", "worst", "mean", "median", "std", "solved"]
FES_HEADER = ["problem", "dimension", "max_fes", "runs", "solved", "fes_min", "fes_max", "fes_mean", "fes_median", "fes_std"]
TRACE_HEADER = ["checkpoint_pct", "fes", "error"]
UNLIMITED = "unlimited"
OUTPUT_ENV = "GRAYGA_OUT"

_PER_DIM = re.compile(r"^\s*(\d+(?:\.\d*)?(?:e\d+)?)\s*\*\s*D\s*$", re.IGNORECASE)


def fmt(value) -> str:
    """Shortest round-trip text for floats; plain text otherwise."""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value == 0.0:
            return "0"
        if value.is_integer() and abs(value) < 1e16:
            return str(int(value))
        return repr(value)
    return str(value)


def resolve_budget(budget, dim: int) -> Optional[int]:
    """``20000``, ``"2e4"``, ``"10000*D"`` or ``"unlimited"`` -> FE count (None when unlimited)."""
    if budget is None or (isinstance(budget, str) and budget.strip().lower() == UNLIMITED):
        return None
    if isinstance(budget, str):
        m = _PER_DIM.match(budget)
        if m:
            return int(float(m.group(1)) * dim)
        try:
            budget = float(budget)
        except ValueError:
            raise ConfigurationError(f"cannot read budget {budget!r}") from None
    if budget <= 0 or not float(budget).is_integer():
        raise ConfigurationError(f"budget must be a positive integer, got {budget!r}")
    return int(budget)


@dataclass
class SummaryStats:
    best: float
    worst: float
    mean: float
    median: float
    std: float
    count: int


def aggregate(values, stop_error: float = 0.0) -> SummaryStats:
    """Best/worst/mean/median/sample-std of per-run values.

    Values below ``stop_error`` count as exactly 0.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise HarnessError("cannot aggregate an empty result set")
    v = np.where(v < stop_error, 0.0, v)
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return SummaryStats(float(v.min()), float(v.max()), float(v.mean()), float(np.median(v)), std, int(v.size))


@dataclass
class ExperimentSpec:
    problems: list
    dims: list
    budgets: list = field(default_factory=lambda: ["10000*D"])
    runs: int = 51
    master_seed: int = 0
    ga: dict = field(default_factory=dict)
    penalty: dict = field(default_factory=dict)
    fes_cap: Optional[object] = None
    shift_file: Optional[str] = None
    name: str = "campaign"

    def __post_init__(self):
        if isinstance(self.problems, str):
            self.problems = [self.problems]
        if isinstance(self.dims, int):
            self.dims = [self.dims]
        if not isinstance(self.budgets, (list, tuple)):
            self.budgets = [self.budgets]
        if self.runs < 1:
            raise ConfigurationError("runs must be >= 1")
        if not self.problems or not self.dims or not self.budgets:
            raise ConfigurationError("problems, dims and budgets must be non-empty")
        for d in self.dims:
            for b in self.budgets:
                resolve_budget(b, d)
        # surface bad operator names before any run starts
        for p in self.problems:
            problem = get_problem(p, self.dims[0], self.shift_file)
            check_config(problem, build_config(self, self.dims[0], resolve_budget(self.budgets[0], self.dims[0]), 0))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        if "problem" in data:
            data["problems"] = data.pop("problem")
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown spec keys: {', '.join(sorted(extra))}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigurationError(f"cannot read spec {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"spec {path} is not a mapping")
        return cls.from_dict(data)

    def cells(self):
        for problem in self.problems:
            for dim in self.dims:
                for budget in self.budgets:
                    yield problem, dim, resolve_budget(budget, dim)


GA_KEYS = {"population_size", "selection", "tournament_size", "crossover", "mutation", "mutation_rate",
           "elitism", "elitism_mode", "genome", "grid_step", "stop_error", "checkpoint_every"}


def build_config(spec: ExperimentSpec, dim: int, max_fes: Optional[int], seed: int) -> GAConfig:
    ga = dict(spec.ga)
    extra = set(ga) - GA_KEYS
    if extra:
        raise ConfigurationError(f"unknown ga keys: {', '.join(sorted(extra))}")
    try:
        selection = ops.Selection(ga.pop("selection", ops.TOURNAMENT), int(ga.pop("tournament_size", 3)))
        penalty = Penalty(**spec.penalty)
    except (TypeError, ops.OperatorError) as exc:
        raise ConfigurationError(str(exc)) from exc
    rate = ga.pop("mutation_rate", "strong")
    if not isinstance(rate, str):
        rate = float(rate)
    cap = resolve_budget(spec.fes_cap, dim) if spec.fes_cap is not None else None
    return GAConfig(
        population_size=int(ga.pop("population_size", 25)),
        max_fes=max_fes,
        selection=selection,
        crossover=ga.pop("crossover", ops.ONE_POINT),
        mutation=ga.pop("mutation", ops.BITFLIP),
        mutation_rate=rate,
        elitism=float(ga.pop("elitism", 0.05)),
        elitism_mode=ga.pop("elitism_mode", "best"),
        genome_kind=ga.pop("genome", None),
        grid_step=float(ga.pop("grid_step", 1e-8)),
        penalty=penalty,
        stop_error=float(ga.pop("stop_error", 1e-8)),
        seed=seed,
        fes_cap=cap,
        checkpoint_every=int(ga.pop("checkpoint_every", 1000)),
    )


def derive_seed(master_seed: int, problem: str, dim: int, max_fes: Optional[int], run_index: int) -> int:
    key = [int(master_seed), zlib.crc32(problem.encode()), int(dim), int(max_fes or 0), int(run_index)]
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0])


@dataclass
class RunRecord:
    problem: str
    dim: int
    max_fes: Optional[int]
    run_index: int
    seed: int
    final_error: float = math.nan
    fes_used: int = 0
    solved: bool = False
    feasible: bool = True
    checkpoints: list = field(default_factory=list)
    failed: Optional[str] = None


def _execute(task) -> RunRecord:
    spec, problem_name, dim, max_fes, run_index = task
    seed = derive_seed(spec.master_seed, problem_name, dim, max_fes, run_index)
    rec = RunRecord(problem_name, dim, max_fes, run_index, seed)
    problem = get_problem(problem_name, dim, spec.shift_file)
    config = build_config(spec, dim, max_fes, seed)
    try:
        result = run_ga(problem, config)
    except EvaluationError as exc:
        rec.failed = str(exc)
        return rec
    t = result.trace
    rec.final_error = t.final_error
    rec.fes_used = t.fes_used
    rec.solved = t.solved
    rec.feasible = t.feasible_found
    rec.checkpoints = list(t.checkpoints)
    return rec


@dataclass
class CampaignResult:
    spec: ExperimentSpec
    records: list

    def cell_records(self):
        cells = {}
        for r in self.records:
            cells.setdefault((r.problem, r.dim, r.max_fes), []).append(r)
        return cells


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> CampaignResult:
    """Run every (problem, dim, budget, run) of ``spec``; results come back in canonical order."""
    tasks = [(spec, p, d, b, k) for p, d, b in spec.cells() for k in range(spec.runs)]
    if jobs <= 1:
        records = [_execute(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_execute, tasks, chunksize=1))
    order = {(p, d, b): i for i, (p, d, b) in enumerate(spec.cells())}
    records.sort(key=lambda r: (order[(r.problem, r.dim, r.max_fes)], r.run_index))
    failed = [r for r in records if r.failed]
    for r in failed:
        log.warning("run %s D%d budget %s #%d failed: %s", r.problem, r.dim, r.max_fes, r.run_index, r.failed)
    return CampaignResult(spec, records)


def _budget_label(max_fes):
    return UNLIMITED if max_fes is None else str(max_fes)


def trace_rows(rec: RunRecord):
    rows = [(fmt(pct) if pct is not None else "", fes, fmt(err)) for pct, fes, err in rec.checkpoints]
    last = rec.checkpoints[-1][1] if rec.checkpoints else 0
    if rec.fes_used > last:
        pct = "" if rec.max_fes is None else fmt(100.0 * rec.fes_used / rec.max_fes)
        rows.append((pct, rec.fes_used, fmt(rec.final_error)))
    return rows


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def summary_rows(result: CampaignResult):
    stop = float(result.spec.ga.get("stop_error", 1e-8))
    rows, fes_rows = [], []
    for (problem, dim, max_fes), recs in result.cell_records().items():
        ok = [r for r in recs if not r.failed]
        solved = [r for r in ok if r.solved]
        label = _budget_label(max_fes)
        if ok:
            s = aggregate([r.final_error for r in ok], stop)
            rows.append([problem, dim, label, len(ok), fmt(s.best), fmt(s.worst), fmt(s.mean),
                         fmt(s.median), fmt(s.std), len(solved)])
        if solved:
            f = aggregate([r.fes_used for r in solved])
            fes_rows.append([problem, dim, label, len(ok), len(solved), fmt(f.best), fmt(f.worst),
                             fmt(f.mean), fmt(f.median), fmt(f.std)])
    return rows, fes_rows


def prepare_output(out_dir) -> Path:
    out = Path(out_dir)
    try:
        (out / "traces").mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise HarnessError(f"output directory {out} is not writable: {exc}") from exc
    return out


def manifest(result: CampaignResult) -> dict:
    spec = result.spec
    return {
        "spec": asdict(spec),
        "runs": [
            {"problem": r.problem, "dimension": r.dim, "max_fes": _budget_label(r.max_fes),
             "run": r.run_index, "seed": r.seed, "fes_used": r.fes_used, "final_error": r.final_error,
             "solved": r.solved, "feasible": r.feasible, "failed": r.failed}
            for r in result.records
        ],
        "failed": sum(1 for r in result.records if r.failed),
    }


def write_outputs(result: CampaignResult, out_dir) -> Path:
    """Write summary.csv, fes_summary.csv, traces/*.csv and manifest.json."""
    if not result.records:
        raise HarnessError("no results to write")
    out = prepare_output(out_dir)
    rows, fes_rows = summary_rows(result)
    (out / "summary.csv").write_text(_csv_text(SUMMARY_HEADER, rows))
    (out / "fes_summary.csv").write_text(_csv_text(FES_HEADER, fes_rows))
    for r in result.records:
        if r.failed:
            continue
        name = f"{r.problem}_{r.dim}_{_budget_label(r.max_fes)}_run{r.run_index}.csv"
        (out / "traces" / name).write_text(_csv_text(TRACE_HEADER, trace_rows(r)))
    (out / "manifest.json").write_text(json.dumps(manifest(result), indent=2, sort_keys=True, default=str) + "\n")
    return out


def default_output_dir() -> str:
    return os.environ.get(OUTPUT_ENV, "results")


# -- built-in reproduction campaigns -------------------------------------

_CO1_GA = {"population_size": 25, "selection": "ranked", "crossover": "two_point", "mutation_rate": "strong",
           "elitism": 0.05, "genome": "gray", "grid_step": 1e-4, "stop_error": 1e-4}
_CONT_GA = {"population_size": 25, "selection": "tournament", "tournament_size": 3, "crossover": "one_point",
            "mutation_rate": "strong", "elitism": 0.05, "genome": "gray", "grid_step": 1e-8, "stop_error": 1e-8}
_BOOL_GA = {"population_size": 10, "selection": "tournament", "tournament_size": 3, "crossover": "uniform",
            "mutation_rate": "normal", "elitism": 0.05, "genome": "plain", "stop_error": 1e-8}

REPRO = {
    "table1": dict(problems=["co1"], dims=[10, 30, 50, 100], budgets=[20000, 100000, 200000], runs=30,
                   ga=_CO1_GA, penalty={"kind": "dynamic"}),
    "table2": dict(problems=["co1"], dims=[10], budgets=[20000, 100000, 200000], runs=30,
                   ga={**_CO1_GA, "grid_step": 1e-5}, penalty={"kind": "dynamic"}),
    "table3": dict(problems=["co1"], dims=[10], budgets=[20000, 100000, 200000], runs=30,
                   ga={**_CO1_GA, "grid_step": 1e-3}, penalty={"kind": "dynamic"}),
    "table4": dict(problems=[f"f{i}" for i in range(1, 15)], dims=[10], budgets=["10000*D"], runs=51,
                   ga=_CONT_GA),
    "table5": dict(problems=["onemax", "leadingones", "trap"], dims=[50, 100, 200, 500, 1000],
                   budgets=[UNLIMITED], runs=51, ga=_BOOL_GA, fes_cap="2000*D"),
}


def repro_spec(name: str, scale: int = 1, master_seed: int = 2024) -> ExperimentSpec:
    """Built-in campaign; ``scale > 1`` divides run counts (at least 5) and keeps dims <= 30."""
    try:
        base = copy.deepcopy(REPRO[name])
    except KeyError:
        raise ConfigurationError(f"unknown repro target {name!r}; choose from {', '.join(REPRO)}") from None
    if scale > 1:
        base["runs"] = max(5, base["runs"] // scale)
        dims = [d for d in base["dims"] if d <= 30]
        base["dims"] = dims or [min(base["dims"])]
    return ExperimentSpec(name=name, master_seed=master_seed, **base)
