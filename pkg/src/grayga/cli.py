"""Command line entry point: ``grayga list|run|bench|repro``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from . import operators as ops
from .benchmarks import CONTINUOUS, get_problem, problem_names
from .engine import GAConfig, run_ga
from .errors import ConfigurationError, EvaluationError, HarnessError, OperatorError
from .fitness import PENALTIES, Penalty

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def cmd_list(args):
    print("problems:")
    print("  co1 (constrained)")
    for fid, (name, _) in CONTINUOUS.items():
        print(f"  f{fid} {name}")
    for name in ("onemax", "leadingones", "trap"):
        print(f"  {name} (bits, maximise)")
    print("selection:", ", ".join(ops.SELECTIONS))
    print("crossover:", ", ".join(ops.CROSSOVERS))
    print("mutation:", ", ".join(ops.MUTATIONS), "(rates: normal=1/L, strong=3/L, or a number)")
    print("penalty:", ", ".join(PENALTIES))
    print("repro targets:", ", ".join(harness.REPRO))
    return EXIT_OK


def _rate(text):
    try:
        return float(text)
    except ValueError:
        return text


def cmd_run(args):
    problem = get_problem(args.problem, args.dim, args.shift_file)
    max_fes = harness.resolve_budget(args.max_fes, args.dim)
    try:
        selection = ops.Selection(args.selection, args.tournament_size)
    except OperatorError as exc:
        raise ConfigurationError(str(exc)) from exc
    config = GAConfig(
        population_size=args.pop,
        max_fes=max_fes,
        selection=selection,
        crossover=args.crossover,
        mutation_rate=_rate(args.mutation_rate),
        elitism=args.elitism,
        genome_kind=args.genome,
        grid_step=args.grid_step,
        penalty=Penalty(args.penalty),
        stop_error=args.stop_error,
        seed=args.seed,
        fes_cap=harness.resolve_budget(args.fes_cap, args.dim) if args.fes_cap else None,
    )
    out = harness.prepare_output(args.out)
    result = run_ga(problem, config)
    rec = harness.RunRecord(problem.name, args.dim, max_fes, 0, args.seed, result.error,
                            result.trace.fes_used, result.trace.solved, result.trace.feasible_found,
                            result.trace.checkpoints)
    stem = f"{problem.name}_{args.dim}_{harness._budget_label(max_fes)}_seed{args.seed}"
    (out / "traces" / f"{stem}.csv").write_text(harness._csv_text(harness.TRACE_HEADER, harness.trace_rows(rec)))
    gen_rows = [[g, f, harness.fmt(e), harness.fmt(b), harness.fmt(m), harness.fmt(w)]
                for g, f, e, b, m, w in result.history]
    (out / f"{stem}_generations.csv").write_text(harness._csv_text(
        ["generation", "fes", "error", "best_fitness", "mean_fitness", "worst_fitness"], gen_rows))
    print(json.dumps({
        "problem": problem.name, "dimension": args.dim, "seed": args.seed,
        "max_fes": harness._budget_label(max_fes), "fes_used": result.trace.fes_used,
        "generations": result.generations, "error": result.error, "solved": result.trace.solved,
        "feasible": result.trace.feasible_found, "objective": result.best.objective,
    }))
    return EXIT_OK


def _run_campaign(spec, out, jobs):
    harness.prepare_output(out)
    result = harness.run_experiment(spec, jobs=jobs)
    path = harness.write_outputs(result, out)
    sys.stdout.write((path / "summary.csv").read_text())
    failed = sum(1 for r in result.records if r.failed)
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_bench(args):
    spec = harness.ExperimentSpec.load(args.spec)
    return _run_campaign(spec, args.out, args.jobs)


def cmd_repro(args):
    spec = harness.repro_spec(args.target, scale=args.scale, master_seed=args.seed)
    out = Path(args.out) / args.target
    return _run_campaign(spec, out, args.jobs)


def build_parser():
    p = argparse.ArgumentParser(prog="grayga", description="Binary/Gray-coded GA benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list problems and operators").set_defaults(func=cmd_list)

    r = sub.add_parser("run", help="single GA run")
    r.add_argument("--problem", required=True, help=", ".join(problem_names()))
    r.add_argument("--dim", type=int, required=True)
    r.add_argument("--max-fes", default="10000*D", help="integer, 'k*D' or 'unlimited'")
    r.add_argument("--fes-cap", default=None, help="safety stop for unlimited budgets")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--pop", type=int, default=25)
    r.add_argument("--selection", default=ops.TOURNAMENT, choices=ops.SELECTIONS)
    r.add_argument("--tournament-size", type=int, default=3)
    r.add_argument("--crossover", default=ops.ONE_POINT, choices=ops.BINARY_CROSSOVERS)
    r.add_argument("--mutation-rate", default="strong", help="normal, strong or a probability")
    r.add_argument("--elitism", type=float, default=0.05)
    r.add_argument("--grid-step", type=float, default=1e-8)
    r.add_argument("--genome", default=None, choices=["plain", "gray"])
    r.add_argument("--penalty", default="dynamic", choices=PENALTIES)
    r.add_argument("--stop-error", type=float, default=1e-8)
    r.add_argument("--shift-file", default=None)
    r.add_argument("--out", default=harness.default_output_dir())
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="campaign from a YAML spec file")
    b.add_argument("--spec", required=True)
    b.add_argument("--out", default=harness.default_output_dir())
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    rp = sub.add_parser("repro", help="built-in reproduction campaigns")
    rp.add_argument("target", choices=sorted(harness.REPRO))
    rp.add_argument("--scale", type=int, default=1, help="divide run counts (min 5) and keep D <= 30")
    rp.add_argument("--seed", type=int, default=2024)
    rp.add_argument("--out", default=harness.default_output_dir())
    rp.add_argument("--jobs", type=int, default=1)
    rp.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, OperatorError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, HarnessError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
