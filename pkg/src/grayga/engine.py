"""Generational GA loop with elitism, FE budgeting and error traces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import operators as ops
from .benchmarks import Problem
from .encoding import GRAY, PERMUTATION, PLAIN, GridSpec, bits_per_var, decode_genome, random_population
from .errors import ConfigurationError, EvaluationError
from .fitness import ADAPTIVE, AdaptiveState, Penalty, hyperbolic_fitness, penalty_term, violations

MUTATION_PRESETS = {"normal": 1.0, "strong": 3.0}
UNLIMITED_CHECKPOINT_EVERY = 1000


@dataclass
class GAConfig:
    population_size: int = 25
    max_fes: Optional[int] = 100_000  # None: run until solved (or fes_cap)
    selection: ops.Selection = field(default_factory=ops.Selection)
    crossover: str = ops.ONE_POINT
    mutation: str = ops.BITFLIP
    mutation_rate: Union[str, float] = "strong"  # "normal" = 1/L, "strong" = 3/L
    elitism: float = 0.05
    elitism_mode: str = "best"
    genome_kind: Optional[str] = None  # defaults to the problem's natural kind
    grid_step: float = 1e-8
    penalty: Penalty = field(default_factory=Penalty)
    stop_error: float = 1e-8
    seed: int = 0
    fes_cap: Optional[int] = None  # safety stop for unlimited budgets
    checkpoint_every: int = UNLIMITED_CHECKPOINT_EVERY

    def resolved_rate(self, length: int) -> float:
        if isinstance(self.mutation_rate, str):
            try:
                return min(1.0, MUTATION_PRESETS[self.mutation_rate] / length)
            except KeyError:
                raise ConfigurationError(f"unknown mutation preset {self.mutation_rate!r}") from None
        return float(self.mutation_rate)


@dataclass
class Individual:
    genome: np.ndarray
    phenotype: np.ndarray
    objective: float
    violations: np.ndarray
    penalized: float
    fitness: float

    @property
    def feasible(self) -> bool:
        return not np.any(self.violations > 0)


@dataclass
class RunTrace:
    # (checkpoint_pct or None, fes, best-so-far error)
    checkpoints: list = field(default_factory=list)
    fes_used: int = 0
    final_error: float = math.inf
    solved: bool = False
    feasible_found: bool = True


@dataclass
class RunResult:
    best: Individual
    trace: RunTrace
    generations: int
    # per generation: (generation, fes, best error, best/mean/worst fitness)
    history: list

    @property
    def error(self) -> float:
        return self.trace.final_error


class _Run:
    """Mutable state of one run; not shared between runs."""

    def __init__(self, problem: Problem, config: GAConfig):
        self.problem = problem
        self.config = config
        self.kind = config.genome_kind or problem.default_genome_kind()
        self._validate()
        if problem.representation == "real":
            self.grid = GridSpec(problem.lower, problem.upper, config.grid_step)
            self.length = problem.dim * bits_per_var(self.grid)
        else:
            self.grid = None
            self.length = problem.dim
        self.rate = config.resolved_rate(self.length)
        self.rng = np.random.default_rng(config.seed)
        self.ncons = len(problem.constraints) if problem.constraints else 0
        self.adaptive = AdaptiveState.from_penalty(config.penalty) if config.penalty.kind == ADAPTIVE else None

        self.fes = 0
        self.generation = 0
        self.trace = RunTrace()
        self.best: Optional[Individual] = None
        self.best_key = (True, math.inf, math.inf)
        self.done = False
        self.history = []
        self._next_pct = 1

    def _validate(self):
        c, p = self.config, self.problem
        if c.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if c.max_fes is not None and c.max_fes < c.population_size:
            raise ConfigurationError("max_fes must be at least the population size")
        if c.stop_error < 0:
            raise ConfigurationError("stop_error must be >= 0")
        ops.elite_count(c.elitism, c.population_size)
        if self.kind == PERMUTATION:
            if p.representation != "permutation":
                raise ConfigurationError(f"problem {p.name} does not take permutations")
            if c.crossover != ops.ORDER_OX1 or c.mutation not in ops.PERMUTATION_MUTATIONS:
                raise ConfigurationError("permutation genomes need ox1 crossover and a permutation mutation")
        elif self.kind in (PLAIN, GRAY):
            if p.representation == "permutation":
                raise ConfigurationError(f"problem {p.name} needs permutation genomes")
            if c.crossover not in ops.BINARY_CROSSOVERS or c.mutation != ops.BITFLIP:
                raise ConfigurationError("binary genomes need a binary crossover and bitflip mutation")
        else:
            raise ConfigurationError(f"unknown genome kind {self.kind!r}")

    # -- evaluation -----------------------------------------------------

    def phenotypes(self, genomes):
        if self.grid is None:
            return genomes
        return decode_genome(genomes, self.grid, self.problem.dim, self.kind)

    def reported(self, error: float) -> float:
        return 0.0 if error < self.config.stop_error else error

    def _budget_left(self) -> bool:
        limit = self.config.max_fes if self.config.max_fes is not None else self.config.fes_cap
        return limit is None or self.fes < limit

    def evaluate(self, genomes):
        """Evaluate rows in order until the budget runs out or the target is hit.

        Returns (objectives, violations, count evaluated).
        """
        n = len(genomes)
        phen = self.phenotypes(genomes)
        obj = np.empty(n)
        viol = np.zeros((n, self.ncons))
        for i in range(n):
            if self.done or not self._budget_left():
                self.done = True
                return obj[:i], viol[:i], i
            f = float(self.problem.objective(phen[i]))
            self.fes += 1
            if not math.isfinite(f):
                raise EvaluationError(
                    f"objective returned {f} at generation {self.generation} for genome "
                    f"{''.join(map(str, genomes[i][:64]))}{'...' if genomes.shape[1] > 64 else ''}")
            obj[i] = f
            if self.ncons:
                viol[i] = violations(phen[i], self.problem.constraints)
            self._observe(genomes[i], phen[i], f, viol[i])
        return obj, viol, n

    def _observe(self, genome, phen, f, v):
        error = abs(f - self.problem.optimum)
        total_v = float(v.sum())
        key = (total_v > 0, total_v, error)
        if key < self.best_key:
            self.best_key = key
            self.best = Individual(genome.copy(), np.array(phen, copy=True), f, v.copy(), math.nan, math.nan)
        self._checkpoint()
        if not self.best_key[0] and self.best_key[2] < self.config.stop_error:
            self.trace.solved = True
            self.done = True

    def _checkpoint(self):
        err = self.reported(self.best_key[2])
        max_fes = self.config.max_fes
        if max_fes is None:
            if self.fes % self.config.checkpoint_every == 0:
                self.trace.checkpoints.append((None, self.fes, err))
            return
        while self._next_pct <= 100 and self.fes >= math.ceil(self._next_pct * max_fes / 100):
            self.trace.checkpoints.append((self._next_pct, self.fes, err))
            self._next_pct += 1

    def score(self, obj, viol):
        pen = obj + penalty_term(viol, self.config.penalty, self.generation, self.adaptive)
        return pen, hyperbolic_fitness(pen, self.problem.optimum)

    # -- loop -------------------------------------------------------------

    def initial(self):
        c = self.config
        genomes = random_population(self.kind, c.population_size, self.length, self.rng)
        obj, viol, _ = self.evaluate(genomes)
        return genomes, obj, viol

    def breed(self, genomes, fit):
        c = self.config
        n = c.population_size
        parents = ops.select(c.selection, fit, n, self.rng)
        if n % 2:
            parents = np.append(parents, parents[-1])
        children = np.empty((len(parents),) + genomes.shape[1:], dtype=genomes.dtype)
        for k in range(0, len(parents), 2):
            a, b = genomes[parents[k]], genomes[parents[k + 1]]
            if self.kind == PERMUTATION:
                children[k], children[k + 1] = ops.crossover_order(a, b, self.rng)
            else:
                children[k], children[k + 1] = ops.crossover_binary(c.crossover, a, b, self.rng)
        children = children[:n]
        if self.kind == PERMUTATION:
            return np.stack([ops.mutate_permutation(c.mutation, ch, self.rng) for ch in children])
        return ops.mutate_binary(children, self.rate, self.rng)

    def record_generation(self, fit):
        self.history.append((self.generation, self.fes, self.reported(self.best_key[2]),
                             float(fit.max()), float(fit.mean()), float(fit.min())))

    def run(self) -> RunResult:
        c = self.config
        genomes, obj, viol = self.initial()
        if len(obj) == c.population_size:
            _, fit = self.score(obj, viol)
            self.record_generation(fit)
        while not self.done:
            if c.max_fes is not None and self.fes >= c.max_fes:
                break
            self.generation += 1
            if self.adaptive is not None:
                _, fit = self.score(obj, viol)
                self.adaptive.update(not np.any(viol[int(np.argmax(fit))] > 0))
            _, prev_fit = self.score(obj, viol)
            children = self.breed(genomes, prev_fit)
            cobj, cviol, count = self.evaluate(children)
            if count < len(children):
                break
            _, child_fit = self.score(cobj, cviol)
            donors, slots = ops.apply_elitism(prev_fit, child_fit, c.elitism, self.rng, c.elitism_mode)
            children[slots] = genomes[donors]
            cobj[slots] = obj[donors]
            cviol[slots] = viol[donors]
            genomes, obj, viol = children, cobj, cviol
            child_fit[slots] = prev_fit[donors]
            self.record_generation(child_fit)
        return self.finish()

    def finish(self) -> RunResult:
        best = self.best
        pen = best.objective + penalty_term(best.violations, self.config.penalty, self.generation, self.adaptive)
        best.penalized = float(pen)
        best.fitness = float(hyperbolic_fitness(pen, self.problem.optimum))
        t = self.trace
        t.fes_used = self.fes
        t.final_error = self.reported(self.best_key[2])
        t.feasible_found = not self.best_key[0]
        return RunResult(best, t, self.generation, self.history)


def check_config(problem: Problem, config: GAConfig) -> None:
    """Raise ConfigurationError if ``config`` cannot drive ``problem``."""
    _Run(problem, config)


def run_ga(problem: Problem, config: GAConfig) -> RunResult:
    """Run one GA; the result is a deterministic function of ``(problem, config)``."""
    return _Run(problem, config).run()
