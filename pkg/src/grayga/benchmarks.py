"""Test problems: the constrained CO1 task, 14 box-bounded continuous
functions on [-100, 100]^D, and the OneMax / LeadingOnes / Trap bit problems.

Continuous functions are the plain (unshifted, unrotated) definitions with
optimum value 0.  Bit problems are maximised; their known optimum value is
the maximum, and the engine works on the distance to it.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .encoding import GRAY, PLAIN, PERMUTATION, GridSpec
from .errors import ConfigurationError
from .fitness import ConstraintSet

BOUND = 100.0


def bent_cigar(x):
    return x[0] ** 2 + 1e6 * np.sum(x[1:] ** 2)


def zakharov(x):
    s = np.sum(0.5 * x)
    return np.sum(x ** 2) + s ** 2 + s ** 4


def rosenbrock(x):
    return np.sum(100.0 * (x[:-1] ** 2 - x[1:]) ** 2 + (x[:-1] - 1.0) ** 2)


def rastrigin(x):
    return np.sum(x ** 2 - 10.0 * np.cos(2.0 * np.pi * x) + 10.0)


def _schaffer_g(x, y):
    r2 = x ** 2 + y ** 2
    return 0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2


def expanded_schaffer(x):
    # cyclic: the last pair is (x_D, x_1)
    return np.sum(_schaffer_g(x, np.roll(x, -1)))


def levy(x):
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    body = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return head + body + tail


def elliptic(x):
    d = x.size
    if d == 1:
        return x[0] ** 2
    powers = np.arange(d) / (d - 1)
    return np.sum((1e6) ** powers * x ** 2)


def discus(x):
    return 1e6 * x[0] ** 2 + np.sum(x[1:] ** 2)


def ackley(x):
    d = x.size
    return (-20.0 * np.exp(-0.2 * np.sqrt(np.sum(x ** 2) / d))
            - np.exp(np.sum(np.cos(2.0 * np.pi * x)) / d) + 20.0 + np.e)


_W_A = 0.5 ** np.arange(21)
_W_B = 3.0 ** np.arange(21)
_W_OFFSET = np.sum(_W_A * np.cos(np.pi * _W_B))


def weierstrass(x):
    inner = _W_A * np.cos(2.0 * np.pi * _W_B * (x[:, None] + 0.5))
    return np.sum(inner) - x.size * _W_OFFSET


def griewank(x):
    i = np.arange(1, x.size + 1)
    return np.sum(x ** 2) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0


_K_POW = 2.0 ** np.arange(1, 33)


def _round_half_away(v):
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def katsuura(x):
    d = x.size
    t = _K_POW * x[:, None]
    # absolute distance to the nearest integer; without it the base of the
    # fractional power can go negative
    inner = np.sum(np.abs(t - _round_half_away(t)) / _K_POW, axis=1)
    i = np.arange(1, d + 1)
    return 10.0 / d ** 2 * np.prod((1.0 + i * inner) ** (10.0 / d ** 1.2)) - 10.0 / d ** 2


def happycat(x):
    d = x.size
    sq = np.sum(x ** 2)
    return abs(sq - d) ** 0.25 + (0.5 * sq + np.sum(x)) / d + 0.5


def hgbat(x):
    d = x.size
    sq = np.sum(x ** 2)
    s = np.sum(x)
    return abs(sq ** 2 - s ** 2) ** 0.5 + (0.5 * sq + s) / d + 0.5


CONTINUOUS = {
    1: ("bent_cigar", bent_cigar),
    2: ("zakharov", zakharov),
    3: ("rosenbrock", rosenbrock),
    4: ("rastrigin", rastrigin),
    5: ("expanded_schaffer", expanded_schaffer),
    6: ("levy", levy),
    7: ("elliptic", elliptic),
    8: ("discus", discus),
    9: ("ackley", ackley),
    10: ("weierstrass", weierstrass),
    11: ("griewank", griewank),
    12: ("katsuura", katsuura),
    13: ("happycat", happycat),
    14: ("hgbat", hgbat),
}

UNIMODAL = (1, 2, 7, 8)


def eval_continuous(fid: int, x) -> float:
    try:
        _, fn = CONTINUOUS[fid]
    except KeyError:
        raise ConfigurationError(f"unknown continuous function id {fid!r}") from None
    return float(fn(np.asarray(x, dtype=float)))


def co1_objective(z):
    return float(np.sum(np.cumsum(z) ** 2))


def co1_constraint(z):
    return float(np.sum(z ** 2 - 5000.0 * np.cos(0.1 * np.pi * z) - 4000.0))


def eval_co1(x, shift):
    x = np.asarray(x, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if x.shape != shift.shape:
        raise ConfigurationError(f"x has shape {x.shape} but shift has {shift.shape}")
    z = x - shift
    return co1_objective(z), co1_constraint(z)


def onemax(bits):
    return float(np.sum(bits))


def leadingones(bits):
    bits = np.asarray(bits)
    zeros = np.flatnonzero(bits == 0)
    return float(zeros[0] if zeros.size else bits.size)


def trap(bits):
    bits = np.asarray(bits)
    n = bits.size
    ones = int(np.sum(bits))
    return float((n - ones) + (n + 1) * (ones == n))


BOOLEAN = {"onemax": onemax, "leadingones": leadingones, "trap": trap}


def eval_boolean(name: str, bits) -> float:
    try:
        fn = BOOLEAN[name]
    except KeyError:
        raise ConfigurationError(f"unknown boolean function {name!r}") from None
    bits = np.asarray(bits)
    if bits.size == 0:
        raise ConfigurationError("empty bit vector")
    return fn(bits)


@dataclass
class Problem:
    """A benchmark instance.

    ``objective`` takes the decoded phenotype (real vector, bit vector or
    permutation).  ``optimum`` is the best attainable objective value; the
    run error is ``|objective - optimum|`` either way round.
    """
    name: str
    dim: int
    objective: Callable
    optimum: float
    representation: str = "real"  # real | bits | permutation
    lower: float = -BOUND
    upper: float = BOUND
    constraints: Optional[ConstraintSet] = None
    maximize: bool = False
    shift: Optional[np.ndarray] = None

    def grid(self, step: float) -> GridSpec:
        return GridSpec(self.lower, self.upper, step)

    def default_genome_kind(self) -> str:
        return {"real": GRAY, "bits": PLAIN, "permutation": PERMUTATION}[self.representation]


def load_shift(path, dim: int) -> np.ndarray:
    """Read a shift vector: plain text, one real per line."""
    values = [float(line) for line in Path(path).read_text().split() if line.strip()]
    if len(values) != dim:
        raise ConfigurationError(f"shift file {path} has {len(values)} values, expected {dim}")
    return np.array(values)


def make_co1(dim: int, shift=None) -> Problem:
    shift = np.zeros(dim) if shift is None else np.asarray(shift, dtype=float)
    if shift.shape != (dim,):
        raise ConfigurationError(f"shift must have length {dim}")
    return Problem(
        name="co1",
        dim=dim,
        objective=lambda x: co1_objective(x - shift),
        optimum=0.0,
        constraints=ConstraintSet(inequalities=[lambda x: co1_constraint(x - shift)]),
        shift=shift,
    )


def problem_names():
    return ["co1"] + [name for name, _ in CONTINUOUS.values()] + list(BOOLEAN)


def get_problem(name: str, dim: int, shift_file=None) -> Problem:
    """Build a problem by name (``co1``, ``rastrigin``, ``f4``, ``onemax`` ...)."""
    if dim < 1:
        raise ConfigurationError("dimension must be >= 1")
    key = name.lower()
    if key == "co1":
        shift = load_shift(shift_file, dim) if shift_file else None
        return make_co1(dim, shift)
    if key in BOOLEAN:
        fn = BOOLEAN[key]
        best = dim + 1.0 if key == "trap" else float(dim)
        return Problem(name=key, dim=dim, objective=fn, optimum=best,
                       representation="bits", lower=0.0, upper=1.0, maximize=True)
    for fid, (fname, fn) in CONTINUOUS.items():
        if key in (fname, f"f{fid}", str(fid)):
            return Problem(name=fname, dim=dim, objective=fn, optimum=0.0)
    raise ConfigurationError(f"unknown problem {name!r}; choose from {', '.join(problem_names())}")
