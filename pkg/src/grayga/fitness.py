"""Constraint violations, penalty functions and the hyperbolic fitness map."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, EvaluationError

EQUALITY_EPSILON = 1e-4

NONE = "none"
STATIC = "static"
DYNAMIC = "dynamic"
ADAPTIVE = "adaptive"
PENALTIES = (NONE, STATIC, DYNAMIC, ADAPTIVE)


@dataclass
class ConstraintSet:
    """``g(x) <= 0`` inequalities and ``h(x) = 0`` equalities.

    Equalities are relaxed to ``|h(x)| - epsilon <= 0``.
    """
    inequalities: Sequence[Callable] = ()
    equalities: Sequence[Callable] = ()
    epsilon: float = EQUALITY_EPSILON

    def __len__(self):
        return len(self.inequalities) + len(self.equalities)


def violations(x, cs: ConstraintSet) -> np.ndarray:
    out = []
    for g in cs.inequalities:
        out.append(max(0.0, _finite(g(x))))
    for h in cs.equalities:
        out.append(max(0.0, abs(_finite(h(x))) - cs.epsilon))
    return np.array(out, dtype=float)


def _finite(value) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise EvaluationError(f"constraint evaluated to {value}")
    return value


@dataclass(frozen=True)
class Penalty:
    """Penalty kind plus its parameters.

    static:   f + weight * sum(v^2)
    dynamic:  f + (C * t)^alpha * sum(v^beta)
    adaptive: f + lambda * sum(v^2), lambda tracked by :class:`AdaptiveState`
    """
    kind: str = NONE
    weight: float = 1e3
    C: float = 0.5
    alpha: float = 2.0
    beta: float = 2.0
    lambda0: float = 1.0
    shrink: float = 2.0
    grow: float = 2.0
    window: int = 5

    def __post_init__(self):
        if self.kind not in PENALTIES:
            raise ConfigurationError(f"unknown penalty {self.kind!r}")
        numbers = (self.weight, self.C, self.alpha, self.beta, self.lambda0, self.shrink, self.grow)
        if not all(math.isfinite(v) and v > 0 for v in numbers):
            raise ConfigurationError("penalty parameters must be finite and positive")
        if self.kind == ADAPTIVE and (self.shrink <= 1 or self.grow <= 1 or self.window < 1):
            raise ConfigurationError("adaptive penalty needs shrink > 1, grow > 1, window >= 1")


@dataclass
class AdaptiveState:
    """Multiplier for the adaptive penalty, driven by the feasibility of each generation's best."""
    lam: float
    grow: float
    shrink: float
    window: int
    infeasible_streak: int = 0
    feasible_streak: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def from_penalty(cls, p: Penalty) -> "AdaptiveState":
        return cls(lam=p.lambda0, grow=p.grow, shrink=p.shrink, window=p.window)

    def update(self, best_feasible: bool) -> float:
        if best_feasible:
            self.feasible_streak += 1
            self.infeasible_streak = 0
            if self.feasible_streak >= self.window:
                self.lam /= self.shrink
                self.feasible_streak = 0
        else:
            self.infeasible_streak += 1
            self.feasible_streak = 0
            if self.infeasible_streak >= self.window:
                self.lam *= self.grow
                self.infeasible_streak = 0
        self.history.append(self.lam)
        return self.lam


def penalty_term(v, penalty: Penalty, generation: int = 0, state: AdaptiveState | None = None):
    """Penalty added to the raw objective.

    ``v`` may be one violation vector or a 2-D array (one row per individual).
    """
    v = np.asarray(v, dtype=float)
    if penalty.kind == NONE or v.shape[-1] == 0:
        return np.zeros(v.shape[:-1]) if v.ndim > 1 else 0.0
    if penalty.kind == STATIC:
        total = penalty.weight * (v ** 2).sum(axis=-1)
    elif penalty.kind == DYNAMIC:
        total = (penalty.C * generation) ** penalty.alpha * (v ** penalty.beta).sum(axis=-1)
    else:
        lam = state.lam if state is not None else penalty.lambda0
        total = lam * (v ** 2).sum(axis=-1)
    return total


def penalized_objective(f, v, penalty: Penalty, generation: int = 0, state: AdaptiveState | None = None):
    return f + penalty_term(v, penalty, generation, state)


def hyperbolic_fitness(f_pen, optimum: float = 0.0):
    """Map distance to the optimum into (0, 1]; 1 exactly at the optimum.

    Uses ``1 / (1 + |f - optimum|)``.  The other sign would go negative or
    blow up once the error reaches 1.
    """
    return 1.0 / (1.0 + np.abs(np.asarray(f_pen, dtype=float) - optimum))
