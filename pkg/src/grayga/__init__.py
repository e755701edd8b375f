"""Binary/Gray-coded genetic algorithm with benchmark suite and experiment harness."""
from .benchmarks import Problem, eval_boolean, eval_co1, eval_continuous, get_problem
from .encoding import GridSpec, binary_to_gray, bits_per_var, decode_genome, gray_to_binary
from .engine import GAConfig, RunResult, run_ga
from .fitness import ConstraintSet, Penalty, hyperbolic_fitness, penalized_objective, violations
from .operators import Selection

__version__ = "0.1.0"
