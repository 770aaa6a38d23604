"""GP collocation solvers: a linear elliptic problem solved in one shot and
a linearized time-marching scheme with uncertainty propagation."""

from .burgers import (BurgersProblem, BurgersRun, StepRecord, TimeStepState,
                      burgers_march, burgers_reference, prev_step_operator)
from .poisson import (POISSON_PRESETS, PoissonProblem, PoissonResult,
                      poisson_solve, solution_1, solution_2, source_1,
                      source_2)

__all__ = [
    "BurgersProblem", "BurgersRun", "POISSON_PRESETS", "PoissonProblem",
    "PoissonResult", "StepRecord", "TimeStepState", "burgers_march",
    "burgers_reference", "poisson_solve", "prev_step_operator",
    "solution_1", "solution_2", "source_1", "source_2",
]
