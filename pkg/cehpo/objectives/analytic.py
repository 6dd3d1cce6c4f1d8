import math

from cehpo.errors import EvaluationError
from cehpo.hyperspace.spaces import HyperValue, Scalar, ScalarIntervalSpace
from cehpo.models.config import Direction
from cehpo.objectives.objective import Objective


def quadratic(x: float) -> float:
    """
    (x - 0.7)^2, minimum 0 at 0.7.
    """
    return (x - 0.7) ** 2


def gramacy_lee(x: float) -> float:
    """
    Gramacy & Lee (2012): sin(10 pi x) / (2x) + (x - 1)^4 on [0.5, 2.5]. Many local minima, the global one is
    close to the left edge (x ~ 0.5486).
    """
    return math.sin(10 * math.pi * x) / (2 * x) + (x - 1) ** 4


def double_well(x: float) -> float:
    """
    (x^2 - 1)^2, two global minima at -1 and +1.
    """
    return (x ** 2 - 1) ** 2


ANALYTIC_FUNCTIONS = {
    "quadratic": (quadratic, ScalarIntervalSpace(0.0, 1.0)),
    "gramacy_lee": (gramacy_lee, ScalarIntervalSpace(0.5, 2.5)),
    "double_well": (double_well, ScalarIntervalSpace(-2.0, 2.0)),
}


class AnalyticObjective(Objective):
    """
    A closed-form test function of a scalar. The evaluation seed is ignored.
    """

    def __init__(self, name: str, direction: Direction = Direction.MINIMIZE):
        if name not in ANALYTIC_FUNCTIONS:
            raise ValueError(f"Unknown analytic objective: {name} (known: {', '.join(ANALYTIC_FUNCTIONS)})")
        self.name = name
        self.direction = direction
        self.fn, self.domain = ANALYTIC_FUNCTIONS[name]

    def evaluate(self, value: HyperValue, eval_seed: int) -> float:
        if not isinstance(value, Scalar):
            raise EvaluationError(f"{self.name} takes a scalar, got {value.to_str()}")
        return float(self.fn(value.value))


def analytic_objective(name: str, direction: Direction = Direction.MINIMIZE) -> AnalyticObjective:
    return AnalyticObjective(name, direction)
