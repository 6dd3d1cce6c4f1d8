from abc import ABC, abstractmethod
from typing import Callable

from cehpo.hyperspace.spaces import HyperValue
from cehpo.models.config import Direction


class Objective(ABC):
    """
    The performance metric F of a hyperparameter value. Implementations must be pure: the same value and evaluation
    seed always give the same score, and evaluate may be called from several threads at once.
    """

    name: str
    direction: Direction

    @abstractmethod
    def evaluate(self, value: HyperValue, eval_seed: int) -> float:
        """
        Score a hyperparameter value
        :param value: the hyperparameter value
        :param eval_seed: seed for any randomness of the evaluation
        :return: the score, to be minimized or maximized according to direction
        """
        pass

    def __call__(self, value: HyperValue, eval_seed: int = 0) -> float:
        return self.evaluate(value, eval_seed)

    def __repr__(self):
        return f"{self.__class__.__name__}({self.name}, {self.direction})"


class FunctionObjective(Objective):
    """
    Wraps a plain function of (value, eval_seed).
    """

    def __init__(self, name: str, direction: Direction, fn: Callable[[HyperValue, int], float]):
        self.name = name
        self.direction = direction
        self.fn = fn

    def evaluate(self, value: HyperValue, eval_seed: int) -> float:
        return float(self.fn(value, eval_seed))
