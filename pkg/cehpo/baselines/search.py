import logging
from dataclasses import dataclass, field

import numpy as np

from cehpo.engine.evaluation import Evaluator
from cehpo.errors import ConfigError, RunError
from cehpo.hyperspace.spaces import HyperValue, Scalar, ScalarIntervalSpace, Space, sample_uniform
from cehpo.objectives.objective import Objective
from cehpo.seeds import MAX_SEED, STREAM_GRID_SEARCH_EVALUATION, STREAM_RANDOM_SEARCH, \
    STREAM_RANDOM_SEARCH_EVALUATION, derive_seed, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineConfig:
    """
    :param budget: total evaluations, None means matching what the cross-entropy run used
    :param grid_points: grid size, None means the same as the budget
    :param seed: seed of the random streams
    """
    budget: int | None = None
    grid_points: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.budget is not None and self.budget < 1:
            raise ConfigError(f"budget must be at least 1, got {self.budget}")
        if self.grid_points is not None and self.grid_points < 2:
            raise ConfigError(f"grid_points must be at least 2, got {self.grid_points}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class SearchResult:
    """
    :param best_value: best value found
    :param best_score: its score
    :param log: every evaluation as (value, score), in evaluation order
    """
    best_value: HyperValue
    best_score: float
    log: list[tuple[HyperValue, float]] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.log)


def _pick_best(objective: Objective, values: list[HyperValue], scores: list[float]) -> SearchResult:
    best = 0
    for i in range(1, len(values)):
        if objective.direction.is_better(scores[i], scores[best]):
            best = i
    return SearchResult(values[best], scores[best], list(zip(values, scores)))


def grid_search(space: ScalarIntervalSpace, objective: Objective, points: int, seed: int = 0,
                evaluator: Evaluator | None = None) -> SearchResult:
    """
    Evaluates points equally spaced values from a to b (both included). Ties go to the lowest value.
    """
    if not isinstance(space, ScalarIntervalSpace):
        raise ConfigError("Grid search only supports interval spaces")
    if points < 2:
        raise ConfigError(f"Grid search needs at least 2 points, got {points}")
    if evaluator is None:
        evaluator = Evaluator()

    values = [Scalar(float(x)) for x in np.linspace(space.a, space.b, points)]
    seeds = [derive_seed(seed, STREAM_GRID_SEARCH_EVALUATION, i) for i in range(points)]
    evaluation = evaluator.evaluate(objective, values, seeds, label="grid search")
    if evaluation.all_failed:
        raise RunError("Every grid search evaluation failed")

    return _pick_best(objective, values, evaluation.scores)


def random_search(space: Space, objective: Objective, budget: int, seed: int = 0,
                  evaluator: Evaluator | None = None) -> SearchResult:
    """
    Evaluates budget uniform draws from the space.
    """
    if budget < 1:
        raise ConfigError(f"Random search needs a budget of at least 1, got {budget}")
    if evaluator is None:
        evaluator = Evaluator()

    rng = make_rng(seed, STREAM_RANDOM_SEARCH)
    values = [sample_uniform(space, rng) for _ in range(budget)]
    seeds = [derive_seed(seed, STREAM_RANDOM_SEARCH_EVALUATION, i) for i in range(budget)]
    evaluation = evaluator.evaluate(objective, values, seeds, label="random search")
    if evaluation.all_failed:
        raise RunError("Every random search evaluation failed")

    return _pick_best(objective, values, evaluation.scores)
