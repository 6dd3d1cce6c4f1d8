import logging
from dataclasses import dataclass, replace

import pandas as pd

from cehpo.baselines.search import BaselineConfig, SearchResult, grid_search, random_search
from cehpo.engine.ce import run_cehpo
from cehpo.engine.evaluation import Evaluator
from cehpo.errors import ConfigError
from cehpo.hyperspace.spaces import ScalarIntervalSpace, Space
from cehpo.models.config import CeConfig
from cehpo.models.samples import CeResult
from cehpo.objectives.objective import Objective

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ["method", "seed", "evaluations", "best_value", "best_score"]

METHOD_CEHPO = "cehpo"
METHOD_RANDOM_SEARCH = "random_search"
METHOD_GRID_SEARCH = "grid_search"


@dataclass(frozen=True)
class Comparison:
    """
    :param table: one row per (method, seed) with the columns in COMPARISON_COLUMNS
    :param ce_results: the cross-entropy result of every seed
    """
    table: pd.DataFrame
    ce_results: dict[int, CeResult]


def _row(method: str, seed: int, evaluations: int, result: CeResult | SearchResult) -> dict:
    return {
        "method": method,
        "seed": seed,
        "evaluations": evaluations,
        "best_value": result.best_value.to_str(),
        "best_score": result.best_score
    }


def compare_methods(space: Space, objective: Objective, config: CeConfig, baseline: BaselineConfig,
                    seeds: list[int], evaluator: Evaluator | None = None) -> Comparison:
    """
    Runs the cross-entropy search and the baselines once per seed. Unless the baseline config fixes a budget, every
    baseline gets as many evaluations as the cross-entropy run of the same seed used, so early stopping is credited.
    Grid search only runs on interval spaces.
    :param space: the search space
    :param objective: the objective
    :param config: the cross-entropy config, its seed is replaced by each seed
    :param baseline: budget and grid size of the baselines
    :param seeds: the seeds to run
    :param evaluator: (optional) evaluator shared by all methods
    :return: the comparison
    """
    if len(seeds) == 0:
        raise ConfigError("A comparison needs at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ConfigError(f"Comparison seeds must be unique, got {seeds}")
    if evaluator is None:
        evaluator = Evaluator()

    rows = []
    ce_results = {}
    for seed in seeds:
        ce_result = run_cehpo(space, objective, config.with_seed(seed), evaluator)
        ce_results[seed] = ce_result
        rows.append(_row(METHOD_CEHPO, seed, ce_result.evaluations, ce_result))

        seed_baseline = replace(baseline, seed=seed)
        budget = seed_baseline.budget if seed_baseline.budget is not None else ce_result.evaluations

        random_result = random_search(space, objective, budget, seed_baseline.seed, evaluator)
        rows.append(_row(METHOD_RANDOM_SEARCH, seed, random_result.evaluations, random_result))

        if isinstance(space, ScalarIntervalSpace):
            points = seed_baseline.grid_points if seed_baseline.grid_points is not None else max(budget, 2)
            grid_result = grid_search(space, objective, points, seed_baseline.seed, evaluator)
            rows.append(_row(METHOD_GRID_SEARCH, seed, grid_result.evaluations, grid_result))

        logger.info(f"Seed {seed}: cehpo {ce_result.best_score!r} after {ce_result.evaluations} evaluations, "
                    f"random search {random_result.best_score!r} after {random_result.evaluations}")

    return Comparison(pd.DataFrame(rows, columns=COMPARISON_COLUMNS), ce_results)
