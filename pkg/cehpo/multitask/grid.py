import logging
from dataclasses import dataclass
from typing import Any, Callable

from cehpo.engine.ce import run_cehpo
from cehpo.engine.evaluation import Evaluator
from cehpo.errors import ConfigError, RunError, ShapeMismatchError
from cehpo.hyperspace.spaces import HyperValue, Space, distance_sq, same_shape
from cehpo.jobs.jobs import JobHandler
from cehpo.jobs.memory import MemoryJobsDataSource
from cehpo.models.config import CeConfig
from cehpo.models.samples import CeResult
from cehpo.objectives.objective import Objective
from cehpo.seeds import STREAM_GRID_CELL, derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaskGrid:
    """
    Datasets x problems, every cell tuned over the same space.

    :param datasets: the dataset specs d_i
    :param problems: the problem specs m_j
    :param factory: builds the objective of cell (d_i, m_j)
    :param space: the space shared by all cells
    """
    datasets: list[Any]
    problems: list[Any]
    factory: Callable[[Any, Any], Objective]
    space: Space

    def __post_init__(self):
        if len(self.datasets) < 1:
            raise ConfigError("A task grid needs at least one dataset")
        if len(self.problems) < 1:
            raise ConfigError("A task grid needs at least one problem")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.datasets), len(self.problems)

    def cells(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(len(self.datasets)) for j in range(len(self.problems))]


@dataclass(frozen=True)
class GridResult:
    """
    :param cell_best: cell_best[i][j] is the best (value, score) of dataset i and problem j
    :param consensus: the cell best with the least total squared distance to all cell bests
    :param cell_results: the full result of every cell, indexed like cell_best
    """
    cell_best: list[list[tuple[HyperValue, float]]]
    consensus: HyperValue
    cell_results: list[list[CeResult]]


def select_consensus(candidates: list[HyperValue]) -> HyperValue:
    """
    The candidate minimizing the sum of squared distances to all candidates (a medoid). Ties go to the lowest index.
    """
    if len(candidates) == 0:
        raise ValueError("Cannot select a consensus from no candidates")
    for c in candidates[1:]:
        if not same_shape(candidates[0], c):
            raise ShapeMismatchError(f"Candidates of different shapes: {candidates[0].to_str()} and {c.to_str()}")

    best_index = 0
    best_sum = None
    for i, x in enumerate(candidates):
        total = sum(distance_sq(y, x) for y in candidates)
        if best_sum is None or total < best_sum:
            best_index = i
            best_sum = total
    return candidates[best_index]


def run_grid(grid: TaskGrid, config: CeConfig, threads: int = 1, evaluator: Evaluator | None = None) -> GridResult:
    """
    Runs one cross-entropy search per (dataset, problem) cell and picks the consensus of the cell bests.
    :param grid: the task grid
    :param config: the config shared by all cells, each cell gets its own seed derived from config.seed
    :param threads: number of cells run at once
    :param evaluator: (optional) evaluator used inside each cell
    :return: the grid result
    """
    n_d, n_ml = grid.shape
    results: list[list[CeResult | None]] = [[None] * n_ml for _ in range(n_d)]

    def handle(job_id: str):
        i, j = (int(x) for x in job_id.split(":"))
        objective = grid.factory(grid.datasets[i], grid.problems[j])
        cell_config = config.with_seed(derive_seed(config.seed, STREAM_GRID_CELL, i, j))
        logger.info(f"Running cell (d{i}, m{j}) with {objective.name}")
        results[i][j] = run_cehpo(grid.space, objective, cell_config, evaluator)

    job_handler = JobHandler("grid", MemoryJobsDataSource())
    job_handler.create_jobs([f"{i}:{j}" for i, j in grid.cells()])
    job_handler.iterate_jobs(handle, threads=threads)

    errors = job_handler.get_errors()
    if errors:
        first = sorted(errors, key=lambda k: tuple(int(x) for x in k.split(":")))[0]
        i, j = first.split(":")
        raise RunError(f"Grid cell (d{i}, m{j}) failed: {errors[first]}")

    cell_best = [[(r.best_value, r.best_score) for r in row] for row in results]
    consensus = select_consensus([cell_best[i][j][0] for i, j in grid.cells()])
    logger.info(f"Consensus over {n_d * n_ml} cells: {consensus.to_str()}")

    return GridResult(cell_best, consensus, results)
