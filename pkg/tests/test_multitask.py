import numpy as np
import pytest

from cehpo.errors import ConfigError, RunError, ShapeMismatchError
from cehpo.hyperspace.spaces import Scalar, ScalarIntervalSpace, Sequence
from cehpo.models.config import CeConfig, Direction
from cehpo.multitask.grid import TaskGrid, run_grid, select_consensus
from cehpo.objectives.objective import FunctionObjective


def medoid_oracle(values):
    sums = [sum((y - x) ** 2 for y in values) for x in values]
    return values[sums.index(min(sums))]


def shifted_quadratic(center):
    return FunctionObjective(f"quadratic@{center}", Direction.MINIMIZE, lambda v, seed: (v.value - center) ** 2)


def test_select_consensus_examples():
    assert select_consensus([Scalar(0.1), Scalar(0.2), Scalar(0.9)]) == Scalar(0.2)
    assert select_consensus([Scalar(0.4)]) == Scalar(0.4)
    assert select_consensus([Scalar(0.3), Scalar(0.5)]) == Scalar(0.3)
    assert select_consensus([Scalar(0.5), Scalar(0.3)]) == Scalar(0.5)


def test_select_consensus_matches_exhaustive_oracle():
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(1000):
        values = rng.uniform(0, 1, size=rng.integers(1, 11)).tolist()
        candidates = [Scalar(v) for v in values]
        chosen = select_consensus(candidates)
        assert chosen in candidates
        if chosen != Scalar(medoid_oracle(values)):
            mismatches += 1
    assert mismatches == 0


def test_select_consensus_of_sequences():
    candidates = [Sequence((0.9, 0.1)), Sequence((0.8, 0.2)), Sequence((0.1, 0.0))]
    assert select_consensus(candidates) == Sequence((0.8, 0.2))


def test_select_consensus_rejects_bad_input():
    with pytest.raises(ValueError):
        select_consensus([])
    with pytest.raises(ShapeMismatchError):
        select_consensus([Scalar(0.1), Sequence((0.2, 0.1))])
    with pytest.raises(ShapeMismatchError):
        select_consensus([Sequence((0.3,)), Sequence((0.2, 0.1))])


def test_grid_needs_tasks():
    with pytest.raises(ConfigError):
        TaskGrid([], [0.7], lambda d, m: shifted_quadratic(m), ScalarIntervalSpace(0.0, 1.0))
    with pytest.raises(ConfigError):
        TaskGrid([0], [], lambda d, m: shifted_quadratic(m), ScalarIntervalSpace(0.0, 1.0))


def test_single_cell_consensus_is_the_cell_best():
    grid = TaskGrid([0], [0.7], lambda d, m: shifted_quadratic(m), ScalarIntervalSpace(0.0, 1.0))
    result = run_grid(grid, CeConfig(seed=1, max_rounds=20))
    assert result.consensus == result.cell_best[0][0][0]


def test_quadratic_grid_recovers_the_minimum():
    grid = TaskGrid([0, 1], [0.7, 0.7], lambda d, m: shifted_quadratic(m), ScalarIntervalSpace(0.0, 1.0))
    result = run_grid(grid, CeConfig(seed=3, max_rounds=50))

    for row in result.cell_best:
        for value, score in row:
            assert abs(value.value - 0.7) <= 0.02
    assert abs(result.consensus.value - 0.7) <= 0.02


def test_cells_use_their_own_seeds():
    grid = TaskGrid([0, 1], [0.7], lambda d, m: shifted_quadratic(m), ScalarIntervalSpace(0.0, 1.0))
    result = run_grid(grid, CeConfig(seed=3, max_rounds=3))
    first, second = result.cell_results[0][0], result.cell_results[1][0]
    assert [s.value for s in first.rounds[0].samples] != [s.value for s in second.rounds[0].samples]


def test_grid_is_deterministic():
    grid = TaskGrid([0, 1], [0.3, 0.6], lambda d, m: shifted_quadratic(m), ScalarIntervalSpace(0.0, 1.0))
    config = CeConfig(seed=11, max_rounds=10)
    first = run_grid(grid, config)
    second = run_grid(grid, config, threads=4)

    assert first.cell_best == second.cell_best
    assert first.consensus == second.consensus


def test_failing_cell_aborts_the_grid():
    def factory(d, m):
        if m == "broken":
            raise ValueError("no such model")
        return shifted_quadratic(0.5)

    grid = TaskGrid([0], [0.5, "broken"], factory, ScalarIntervalSpace(0.0, 1.0))
    with pytest.raises(RunError, match=r"\(d0, m1\)"):
        run_grid(grid, CeConfig(seed=0, max_rounds=2))
