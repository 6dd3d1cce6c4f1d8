import pytest

from cehpo.baselines.comparison import COMPARISON_COLUMNS, compare_methods
from cehpo.baselines.search import BaselineConfig, grid_search, random_search
from cehpo.errors import ConfigError
from cehpo.hyperspace.spaces import DecreasingSequenceSpace, Scalar, ScalarIntervalSpace
from cehpo.models.config import CeConfig, Direction
from cehpo.objectives.objective import FunctionObjective

SMALL_CONFIG = CeConfig(num_samples=20, rho=0.1, favorability=5, max_rounds=5)


def test_baseline_config_validation():
    BaselineConfig(budget=1, grid_points=2)
    with pytest.raises(ConfigError):
        BaselineConfig(budget=0)
    with pytest.raises(ConfigError):
        BaselineConfig(grid_points=1)


def test_grid_search_finds_the_vertex(quadratic_objective):
    result = grid_search(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, 11)

    assert result.evaluations == 11
    assert result.best_value.value == pytest.approx(0.7)
    assert result.best_score == pytest.approx(0.0, abs=1e-12)
    assert result.best_score == min(score for _, score in result.log)


def test_grid_search_endpoints(quadratic_objective):
    result = grid_search(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, 2)
    assert [v.value for v, _ in result.log] == [0.0, 1.0]
    assert result.best_value == Scalar(1.0)


def test_grid_search_ties_go_to_the_lowest_value(constant_objective):
    result = grid_search(ScalarIntervalSpace(0.25, 1.0), constant_objective, 7)
    assert result.best_value == Scalar(0.25)


def test_grid_search_maximize():
    objective = FunctionObjective("peak", Direction.MAXIMIZE, lambda v, seed: -abs(v.value - 0.5))
    result = grid_search(ScalarIntervalSpace(0.0, 1.0), objective, 5)
    assert result.best_value == Scalar(0.5)


def test_grid_search_rejects_sequence_spaces(quadratic_objective):
    with pytest.raises(ConfigError):
        grid_search(DecreasingSequenceSpace.even_split(2, 0.0, 1.0, 10), quadratic_objective, 5)
    with pytest.raises(ConfigError):
        grid_search(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, 1)


def test_random_search_single_draw(quadratic_objective):
    result = random_search(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, 1, seed=4)
    assert result.evaluations == 1
    assert (result.best_value, result.best_score) == result.log[0]


def test_random_search_is_deterministic(quadratic_objective):
    space = ScalarIntervalSpace(0.0, 1.0)
    first = random_search(space, quadratic_objective, 50, seed=9)
    second = random_search(space, quadratic_objective, 50, seed=9)
    assert first == second
    assert first != random_search(space, quadratic_objective, 50, seed=10)


@pytest.mark.parametrize("seed", range(5))
def test_random_search_with_a_large_budget(quadratic_objective, seed):
    space = ScalarIntervalSpace(0.0, 1.0)
    result = random_search(space, quadratic_objective, 10_000, seed=seed)

    assert abs(result.best_value.value - 0.7) <= 0.02
    assert all(0.0 <= v.value <= 1.0 for v, _ in result.log)
    assert result.best_score == min(score for _, score in result.log)


def test_random_search_on_sequences():
    space = DecreasingSequenceSpace.even_split(3, 0.1, 0.9, 30)
    objective = FunctionObjective("spread", Direction.MINIMIZE, lambda v, seed: v.values[0] - v.values[-1])
    result = random_search(space, objective, 30, seed=1)
    assert all(v.values[0] >= v.values[1] >= v.values[2] for v, _ in result.log)


def test_comparison_has_one_row_per_method_and_seed(quadratic_objective):
    comparison = compare_methods(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, SMALL_CONFIG,
                                 BaselineConfig(), [0, 1])
    table = comparison.table

    assert list(table.columns) == COMPARISON_COLUMNS
    assert len(table) == 6
    assert sorted(zip(table["method"], table["seed"])) == sorted(
        (m, s) for m in ("cehpo", "random_search", "grid_search") for s in (0, 1))

    for seed in (0, 1):
        rows = table[table["seed"] == seed].set_index("method")
        assert rows.loc["random_search", "evaluations"] == rows.loc["cehpo", "evaluations"]
        assert rows.loc["grid_search", "evaluations"] == rows.loc["cehpo", "evaluations"]
        assert rows.loc["cehpo", "evaluations"] == comparison.ce_results[seed].evaluations


def test_comparison_with_a_fixed_budget(quadratic_objective):
    comparison = compare_methods(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, SMALL_CONFIG,
                                 BaselineConfig(budget=30, grid_points=5), [3])
    rows = comparison.table.set_index("method")
    assert rows.loc["random_search", "evaluations"] == 30
    assert rows.loc["grid_search", "evaluations"] == 5


def test_comparison_skips_grid_search_for_sequences():
    space = DecreasingSequenceSpace.even_split(2, 0.1, 0.9, 30)
    objective = FunctionObjective("spread", Direction.MINIMIZE, lambda v, seed: v.values[0] - v.values[1])
    comparison = compare_methods(space, objective, SMALL_CONFIG, BaselineConfig(), [0])
    assert list(comparison.table["method"]) == ["cehpo", "random_search"]


def test_comparison_needs_unique_seeds(quadratic_objective):
    with pytest.raises(ConfigError):
        compare_methods(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, SMALL_CONFIG, BaselineConfig(), [])
    with pytest.raises(ConfigError):
        compare_methods(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, SMALL_CONFIG, BaselineConfig(), [1, 1])
