import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from cehpo.engine.ce import build_elite, compute_gamma, elite_sample_count, estimate_q, indicator_hit, \
    next_round_samples, round_gamma, run_cehpo, should_stop, smooth_q
from cehpo.engine.diagnostics import result_violations, round_violations
from cehpo.engine.evaluation import Evaluator
from cehpo.errors import ConfigError, EngineInvariantError, RunError, ShapeMismatchError
from cehpo.hyperspace.spaces import Scalar, ScalarIntervalSpace
from cehpo.models.config import CeConfig, Direction, quantile_rank
from cehpo.models.samples import EliteMember, EliteSet, Fresh, ResampledFrom, Sample, StopReason
from cehpo.objectives.objective import FunctionObjective


def gamma_oracle(scores, rho, direction):
    m = len(scores)
    if direction == Direction.MINIMIZE:
        candidates = [f for f in scores if sum(1 for s in scores if s <= f) / m >= rho]
        return min(candidates)
    candidates = [f for f in scores if sum(1 for s in scores if s >= f) / m >= rho]
    return max(candidates)


def scored(scores, q_smooth=None):
    samples = [Sample(value=Scalar(float(i)), score=float(s)) for i, s in enumerate(scores)]
    if q_smooth is not None:
        for sample, q in zip(samples, q_smooth):
            sample.q_smooth = q
    return samples


def test_quantile_rank():
    assert quantile_rank(100, 0.05) == 5
    assert quantile_rank(100, 0.07) == 7
    assert quantile_rank(100, 0.01) == 1
    assert quantile_rank(3, 0.34) == 2
    assert quantile_rank(1, 0.01) == 1


def test_compute_gamma_examples():
    assert compute_gamma([3, 1, 2], 0.34, Direction.MINIMIZE) == 2
    assert compute_gamma([5], 0.01, Direction.MINIMIZE) == 5
    scores = list(range(1, 101))
    assert compute_gamma(scores, 0.01, Direction.MINIMIZE) == 1
    assert compute_gamma(scores, 0.01, Direction.MAXIMIZE) == 100

    with pytest.raises(ValueError):
        compute_gamma([], 0.5, Direction.MINIMIZE)


@pytest.mark.parametrize("direction", [Direction.MINIMIZE, Direction.MAXIMIZE])
@pytest.mark.parametrize("rho", [0.34, 0.5])
def test_compute_gamma_matches_exhaustive_oracle(direction, rho):
    mismatches = 0
    for length in range(1, 9):
        for scores in itertools.product([1, 2, 3, 4], repeat=length):
            if compute_gamma(list(scores), rho, direction) != gamma_oracle(scores, rho, direction):
                mismatches += 1
    assert mismatches == 0


def test_indicator_hit():
    assert indicator_hit(2, 2, Direction.MINIMIZE) == 1
    assert indicator_hit(3, 2, Direction.MINIMIZE) == 0
    assert indicator_hit(3, 2, Direction.MAXIMIZE) == 1
    assert indicator_hit(math.inf, math.inf, Direction.MINIMIZE) == 0
    assert indicator_hit(-math.inf, -math.inf, Direction.MAXIMIZE) == 0


def test_estimate_q():
    assert estimate_q(scored([1, 4, 2, 9]), 2, Direction.MINIMIZE) == [0.5, 0, 0.5, 0]
    assert estimate_q(scored([1, 1, 2, 2]), 2, Direction.MINIMIZE) == [0.25] * 4
    assert estimate_q(scored([1, 4, 5]), 1, Direction.MINIMIZE) == [1.0, 0, 0]

    with pytest.raises(EngineInvariantError):
        estimate_q(scored([3, 4]), 1, Direction.MINIMIZE)


def test_smooth_q():
    assert smooth_q([1.0], [0.0], 0.7) == [0.7]
    assert smooth_q([0.5], [0.1], 0.5) == [pytest.approx(0.3)]
    assert smooth_q([0.2, 0.8], [0.9, 0.4], 1.0) == [0.2, 0.8]

    with pytest.raises(ShapeMismatchError):
        smooth_q([0.5, 0.5], [0.1], 0.5)


def test_build_elite_normalizes_weights():
    elite = build_elite(scored([1, 2, 5], q_smooth=[0.3, 0.1, 0.0]), 2, Direction.MINIMIZE)
    assert [m.sample_index for m in elite.members] == [0, 1]
    assert elite.weights == [pytest.approx(0.75), pytest.approx(0.25)]

    single = build_elite(scored([1, 2], q_smooth=[0.7, 0.0]), 1, Direction.MINIMIZE)
    assert single.weights == [1.0]

    equal = build_elite(scored([1, 1, 1, 1], q_smooth=[0.1] * 4), 1, Direction.MINIMIZE)
    assert equal.weights == [pytest.approx(0.25)] * 4


def test_elite_sample_count():
    assert elite_sample_count(CeConfig(num_samples=100, rho=0.01, favorability=10)) == 10
    assert elite_sample_count(CeConfig(num_samples=200, rho=0.05, favorability=10)) == 100

    with pytest.raises(ConfigError, match="N_s"):
        CeConfig(num_samples=10, rho=0.2, favorability=10)


def test_next_round_samples_from_single_elite():
    space = ScalarIntervalSpace(0.0, 1.0)
    config = CeConfig(num_samples=5, rho=0.2, favorability=3)
    source = Sample(value=Scalar(0.5), score=0.0, q_smooth=0.7, is_elite=True)
    elite = EliteSet((EliteMember(4, source, 1.0),))

    samples = next_round_samples(elite, config, space, np.random.default_rng(0), elite_round=2)
    assert len(samples) == 5

    copies = samples[:3]
    assert all(s.value == Scalar(0.5) for s in copies)
    assert all(s.origin == ResampledFrom(2, 4) for s in copies)
    assert all(s.q_prev == 0.7 for s in copies)

    fresh = samples[3:]
    assert all(isinstance(s.origin, Fresh) and s.q_prev == 0.0 for s in fresh)
    assert all(0.0 <= s.value.value <= 1.0 for s in fresh)


def test_next_round_samples_without_resampling():
    space = ScalarIntervalSpace(0.0, 1.0)
    config = CeConfig(num_samples=10, rho=0.1, favorability=0.01)
    elite = EliteSet((EliteMember(0, Sample(value=Scalar(0.5), score=0.0, q_smooth=1.0), 1.0),))

    samples = next_round_samples(elite, config, space, np.random.default_rng(1))
    assert len(samples) == 10
    assert all(isinstance(s.origin, Fresh) for s in samples)


def test_next_round_samples_is_deterministic():
    space = ScalarIntervalSpace(0.0, 1.0)
    config = CeConfig(num_samples=20, rho=0.1, favorability=5)
    members = tuple(EliteMember(i, Sample(value=Scalar(v), score=v, q_smooth=0.35), 0.5)
                    for i, v in enumerate([0.2, 0.4]))
    elite = EliteSet(members)

    first = next_round_samples(elite, config, space, np.random.default_rng(11))
    second = next_round_samples(elite, config, space, np.random.default_rng(11))
    assert [(s.value, s.origin) for s in first] == [(s.value, s.origin) for s in second]


def test_should_stop():
    assert should_stop([5, 3, 3, 3, 3, 3, 3], 5, 1e-9)
    assert not should_stop([3, 3, 3], 5, 1e-9)
    assert should_stop([7.0, 3.0, 3.0 + 1e-12, 3.0, 3.0, 3.0, 3.0], 5, 1e-9)
    assert not should_stop([3.0, 3.1, 3.0, 3.0, 3.0, 3.0], 5, 1e-9)


def test_single_round_run(quadratic_objective):
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, CeConfig(max_rounds=1, seed=3))

    assert result.stop_reason == StopReason.MAX_ROUNDS
    assert result.rounds_used == 1
    assert result.evaluations == 100
    assert result.rounds[0].best_in_round == result.rounds[0].best_so_far
    assert (result.best_value, result.best_score) == result.rounds[0].best_so_far


def test_run_rejects_direction_mismatch(quadratic_objective):
    with pytest.raises(ConfigError):
        run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, CeConfig(direction=Direction.MAXIMIZE))


def test_run_is_deterministic(quadratic_objective):
    space = ScalarIntervalSpace(0.0, 1.0)
    config = CeConfig(max_rounds=10, seed=42)
    first = run_cehpo(space, quadratic_objective, config)
    second = run_cehpo(space, quadratic_objective, config, Evaluator(threads=4))

    assert first.best_value == second.best_value
    assert first.gamma_trace == second.gamma_trace
    for a, b in zip(first.rounds, second.rounds):
        assert [s.value for s in a.samples] == [s.value for s in b.samples]
        assert [s.score for s in a.samples] == [s.score for s in b.samples]


def test_resampled_copies_carry_smoothed_probability(quadratic_objective):
    config = CeConfig(max_rounds=3, seed=5)
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, config)

    for previous, record in zip(result.rounds, result.rounds[1:]):
        assert record.n_s == config.elite_samples
        sources = {m.sample_index: m.sample for m in previous.elite.members}
        for sample in record.samples:
            if isinstance(sample.origin, ResampledFrom):
                source = sources[sample.origin.sample_index]
                assert sample.value == source.value
                assert sample.q_prev == source.q_smooth
            else:
                assert sample.q_prev == 0.0


def test_bookkeeping_holds_every_round(quadratic_objective):
    config = CeConfig(max_rounds=20, seed=9)
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, config)
    assert result_violations(result, config) == []

    for record in result.rounds:
        hits = sum(1 for s in record.samples if s.is_elite)
        assert abs(sum(s.q_est for s in record.samples) - 1) <= 1e-9
        assert abs(sum(record.elite.weights) - 1) <= 1e-9
        assert hits >= math.ceil(config.rho * config.num_samples)
        assert all(s.q_est in (0.0, 1 / hits) for s in record.samples)
        for s in record.samples:
            assert s.q_smooth == pytest.approx(config.smoothing * s.q_est + (1 - config.smoothing) * s.q_prev)


def test_diagnostics_find_broken_rounds(quadratic_objective):
    config = CeConfig(max_rounds=1, seed=1)
    record = run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, config).rounds[0]
    assert round_violations(record, config) == []

    flipped = tuple(replace(s, is_elite=not s.is_elite) if i == 0 else s for i, s in enumerate(record.samples))
    assert any("elite flags" in v for v in round_violations(replace(record, samples=flipped), config))

    missing = replace(record, samples=record.samples[1:])
    assert any("samples instead of" in v for v in round_violations(missing, config))


def test_failed_evaluations_get_the_sentinel():
    def fragile(value, seed):
        if value.value > 0.5:
            raise ValueError("diverged")
        return (value.value - 0.3) ** 2

    objective = FunctionObjective("fragile", Direction.MINIMIZE, fragile)
    config = CeConfig(max_rounds=5, seed=2)
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), objective, config)

    failed = [s for r in result.rounds for s in r.samples if s.value.value > 0.5]
    assert len(failed) > 0
    assert all(s.score == math.inf and not s.is_elite and s.q_est == 0 for s in failed)
    assert result.best_value.value <= 0.5
    assert math.isfinite(result.best_score)
    assert result_violations(result, config) == []


def test_run_fails_when_every_evaluation_fails():
    def broken(value, seed):
        raise ValueError("broken")

    objective = FunctionObjective("broken", Direction.MINIMIZE, broken)
    with pytest.raises(RunError):
        run_cehpo(ScalarIntervalSpace(0.0, 1.0), objective, CeConfig(max_rounds=3))


def test_round_gamma_with_failed_evaluations():
    config = CeConfig(num_samples=4, rho=0.5, favorability=1)
    inf = math.inf

    assert round_gamma([inf, 0.3, inf, 0.1], config) == 0.3
    assert round_gamma([inf, 0.3, inf, inf], config) == 0.3
    assert round_gamma([0.2, 0.3, 0.4, 0.1], config) == compute_gamma([0.2, 0.3, 0.4, 0.1], 0.5, Direction.MINIMIZE)

    maximize = replace(config, direction=Direction.MAXIMIZE)
    assert round_gamma([-inf, 0.3, -inf, -inf], maximize) == 0.3
    with pytest.raises(ValueError):
        round_gamma([inf] * 4, config)


def test_run_continues_when_few_evaluations_succeed():
    calls = itertools.count()

    def mostly_broken(value, seed):
        # evaluations run in index order on one thread, the first two of every round succeed
        if next(calls) % 100 >= 2:
            raise ValueError("diverged")
        return value.value

    config = CeConfig(max_rounds=3, seed=0)
    objective = FunctionObjective("mostly_broken", Direction.MINIMIZE, mostly_broken)
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), objective, config)

    assert result.stop_reason == StopReason.MAX_ROUNDS
    assert result.rounds_used == 3
    for record in result.rounds:
        assert len(record.elite) == 2
        assert all(math.isfinite(m.sample.score) for m in record.elite.members)
        assert math.isfinite(record.gamma)
    assert math.isfinite(result.best_score)
    assert result_violations(result, config) == []


def test_target_score_stops_early(quadratic_objective):
    config = CeConfig(max_rounds=50, seed=4, target_score=1e-2)
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, config)

    assert result.stop_reason == StopReason.TARGET_REACHED
    assert result.best_score <= 1e-2
    assert result.rounds_used < 50


def test_maximize_run():
    objective = FunctionObjective("peak", Direction.MAXIMIZE, lambda v, seed: -(v.value - 0.25) ** 2)
    config = CeConfig(max_rounds=30, seed=8, direction=Direction.MAXIMIZE)
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), objective, config)

    assert abs(result.best_value.value - 0.25) <= 0.02
    assert result_violations(result, config) == []


def test_on_round_receives_every_round(quadratic_objective):
    seen = []
    result = run_cehpo(ScalarIntervalSpace(0.0, 1.0), quadratic_objective, CeConfig(max_rounds=4, seed=6),
                       on_round=lambda record: seen.append(record.round_index))
    assert seen == list(range(1, result.rounds_used + 1))
