import math

from cehpo.engine.ce import SUM_TOLERANCE, indicator_hit
from cehpo.models.config import CeConfig, Direction
from cehpo.models.samples import CeResult, ResampledFrom, RoundRecord


def round_violations(record: RoundRecord, config: CeConfig, previous: RoundRecord | None = None) -> list[str]:
    """
    Checks the probability bookkeeping of one round.
    :param record: the round
    :param config: the config of the run
    :param previous: (optional) the round before, needed to check the resampled copies
    :return: a description of every violated property, empty if the round is consistent
    """
    violations = []
    samples = record.samples
    t = record.round_index

    if len(samples) != config.num_samples:
        violations.append(f"round {t}: {len(samples)} samples instead of {config.num_samples}")

    q_est_sum = sum(s.q_est for s in samples)
    if abs(q_est_sum - 1) > SUM_TOLERANCE:
        violations.append(f"round {t}: q_est sums to {q_est_sum!r}")

    q_norm_sum = sum(record.elite.weights)
    if abs(q_norm_sum - 1) > SUM_TOLERANCE:
        violations.append(f"round {t}: elite weights sum to {q_norm_sum!r}")

    hits = sum(indicator_hit(s.score, record.gamma, config.direction) for s in samples)
    failed = sum(1 for s in samples if not math.isfinite(s.score))
    if hits < config.elite_rank and failed == 0:
        violations.append(f"round {t}: {hits} samples clear gamma, expected at least {config.elite_rank}")

    elite_flags = [s.is_elite for s in samples]
    expected_flags = [bool(indicator_hit(s.score, record.gamma, config.direction)) for s in samples]
    if elite_flags != expected_flags:
        violations.append(f"round {t}: elite flags do not match the indicator")

    resampled = [s for s in samples if isinstance(s.origin, ResampledFrom)]
    expected_resampled = 0 if t == 1 else config.elite_samples
    if len(resampled) != expected_resampled:
        violations.append(f"round {t}: {len(resampled)} resampled samples instead of {expected_resampled}")

    if previous is not None:
        elite_values = {m.sample_index: m.value for m in previous.elite.members}
        for s in resampled:
            source = elite_values.get(s.origin.sample_index)
            if s.origin.round_index != previous.round_index or source is None or source != s.value:
                violations.append(f"round {t}: resampled value {s.value.to_str()} is not a copy of an elite member")
                break

    return violations


def monotonicity_violations(rounds: list[RoundRecord], direction: Direction) -> list[str]:
    """
    Finds rounds where the best score so far got worse.
    """
    violations = []
    for before, after in zip(rounds, rounds[1:]):
        if direction.is_better(before.best_so_far[1], after.best_so_far[1]):
            violations.append(f"round {after.round_index}: best so far went from {before.best_so_far[1]!r} "
                              f"to {after.best_so_far[1]!r}")
    return violations


def result_violations(result: CeResult, config: CeConfig) -> list[str]:
    violations = []
    previous = None
    for record in result.rounds:
        violations += round_violations(record, config, previous)
        previous = record
    violations += monotonicity_violations(list(result.rounds), config.direction)
    if result.rounds and result.best_score != result.rounds[-1].best_so_far[1]:
        violations.append("best score differs from the last round's best so far")
    return violations
