import logging
import math
from typing import Callable

import numpy as np

from cehpo.engine.evaluation import Evaluator
from cehpo.errors import ConfigError, EngineInvariantError, RunError, ShapeMismatchError
from cehpo.hyperspace.spaces import HyperValue, Space, sample_uniform
from cehpo.models.config import CeConfig, Direction, quantile_rank
from cehpo.models.samples import CeResult, EliteMember, EliteSet, Fresh, ResampledFrom, RoundRecord, Sample, \
    StopReason
from cehpo.objectives.objective import Objective
from cehpo.seeds import STREAM_EVALUATION, STREAM_SAMPLING, derive_seed, make_rng

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-9


def compute_gamma(scores: list[float], rho: float, direction: Direction) -> float:
    """
    The benchmark value of a round: the ceil(rho * M)-th best score. Under minimization this is the smallest f
    such that at least a rho fraction of the scores is <= f; under maximization the largest f such that at least a
    rho fraction is >= f.
    :param scores: the scores of the round
    :param rho: the elite quantile, in (0, 1)
    :param direction: the optimization direction
    :return: gamma
    """
    if len(scores) == 0:
        raise ValueError("Cannot compute the benchmark quantile of an empty round")
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")

    k = quantile_rank(len(scores), rho)
    ordered = np.sort(np.asarray(scores, dtype=float))
    if direction == Direction.MAXIMIZE:
        ordered = ordered[::-1]
    return float(ordered[k - 1])


def round_gamma(scores: list[float], config: CeConfig) -> float:
    """
    The benchmark of a round in which some evaluations may have failed. While at least ceil(rho * M) scores are
    finite this is compute_gamma over all scores. Otherwise it is the worst finite score, so every successful
    sample clears it and no failed one does.
    """
    finite = [s for s in scores if math.isfinite(s)]
    if len(finite) >= config.elite_rank:
        return compute_gamma(scores, config.rho, config.direction)
    if len(finite) == 0:
        raise ValueError("Cannot compute the benchmark of a round without a finite score")
    return max(finite) if config.direction == Direction.MINIMIZE else min(finite)


def indicator_hit(score: float, gamma: float, direction: Direction) -> int:
    """
    1 if the score clears the benchmark (inclusive), else 0. Non-finite scores (failed evaluations) never hit.
    """
    if not math.isfinite(score):
        return 0
    if direction == Direction.MINIMIZE:
        return int(score <= gamma)
    return int(score >= gamma)


def estimate_q(samples: list[Sample], gamma: float, direction: Direction) -> list[float]:
    """
    Probability estimate of every sample: uniform over the samples that clear gamma, zero elsewhere.
    """
    hits = [indicator_hit(s.score, gamma, direction) for s in samples]
    total = sum(hits)
    if total == 0:
        raise EngineInvariantError(f"No sample clears the benchmark gamma={gamma}")
    return [h / total for h in hits]


def smooth_q(q_est: list[float], q_prev: list[float], c: float) -> list[float]:
    """
    out[i] = c * q_est[i] + (1 - c) * q_prev[i]
    """
    if len(q_est) != len(q_prev):
        raise ShapeMismatchError(f"q_est has {len(q_est)} entries but q_prev has {len(q_prev)}")
    return [c * e + (1 - c) * p for e, p in zip(q_est, q_prev)]


def build_elite(samples: list[Sample], gamma: float, direction: Direction) -> EliteSet:
    """
    The samples clearing gamma, each weighted by its smoothed probability normalized over the elite.
    """
    indices = [i for i, s in enumerate(samples) if indicator_hit(s.score, gamma, direction)]
    total = sum(samples[i].q_smooth for i in indices)

    if total > 0:
        weights = [samples[i].q_smooth / total for i in indices]
    else:
        weights = [1 / len(indices)] * len(indices)

    return EliteSet(tuple(EliteMember(i, samples[i], w) for i, w in zip(indices, weights)))


def elite_sample_count(config: CeConfig) -> int:
    """
    N_s = s * M * rho rounded half-up. Configs with N_s >= M are rejected when the config is built.
    """
    return config.elite_samples


def next_round_samples(elite: EliteSet, config: CeConfig, space: Space, rng: np.random.Generator,
                       elite_round: int = 0) -> list[Sample]:
    """
    Builds the samples of the next round: N_s exact copies of elite members drawn with replacement proportional to
    their normalized weights, followed by M - N_s fresh uniform draws.
    :param elite: the elite set of the round just finished
    :param config: the run config
    :param space: the search space
    :param rng: the generator of the new round
    :param elite_round: index of the round the elite belongs to, recorded in each copy's origin
    :return: M unscored samples
    """
    if len(elite) == 0:
        raise EngineInvariantError("Cannot resample from an empty elite set")

    n_s = elite_sample_count(config)
    samples = []

    if n_s > 0:
        weights = np.asarray(elite.weights, dtype=float)
        picks = rng.choice(len(elite), size=n_s, replace=True, p=weights / weights.sum())
        for pick in picks:
            member = elite.members[int(pick)]
            samples.append(Sample(value=member.value, q_prev=member.sample.q_smooth,
                                  origin=ResampledFrom(elite_round, member.sample_index)))

    for _ in range(config.num_samples - n_s):
        samples.append(Sample(value=sample_uniform(space, rng), q_prev=0.0, origin=Fresh()))

    return samples


def should_stop(gamma_trace: list[float], l: int, gamma_tol: float) -> bool:
    """
    True once the last l + 1 benchmark values are all within gamma_tol of the last one.
    """
    if len(gamma_trace) < l + 1:
        return False
    last = gamma_trace[-1]
    return all(abs(g - last) <= gamma_tol for g in gamma_trace[-(l + 1):])


def _best(samples: list[Sample], direction: Direction) -> tuple[HyperValue, float]:
    best = samples[0]
    for s in samples[1:]:
        if direction.is_better(s.score, best.score):
            best = s
    return best.value, best.score


def initial_samples(config: CeConfig, space: Space, rng: np.random.Generator) -> list[Sample]:
    return [Sample(value=sample_uniform(space, rng), q_prev=0.0, origin=Fresh()) for _ in range(config.num_samples)]


def run_cehpo(space: Space, objective: Objective, config: CeConfig, evaluator: Evaluator | None = None,
              on_round: Callable[[RoundRecord], None] | None = None) -> CeResult:
    """
    Runs the cross-entropy search for one objective.
    :param space: the search space
    :param objective: the objective, its direction must match config.direction
    :param config: the run config
    :param evaluator: (optional) evaluator to use, defaults to single threaded evaluation
    :param on_round: (optional) called with every completed round
    :return: the result with the full round trace
    """
    if objective.direction != config.direction:
        raise ConfigError(f"Objective {objective.name} is to {objective.direction} but the config says "
                          f"{config.direction}")
    if evaluator is None:
        evaluator = Evaluator()

    direction = config.direction
    n_s = elite_sample_count(config)

    samples = initial_samples(config, space, make_rng(config.seed, STREAM_SAMPLING, 1))
    rounds: list[RoundRecord] = []
    gamma_trace: list[float] = []
    best_so_far = None
    stop_reason = StopReason.MAX_ROUNDS

    for t in range(1, config.max_rounds + 1):
        seeds = [derive_seed(config.seed, STREAM_EVALUATION, t, i) for i in range(len(samples))]
        evaluation = evaluator.evaluate(objective, [s.value for s in samples], seeds, label=f"round {t}")
        if evaluation.all_failed:
            raise RunError(f"Every evaluation of round {t} failed, first error: "
                           f"{evaluation.errors[min(evaluation.errors)]}")
        succeeded = sum(1 for score in evaluation.scores if math.isfinite(score))
        if succeeded == 0:
            raise RunError(f"No evaluation of round {t} produced a finite score")
        if succeeded < config.elite_rank:
            logger.warning(f"Only {succeeded} evaluations of round {t} succeeded, all of them join the elite")

        for sample, score in zip(samples, evaluation.scores):
            sample.score = score

        gamma = round_gamma([s.score for s in samples], config)
        q_est = estimate_q(samples, gamma, direction)
        q_smooth = smooth_q(q_est, [s.q_prev for s in samples], config.smoothing)
        for sample, e, q in zip(samples, q_est, q_smooth):
            sample.q_est = e
            sample.q_smooth = q

        elite = build_elite(samples, gamma, direction)
        for member in elite.members:
            member.sample.is_elite = True

        best_in_round = _best(samples, direction)
        if best_so_far is None or direction.is_better(best_in_round[1], best_so_far[1]):
            best_so_far = best_in_round

        record = RoundRecord(round_index=t, samples=tuple(samples), gamma=gamma, elite=elite,
                             n_s=0 if t == 1 else n_s, best_in_round=best_in_round, best_so_far=best_so_far)
        rounds.append(record)
        gamma_trace.append(gamma)

        logger.info(f"Round {t}: gamma={gamma!r} best={best_so_far[1]!r} elite={len(elite)} "
                    f"failed={len(evaluation.errors)}")
        if on_round is not None:
            on_round(record)

        if should_stop(gamma_trace, config.stop_window, config.gamma_tol):
            stop_reason = StopReason.GAMMA_PLATEAU
            break
        if config.target_score is not None and direction.reaches(best_so_far[1], config.target_score):
            stop_reason = StopReason.TARGET_REACHED
            break
        if t == config.max_rounds:
            break

        samples = next_round_samples(elite, config, space, make_rng(config.seed, STREAM_SAMPLING, t + 1),
                                     elite_round=t)

    logger.info(f"Stopped after {len(rounds)} rounds ({stop_reason}), best score {best_so_far[1]!r} at "
                f"{best_so_far[0].to_str()}")

    return CeResult(best_value=best_so_far[0], best_score=best_so_far[1], rounds=tuple(rounds),
                    stop_reason=stop_reason)
