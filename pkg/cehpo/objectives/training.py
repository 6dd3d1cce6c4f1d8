from dataclasses import dataclass

import numpy as np

from cehpo.errors import ConfigError, NonFiniteGradientError
from cehpo.objectives.optimizers import STEPS, AdamParams, OptimizerState, Variant
from cehpo.objectives.problems import TrainProblem
from cehpo.seeds import make_rng

INIT_SCALE = 0.1

Beta1Schedule = list[tuple[range, float]]


@dataclass(frozen=True)
class TrainOutcome:
    """
    :param steps_to_converge: number of updates until the training loss fell below the threshold, None if it never did
    :param final_train_loss: training loss when training stopped
    :param validation_metric: generalization performance on the held-out split, higher is better
    """
    steps_to_converge: int | None
    final_train_loss: float
    validation_metric: float

    @property
    def converged(self) -> bool:
        return self.steps_to_converge is not None


def validate_schedule(schedule: Beta1Schedule, max_steps: int):
    """
    A schedule must cover [0, max_steps) with contiguous step ranges and non-increasing beta1 values.
    """
    if len(schedule) == 0:
        raise ConfigError("A beta1 schedule needs at least one segment")

    expected_start = 0
    previous_beta1 = None
    for steps, beta1 in schedule:
        if steps.step != 1 or steps.start != expected_start or steps.stop <= steps.start:
            raise ConfigError(f"Schedule segment {steps} does not continue at step {expected_start}")
        if previous_beta1 is not None and beta1 > previous_beta1:
            raise ConfigError(f"Schedule beta1 values must not increase ({previous_beta1} -> {beta1})")
        if not 0 <= beta1 < 1:
            raise ConfigError(f"Schedule beta1 must lie in [0, 1), got {beta1}")
        expected_start = steps.stop
        previous_beta1 = beta1

    if expected_start < max_steps:
        raise ConfigError(f"Schedule ends at step {expected_start} but training runs for {max_steps} steps")


def beta1_at(schedule: Beta1Schedule, step: int) -> float:
    for steps, beta1 in schedule:
        if step in steps:
            return beta1
    raise ValueError(f"Step {step} is not covered by the schedule")


def initial_weights(num_params: int, eval_seed: int) -> np.ndarray:
    return INIT_SCALE * make_rng(eval_seed).standard_normal(num_params)


def train_until(problem: TrainProblem, p: AdamParams, beta1_schedule: Beta1Schedule | None = None,
                variant: Variant = Variant.ADAM, eval_seed: int = 0) -> TrainOutcome:
    """
    Trains the problem with full-batch Adam or AMSGrad until the training loss drops below the problem's threshold or
    max_steps updates were made.
    :param problem: the problem
    :param p: optimizer parameters, beta1 is ignored when a schedule is given
    :param beta1_schedule: (optional) beta1 value per range of steps, step indices start at 0
    :param variant: Adam or AMSGrad
    :param eval_seed: seed of the weight initialization
    :return: the outcome
    """
    if beta1_schedule is not None:
        validate_schedule(beta1_schedule, problem.max_steps)

    step_fn = STEPS[variant]
    state = OptimizerState.zeros(initial_weights(problem.num_params, eval_seed))
    loss = problem.train_loss(state.params)
    steps_to_converge = 0 if loss < problem.loss_threshold else None

    step = 0
    params = p
    while steps_to_converge is None and step < problem.max_steps:
        if beta1_schedule is not None:
            params = p.with_beta1(beta1_at(beta1_schedule, step))
        try:
            state = step_fn(state, problem.train_grad(state.params), params)
        except NonFiniteGradientError as e:
            raise NonFiniteGradientError(eval_seed=eval_seed, step=e.step)
        step += 1

        loss = problem.train_loss(state.params)
        if loss < problem.loss_threshold:
            steps_to_converge = step

    return TrainOutcome(steps_to_converge, loss, problem.validation_metric(state.params))
