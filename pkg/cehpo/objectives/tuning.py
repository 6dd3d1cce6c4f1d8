from dataclasses import replace
from enum import Enum

from cehpo.errors import ConfigError, EvaluationError
from cehpo.hyperspace.spaces import DecreasingSequenceSpace, HyperValue, Scalar, ScalarIntervalSpace, Sequence, \
    Space
from cehpo.models.config import Direction
from cehpo.objectives.objective import Objective
from cehpo.objectives.optimizers import AdamParams, Variant
from cehpo.objectives.problems import TrainProblem
from cehpo.objectives.training import Beta1Schedule, TrainOutcome, train_until


class TunedField(Enum):
    ALPHA = "alpha"
    BETA1 = "beta1"
    BETA2 = "beta2"
    BETA1_SEQUENCE = "beta1_sequence"

    def __str__(self):
        return self.value

    def to_str(self):
        return self.value

    @staticmethod
    def from_str(s: str):
        for f in TunedField:
            if f.value == s:
                return f
        raise ValueError(f"Invalid tuned field: {s}")

    def legal_range(self) -> tuple[float, float, bool]:
        """
        (low, high, high_inclusive) for values of this field.
        """
        if self == TunedField.ALPHA:
            return 0.0, float("inf"), False
        return 0.0, 1.0, False


def check_space(tuned: TunedField, space: Space, problem: TrainProblem | None = None):
    """
    Rejects spaces that can produce illegal values for the tuned field.
    """
    if tuned == TunedField.BETA1_SEQUENCE:
        if not isinstance(space, DecreasingSequenceSpace):
            raise ConfigError("beta1_sequence needs a decreasing_sequence space")
        if problem is not None and space.horizon != problem.max_steps:
            raise ConfigError(f"The space's epoch boundaries end at step {space.horizon} but the problem trains for "
                              f"{problem.max_steps} steps")
    elif not isinstance(space, ScalarIntervalSpace):
        raise ConfigError(f"{tuned} needs an interval space")

    low, high, high_inclusive = tuned.legal_range()
    if space.a < low or space.b > high or (space.b == high and not high_inclusive):
        raise ConfigError(f"Space [{space.a}, {space.b}] exceeds the legal range of {tuned}")


def apply_value(tuned: TunedField, fixed: AdamParams, value: HyperValue,
                space: DecreasingSequenceSpace | None = None) -> tuple[AdamParams, Beta1Schedule | None]:
    """
    Puts a candidate value into the optimizer parameters.
    :param tuned: the field the value controls
    :param fixed: the other optimizer parameters
    :param value: the candidate value
    :param space: the space whose epoch boundaries map a beta1 sequence to training steps
    :return: the parameters and, for beta1 sequences, the schedule
    """
    if tuned == TunedField.BETA1_SEQUENCE:
        if not isinstance(value, Sequence) or space is None or len(value) != space.k:
            raise EvaluationError(f"{tuned} takes a sequence of {space.k if space else 'k'} values, got "
                                  f"{value.to_str()}")
        return fixed, [(range(start, stop), beta1) for (start, stop), beta1 in
                       zip(space.epoch_boundaries, value.values)]
    if not isinstance(value, Scalar):
        raise EvaluationError(f"{tuned} takes a scalar, got {value.to_str()}")
    # AdamParams rejects out-of-range values with an InvalidParamsError
    return replace(fixed, **{tuned.value: value.value}), None


class TrainingObjective(Objective):
    """
    Scores an optimizer hyperparameter by training a problem with it.

    :param problem: the problem to train
    :param fixed: optimizer parameters, the tuned field is replaced by the candidate value
    :param tuned: which parameter the candidate value controls
    :param variant: Adam or AMSGrad
    :param metric: "convergence" (steps to converge, minimized) or "generalization" (validation metric, maximized)
    :param space: the decreasing sequence space the segments come from, required for beta1 sequences
    """

    def __init__(self, problem: TrainProblem, fixed: AdamParams, tuned: TunedField, variant: Variant, metric: str,
                 space: DecreasingSequenceSpace | None = None):
        if metric not in ("convergence", "generalization"):
            raise ValueError(f"Invalid metric: {metric}")
        if tuned == TunedField.BETA1_SEQUENCE:
            if space is None:
                raise ConfigError("beta1_sequence objectives need the decreasing_sequence space")
            check_space(tuned, space, problem)

        self.problem = problem
        self.fixed = fixed
        self.tuned = tuned
        self.variant = variant
        self.metric = metric
        self.space = space
        self.name = f"{metric}:{tuned}:{variant}"
        self.direction = Direction.MINIMIZE if metric == "convergence" else Direction.MAXIMIZE

    def train(self, value: HyperValue, eval_seed: int) -> TrainOutcome:
        params, schedule = apply_value(self.tuned, self.fixed, value, self.space)
        return train_until(self.problem, params, schedule, self.variant, eval_seed)

    def evaluate(self, value: HyperValue, eval_seed: int) -> float:
        outcome = self.train(value, eval_seed)
        if self.metric == "convergence":
            # runs that never converge score one step past the budget
            return float(outcome.steps_to_converge if outcome.converged else self.problem.max_steps + 1)
        return outcome.validation_metric


def make_convergence_objective(problem: TrainProblem, fixed: AdamParams, tuned: TunedField,
                               variant: Variant = Variant.ADAM,
                               space: DecreasingSequenceSpace | None = None) -> TrainingObjective:
    """
    Objective to minimize: number of steps until the training loss is below the threshold.
    """
    return TrainingObjective(problem, fixed, tuned, variant, "convergence", space)


def make_generalization_objective(problem: TrainProblem, fixed: AdamParams, tuned: TunedField,
                                  variant: Variant = Variant.ADAM,
                                  space: DecreasingSequenceSpace | None = None) -> TrainingObjective:
    """
    Objective to maximize: validation metric after training.
    """
    return TrainingObjective(problem, fixed, tuned, variant, "generalization", space)
