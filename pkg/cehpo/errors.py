class CehpoError(Exception):
    """
    Root of all errors raised by cehpo.
    """
    pass


class ConfigError(CehpoError, ValueError):
    """
    A configuration value violates a constraint. The message names the constraint.
    """
    pass


class ConfigFileNotFoundError(ConfigError):
    pass


class ConfigSyntaxError(ConfigError):
    pass


class SpaceError(ConfigError):
    pass


class ShapeMismatchError(CehpoError, ValueError):
    """
    Two hyperparameter values (or two vectors) cannot be compared because their shapes differ.
    """
    pass


class EvaluationError(CehpoError):
    """
    An objective could not score a hyperparameter value.
    """
    pass


class NonFiniteGradientError(EvaluationError):
    def __init__(self, eval_seed, step):
        self.eval_seed = eval_seed
        self.step = step
        super().__init__(f"Non-finite gradient at step {step} (evaluation seed {eval_seed})")


class RunError(CehpoError):
    """
    A run could not complete, e.g. every sample of a round failed or a grid cell aborted.
    """
    pass


class EngineInvariantError(CehpoError, AssertionError):
    """
    Internal bookkeeping went wrong. This is a bug in the engine, not a user error.
    """
    pass
