import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from cehpo.errors import EvaluationError, NonFiniteGradientError, ShapeMismatchError


class Variant(Enum):
    ADAM = "adam"
    AMSGRAD = "amsgrad"

    def __str__(self):
        return self.value

    def to_str(self):
        return self.value

    @staticmethod
    def from_str(s: str):
        if s == "adam":
            return Variant.ADAM
        elif s == "amsgrad":
            return Variant.AMSGRAD
        else:
            raise ValueError(f"Invalid optimizer variant: {s}")


class InvalidParamsError(EvaluationError, ValueError):
    pass


@dataclass(frozen=True)
class AdamParams:
    """
    :param alpha: step size
    :param beta1: decay rate of the first moment estimate, in [0, 1)
    :param beta2: decay rate of the second moment estimate, in [0, 1)
    :param epsilon: denominator guard
    """
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise InvalidParamsError(f"alpha must be a non-negative finite number, got {self.alpha}")
        if not 0 <= self.beta1 < 1:
            raise InvalidParamsError(f"beta1 must lie in [0, 1), got {self.beta1}")
        if not 0 <= self.beta2 < 1:
            raise InvalidParamsError(f"beta2 must lie in [0, 1), got {self.beta2}")
        if not self.epsilon > 0:
            raise InvalidParamsError(f"epsilon must be positive, got {self.epsilon}")

    def with_beta1(self, beta1: float) -> "AdamParams":
        return replace(self, beta1=beta1)

    def to_dict(self):
        return {"alpha": self.alpha, "beta1": self.beta1, "beta2": self.beta2, "epsilon": self.epsilon}

    @staticmethod
    def from_dict(d: dict):
        defaults = AdamParams()
        return AdamParams(
            alpha=float(d.get("alpha", defaults.alpha)),
            beta1=float(d.get("beta1", defaults.beta1)),
            beta2=float(d.get("beta2", defaults.beta2)),
            epsilon=float(d.get("epsilon", defaults.epsilon))
        )


@dataclass(frozen=True)
class OptimizerState:
    """
    Weights and moment estimates. v_hat_max is only advanced by AMSGrad.
    """
    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    v_hat_max: np.ndarray
    t: int = 0

    @staticmethod
    def zeros(params: np.ndarray) -> "OptimizerState":
        params = np.asarray(params, dtype=float)
        return OptimizerState(params.copy(), np.zeros_like(params), np.zeros_like(params), np.zeros_like(params), 0)


def _moments(state: OptimizerState, grad: np.ndarray, p: AdamParams):
    grad = np.asarray(grad, dtype=float)
    if grad.shape != state.params.shape:
        raise ShapeMismatchError(f"Gradient has shape {grad.shape}, parameters have {state.params.shape}")
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradientError(eval_seed=None, step=state.t + 1)

    t = state.t + 1
    m = p.beta1 * state.m + (1 - p.beta1) * grad
    v = p.beta2 * state.v + (1 - p.beta2) * grad * grad
    m_hat = m / (1 - p.beta1 ** t)
    v_hat = v / (1 - p.beta2 ** t)
    return t, m, v, m_hat, v_hat


def adam_step(state: OptimizerState, grad: np.ndarray, p: AdamParams) -> OptimizerState:
    """
    One Adam update with bias-corrected moment estimates.
    """
    t, m, v, m_hat, v_hat = _moments(state, grad, p)
    params = state.params - p.alpha * m_hat / (np.sqrt(v_hat) + p.epsilon)
    return OptimizerState(params, m, v, state.v_hat_max, t)


def amsgrad_step(state: OptimizerState, grad: np.ndarray, p: AdamParams) -> OptimizerState:
    """
    One AMSGrad update: like Adam, but normalized by the running maximum of the second moment estimate, which makes
    the effective step size non-increasing.
    """
    t, m, v, m_hat, v_hat = _moments(state, grad, p)
    v_hat_max = np.maximum(state.v_hat_max, v_hat)
    params = state.params - p.alpha * m_hat / (np.sqrt(v_hat_max) + p.epsilon)
    return OptimizerState(params, m, v, v_hat_max, t)


def bias_corrected_v(state: OptimizerState, p: AdamParams) -> np.ndarray:
    if state.t == 0:
        return np.zeros_like(state.v)
    return state.v / (1 - p.beta2 ** state.t)


STEPS = {
    Variant.ADAM: adam_step,
    Variant.AMSGRAD: amsgrad_step,
}
