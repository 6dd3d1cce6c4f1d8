import functools
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from cehpo.errors import ConfigError
from cehpo.seeds import STREAM_DATASET, make_rng


@dataclass(frozen=True)
class Split:
    features: np.ndarray
    targets: np.ndarray


@dataclass(frozen=True)
class Dataset:
    train: Split
    validation: Split


class TrainProblem(ABC):
    """
    A small learning problem trained with full-batch gradients. The dataset is a pure function of the problem's
    fields (including dataset_seed); only the weight initialization depends on the evaluation seed.
    """

    loss_threshold: float
    max_steps: int
    train_fraction: float
    dataset_seed: int

    def _check_common(self):
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be a positive integer, got {self.max_steps}")
        if not self.loss_threshold > 0:
            raise ConfigError(f"loss_threshold must be positive, got {self.loss_threshold}")

    def dataset(self) -> Dataset:
        return _build_dataset(self)

    @property
    @abstractmethod
    def num_params(self) -> int:
        pass

    @abstractmethod
    def generate(self) -> Dataset:
        """
        Generates the dataset. Called once per problem, use dataset() to get the cached copy.
        """
        pass

    @abstractmethod
    def loss(self, w: np.ndarray, split: Split) -> float:
        pass

    @abstractmethod
    def grad(self, w: np.ndarray, split: Split) -> np.ndarray:
        pass

    @abstractmethod
    def validation_metric(self, w: np.ndarray) -> float:
        """
        Generalization performance on the held-out split, higher is better.
        """
        pass

    def train_loss(self, w: np.ndarray) -> float:
        return self.loss(w, self.dataset().train)

    def train_grad(self, w: np.ndarray) -> np.ndarray:
        return self.grad(w, self.dataset().train)

    def _split(self, features: np.ndarray, targets: np.ndarray, rng: np.random.Generator) -> Dataset:
        order = rng.permutation(len(features))
        features, targets = features[order], targets[order]
        n_train = min(max(int(round(self.train_fraction * len(features))), 1), len(features) - 1)
        return Dataset(Split(features[:n_train], targets[:n_train]), Split(features[n_train:], targets[n_train:]))


@functools.lru_cache(maxsize=64)
def _build_dataset(problem: TrainProblem) -> Dataset:
    return problem.generate()


@dataclass(frozen=True)
class NoisyQuadratic(TrainProblem):
    """
    Estimate a hidden center from noisy observations under a diagonal quadratic loss. The training loss is the
    excess loss 0.5 * sum_k lambda_k (w_k - mean_k)^2 around the mean of the training observations, so it reaches 0.
    Curvatures lambda_k are log-spaced between 1 and condition.
    """
    dimension: int = 10
    condition: float = 4.0
    noise: float = 0.1
    points: int = 100
    loss_threshold: float = 1e-6
    max_steps: int = 2000
    train_fraction: float = 0.8
    dataset_seed: int = 0

    def __post_init__(self):
        self._check_common()
        if self.dimension < 1:
            raise ConfigError(f"dimension must be a positive integer, got {self.dimension}")
        if not self.condition >= 1:
            raise ConfigError(f"condition must be at least 1, got {self.condition}")
        if not self.noise >= 0:
            raise ConfigError(f"noise must be non-negative, got {self.noise}")
        if self.points < 2:
            raise ConfigError(f"points must be at least 2, got {self.points}")

    @property
    def num_params(self) -> int:
        return self.dimension

    @property
    def curvatures(self) -> np.ndarray:
        return np.logspace(0, np.log10(self.condition), self.dimension)

    def generate(self) -> Dataset:
        rng = make_rng(self.dataset_seed, STREAM_DATASET)
        center = rng.standard_normal(self.dimension)
        observations = center + self.noise * rng.standard_normal((self.points, self.dimension))
        return self._split(observations, np.zeros(self.points), rng)

    def loss(self, w: np.ndarray, split: Split) -> float:
        diff = w - split.features.mean(axis=0)
        return float(0.5 * np.sum(self.curvatures * diff * diff))

    def grad(self, w: np.ndarray, split: Split) -> np.ndarray:
        return self.curvatures * (w - split.features.mean(axis=0))

    def validation_metric(self, w: np.ndarray) -> float:
        return -self.loss(w, self.dataset().validation)


@dataclass(frozen=True)
class LogisticBlobs(TrainProblem):
    """
    Two Gaussian blobs with unit variance whose centers are separation apart along a random direction, fit with
    logistic regression (weights plus bias, mean log loss). The validation metric is accuracy.
    """
    points_per_class: int = 50
    separation: float = 3.0
    dimension: int = 2
    l2: float = 0.0
    loss_threshold: float = 0.1
    max_steps: int = 2000
    train_fraction: float = 0.8
    dataset_seed: int = 0

    def __post_init__(self):
        self._check_common()
        if self.points_per_class < 1:
            raise ConfigError(f"points_per_class must be a positive integer, got {self.points_per_class}")
        if self.dimension < 1:
            raise ConfigError(f"dimension must be a positive integer, got {self.dimension}")
        if not self.separation >= 0:
            raise ConfigError(f"separation must be non-negative, got {self.separation}")
        if not self.l2 >= 0:
            raise ConfigError(f"l2 must be non-negative, got {self.l2}")

    @property
    def num_params(self) -> int:
        return self.dimension + 1

    def generate(self) -> Dataset:
        rng = make_rng(self.dataset_seed, STREAM_DATASET)
        direction = rng.standard_normal(self.dimension)
        direction /= np.linalg.norm(direction)
        offset = 0.5 * self.separation * direction

        n = self.points_per_class
        negatives = rng.standard_normal((n, self.dimension)) - offset
        positives = rng.standard_normal((n, self.dimension)) + offset
        features = np.vstack([negatives, positives])
        features = np.hstack([features, np.ones((2 * n, 1))])
        targets = np.concatenate([np.zeros(n), np.ones(n)])
        return self._split(features, targets, rng)

    def loss(self, w: np.ndarray, split: Split) -> float:
        z = split.features @ w
        # log(1 + exp(z)) - y z, stable for large |z|
        log_loss = np.mean(np.logaddexp(0.0, z) - split.targets * z)
        return float(log_loss + 0.5 * self.l2 * np.dot(w[:-1], w[:-1]))

    def grad(self, w: np.ndarray, split: Split) -> np.ndarray:
        residual = expit(split.features @ w) - split.targets
        g = split.features.T @ residual / len(split.targets)
        g[:-1] += self.l2 * w[:-1]
        return g

    def accuracy(self, w: np.ndarray, split: Split) -> float:
        predictions = (split.features @ w > 0).astype(float)
        return float(np.mean(predictions == split.targets))

    def validation_metric(self, w: np.ndarray) -> float:
        return self.accuracy(w, self.dataset().validation)


PROBLEMS = {
    "noisy_quadratic": NoisyQuadratic,
    "logistic_blobs": LogisticBlobs,
}


def problem_from_dict(d: dict) -> TrainProblem:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in PROBLEMS:
        raise ConfigError(f"Unknown problem kind: {kind} (known: {', '.join(PROBLEMS)})")
    cls = PROBLEMS[kind]
    unknown = set(d.keys()) - set(cls.__dataclass_fields__.keys())
    if unknown:
        raise ConfigError(f"Unknown {kind} fields: {sorted(unknown)}")
    try:
        return cls(**d)
    except TypeError as e:
        raise ConfigError(f"Invalid {kind} definition: {e}")


def problem_to_dict(problem: TrainProblem) -> dict:
    kind = next(k for k, cls in PROBLEMS.items() if isinstance(problem, cls))
    return {"kind": kind, **{name: getattr(problem, name) for name in problem.__dataclass_fields__}}
