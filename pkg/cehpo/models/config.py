import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

from cehpo.errors import ConfigError
from cehpo.seeds import MAX_SEED
from cehpo.util import round_half_up

logger = logging.getLogger(__name__)

RECOMMENDED_SMOOTHING = (0.4, 0.9)


class Direction(Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"

    def __str__(self):
        return self.value

    def __repr__(self):
        return self.value

    def to_str(self):
        return self.value

    @staticmethod
    def from_str(s: str):
        if s == "minimize":
            return Direction.MINIMIZE
        elif s == "maximize":
            return Direction.MAXIMIZE
        else:
            raise ValueError(f"Invalid direction: {s}")

    @property
    def worst_score(self) -> float:
        """
        Score given to failed evaluations. It can never clear any quantile threshold.
        """
        return math.inf if self == Direction.MINIMIZE else -math.inf

    def is_better(self, score: float, other: float) -> bool:
        """
        True if score is strictly better than other in this direction.
        """
        if self == Direction.MINIMIZE:
            return score < other
        return score > other

    def reaches(self, score: float, target: float) -> bool:
        if self == Direction.MINIMIZE:
            return score <= target
        return score >= target


def quantile_rank(num_samples: int, rho: float) -> int:
    """
    The smallest count k with k / num_samples >= rho, i.e. the order statistic that is the rho-quantile.
    """
    k = max(1, math.ceil(rho * num_samples))
    # rho * num_samples can land just above an integer in floating point
    while k > 1 and (k - 1) / num_samples >= rho:
        k -= 1
    while k < num_samples and k / num_samples < rho:
        k += 1
    return k


@dataclass(frozen=True)
class CeConfig:
    """
    Constants of one cross-entropy run.

    :param num_samples: M, samples per round
    :param rho: elite quantile
    :param smoothing: c, weight of the new probability estimate
    :param favorability: s, scales how many samples are drawn from the elite
    :param stop_window: l, number of equal benchmark values needed to stop
    :param gamma_tol: tolerance under which two benchmark values count as equal
    :param max_rounds: hard limit on the number of rounds
    :param direction: whether scores are minimized or maximized
    :param seed: run seed, every random stream of the run derives from it
    :param target_score: (optional) stop as soon as the best score reaches this value
    """
    num_samples: int = 100
    rho: float = 0.05
    smoothing: float = 0.7
    favorability: float = 10.0
    stop_window: int = 5
    gamma_tol: float = 1e-9
    max_rounds: int = 100
    direction: Direction = Direction.MINIMIZE
    seed: int = 0
    target_score: float | None = field(default=None)

    def __post_init__(self):
        if self.num_samples < 1:
            raise ConfigError(f"M must be a positive integer, got {self.num_samples}")
        if not 0 < self.rho < 1:
            raise ConfigError(f"rho must lie in (0, 1), got {self.rho}")
        if quantile_rank(self.num_samples, self.rho) < 1:
            raise ConfigError("ceil(M * rho) must be at least 1 (elite set would be empty)")
        if not 0 < self.smoothing <= 1:
            raise ConfigError(f"c must lie in (0, 1], got {self.smoothing}")
        if not self.favorability > 0:
            raise ConfigError(f"s must be positive, got {self.favorability}")
        n_s = self.elite_samples
        if n_s >= self.num_samples:
            raise ConfigError(f"N_s = round(s * M * rho) = {n_s} must be smaller than M = {self.num_samples} "
                              f"(every round needs at least one fresh sample)")
        if self.stop_window < 1:
            raise ConfigError(f"l must be a positive integer, got {self.stop_window}")
        if not self.gamma_tol >= 0:
            raise ConfigError(f"gamma_tol must be non-negative, got {self.gamma_tol}")
        if self.max_rounds < 1:
            raise ConfigError(f"max_rounds must be a positive integer, got {self.max_rounds}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not isinstance(self.direction, Direction):
            raise ConfigError(f"direction must be a Direction, got {self.direction!r}")

        low, high = RECOMMENDED_SMOOTHING
        if not low <= self.smoothing <= high:
            logger.warning(f"c = {self.smoothing} is outside the recommended range [{low}, {high}]")

    @property
    def elite_samples(self) -> int:
        """
        N_s = s * M * rho, rounded half-up.
        """
        return round_half_up(self.favorability * self.num_samples * self.rho)

    @property
    def elite_rank(self) -> int:
        return quantile_rank(self.num_samples, self.rho)

    def with_seed(self, seed: int) -> "CeConfig":
        return replace(self, seed=seed)

    def to_dict(self):
        return {
            "M": self.num_samples,
            "rho": self.rho,
            "c": self.smoothing,
            "s": self.favorability,
            "l": self.stop_window,
            "gamma_tol": self.gamma_tol,
            "max_rounds": self.max_rounds,
            "direction": self.direction.to_str(),
            "seed": self.seed,
            "target_score": self.target_score
        }

    @staticmethod
    def from_dict(d: dict, direction: Direction | None = None, seed: int | None = None):
        """
        Builds a config from its dict form. Missing keys take the defaults.
        :param d: the dict (keys as produced by to_dict)
        :param direction: (optional) direction overriding the dict
        :param seed: (optional) seed overriding the dict
        """
        known = {"M", "rho", "c", "s", "l", "gamma_tol", "max_rounds", "direction", "seed", "target_score"}
        unknown = set(d.keys()) - known
        if unknown:
            raise ConfigError(f"Unknown CE config keys: {sorted(unknown)}")

        defaults = CeConfig.__dataclass_fields__
        if seed is None:
            seed = d.get("seed", defaults["seed"].default)

        try:
            if direction is None:
                direction = Direction.from_str(d["direction"]) if "direction" in d else defaults["direction"].default
            return CeConfig(
                num_samples=int(d.get("M", defaults["num_samples"].default)),
                rho=float(d.get("rho", defaults["rho"].default)),
                smoothing=float(d.get("c", defaults["smoothing"].default)),
                favorability=float(d.get("s", defaults["favorability"].default)),
                stop_window=int(d.get("l", defaults["stop_window"].default)),
                gamma_tol=float(d.get("gamma_tol", defaults["gamma_tol"].default)),
                max_rounds=int(d.get("max_rounds", defaults["max_rounds"].default)),
                direction=direction,
                seed=int(seed),
                target_score=None if d.get("target_score") is None else float(d["target_score"])
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid CE config value: {e}")
