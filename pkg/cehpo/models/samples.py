from dataclasses import dataclass, field
from enum import Enum

from cehpo.hyperspace.spaces import HyperValue


@dataclass(frozen=True)
class Fresh:
    """
    The sample was drawn uniformly from the space.
    """

    def to_str(self):
        return "fresh"


@dataclass(frozen=True)
class ResampledFrom:
    """
    The sample is an exact copy of an elite member of an earlier round.

    :param round_index: the round the elite member was scored in
    :param sample_index: the index of the elite member within that round
    """
    round_index: int
    sample_index: int

    def to_str(self):
        return f"elite:{self.round_index}:{self.sample_index}"


Origin = Fresh | ResampledFrom


@dataclass
class Sample:
    """
    One candidate of a round together with its probability bookkeeping. The engine fills in score, q_est,
    q_smooth and is_elite as the round progresses; the sample is not modified once its round is recorded.
    """
    value: HyperValue
    q_prev: float = 0.0
    origin: Origin = field(default_factory=Fresh)
    score: float | None = None
    q_est: float | None = None
    q_smooth: float | None = None
    is_elite: bool = False


@dataclass(frozen=True)
class EliteMember:
    sample_index: int
    sample: Sample
    q_norm: float

    @property
    def value(self) -> HyperValue:
        return self.sample.value


@dataclass(frozen=True)
class EliteSet:
    members: tuple[EliteMember, ...]

    def __len__(self):
        return len(self.members)

    @property
    def weights(self) -> list[float]:
        return [m.q_norm for m in self.members]


@dataclass(frozen=True)
class RoundRecord:
    """
    Trace of one completed round.

    :param round_index: t, starting at 1
    :param samples: the M samples of the round, in index order
    :param gamma: the benchmark quantile of the round
    :param elite: the elite set with normalized weights
    :param n_s: how many samples of this round were resampled from the previous elite
    :param best_in_round: best (value, score) among this round's samples
    :param best_so_far: best (value, score) over this and all earlier rounds
    """
    round_index: int
    samples: tuple[Sample, ...]
    gamma: float
    elite: EliteSet
    n_s: int
    best_in_round: tuple[HyperValue, float]
    best_so_far: tuple[HyperValue, float]


class StopReason(Enum):
    GAMMA_PLATEAU = "gamma_plateau"
    MAX_ROUNDS = "max_rounds"
    TARGET_REACHED = "target_reached"

    def __str__(self):
        return self.value

    def to_str(self):
        return self.value


@dataclass(frozen=True)
class CeResult:
    best_value: HyperValue
    best_score: float
    rounds: tuple[RoundRecord, ...]
    stop_reason: StopReason

    @property
    def gamma_trace(self) -> list[float]:
        return [r.gamma for r in self.rounds]

    @property
    def rounds_used(self) -> int:
        return len(self.rounds)

    @property
    def evaluations(self) -> int:
        return sum(len(r.samples) for r in self.rounds)
