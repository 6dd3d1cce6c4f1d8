import math
from dataclasses import dataclass

import numpy as np

from cehpo.errors import ShapeMismatchError, SpaceError


@dataclass(frozen=True)
class Scalar:
    """
    A single hyperparameter value.
    """
    value: float

    def to_str(self) -> str:
        return repr(float(self.value))

    def to_dict(self):
        return {"kind": "scalar", "value": float(self.value)}


@dataclass(frozen=True)
class Sequence:
    """
    An ordered, non-increasing sequence of hyperparameter values, one per training segment.
    """
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self):
        return len(self.values)

    def to_str(self) -> str:
        text = ";".join(repr(v) for v in self.values)
        # a lone value keeps its separator so it does not read back as a Scalar
        return text + ";" if len(self.values) == 1 else text

    def to_dict(self):
        return {"kind": "sequence", "values": list(self.values)}


HyperValue = Scalar | Sequence


def hyper_value_from_str(s: str) -> HyperValue:
    """
    Inverse of HyperValue.to_str. A string without ";" is read back as a scalar, "0.5;" as a one element sequence.
    """
    if ";" in s:
        return Sequence(tuple(float(v) for v in s.removesuffix(";").split(";")))
    return Scalar(float(s))


def hyper_value_from_dict(d: dict) -> HyperValue:
    if d["kind"] == "scalar":
        return Scalar(float(d["value"]))
    elif d["kind"] == "sequence":
        return Sequence(tuple(d["values"]))
    raise ValueError(f"Invalid hyperparameter value kind: {d['kind']}")


def _check_bounds(a, b):
    if not (math.isfinite(a) and math.isfinite(b)):
        raise SpaceError(f"Bounds must be finite, got [{a}, {b}]")
    if not b > a:
        raise SpaceError(f"Upper bound must exceed lower bound (b > a), got [{a}, {b}]")


@dataclass(frozen=True)
class ScalarIntervalSpace:
    """
    The closed interval [a, b] a scalar hyperparameter is searched in.
    """
    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        _check_bounds(self.a, self.b)

    def to_dict(self):
        return {"kind": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class DecreasingSequenceSpace:
    """
    k values in [a, b] sorted non-increasing, the i-th one in force during the i-th range of training steps.
    """
    k: int
    a: float
    b: float
    epoch_boundaries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "epoch_boundaries",
                           tuple((int(start), int(stop)) for start, stop in self.epoch_boundaries))
        _check_bounds(self.a, self.b)
        if self.k < 1:
            raise SpaceError(f"Number of segments must be at least 1, got k={self.k}")
        if len(self.epoch_boundaries) != self.k:
            raise SpaceError(f"Expected {self.k} epoch boundaries, got {len(self.epoch_boundaries)}")

        expected_start = 0
        for start, stop in self.epoch_boundaries:
            if start != expected_start:
                raise SpaceError(f"Epoch boundaries must be contiguous from step 0, segment starts at {start} "
                                 f"instead of {expected_start}")
            if stop <= start:
                raise SpaceError(f"Epoch segment [{start}, {stop}) is empty")
            expected_start = stop

    @property
    def horizon(self) -> int:
        """
        The number of training steps the segments cover.
        """
        return self.epoch_boundaries[-1][1]

    @staticmethod
    def even_split(k: int, a: float, b: float, horizon: int) -> "DecreasingSequenceSpace":
        """
        Splits [0, horizon) into k contiguous segments of (almost) equal length.
        """
        if k < 1 or horizon < k:
            raise SpaceError(f"Cannot split {horizon} steps into {k} segments")
        edges = np.linspace(0, horizon, k + 1).round().astype(int)
        return DecreasingSequenceSpace(k, a, b, tuple(zip(edges[:-1].tolist(), edges[1:].tolist())))

    def to_dict(self):
        return {
            "kind": "decreasing_sequence",
            "k": self.k,
            "a": self.a,
            "b": self.b,
            "epoch_boundaries": [list(b) for b in self.epoch_boundaries]
        }


Space = ScalarIntervalSpace | DecreasingSequenceSpace


def space_from_dict(d: dict) -> Space:
    kind = d.get("kind", "interval")
    try:
        if kind == "interval":
            return ScalarIntervalSpace(float(d["a"]), float(d["b"]))
        elif kind == "decreasing_sequence":
            k = int(d["k"])
            if "epoch_boundaries" in d:
                return DecreasingSequenceSpace(k, float(d["a"]), float(d["b"]), tuple(d["epoch_boundaries"]))
            return DecreasingSequenceSpace.even_split(k, float(d["a"]), float(d["b"]), int(d["horizon"]))
    except KeyError as e:
        raise SpaceError(f"Space definition is missing the field {e}")
    raise SpaceError(f"Unknown space kind: {kind}")


def sample_uniform(space: Space, rng: np.random.Generator) -> HyperValue:
    """
    Draws a uniform value from the space. Sequences are k independent uniforms sorted non-increasing.
    :param space: the search space
    :param rng: the generator to draw from
    :return: a value satisfying validate(space, value)
    """
    if isinstance(space, ScalarIntervalSpace):
        return Scalar(float(rng.uniform(space.a, space.b)))

    draws = np.sort(rng.uniform(space.a, space.b, size=space.k))[::-1]
    return Sequence(tuple(draws.tolist()))


def validate(space: Space, value: HyperValue) -> bool:
    if isinstance(space, ScalarIntervalSpace):
        return isinstance(value, Scalar) and space.a <= value.value <= space.b

    if not isinstance(value, Sequence) or len(value) != space.k:
        return False
    if any(not (space.a <= v <= space.b) for v in value.values):
        return False
    return all(value.values[i] >= value.values[i + 1] for i in range(len(value) - 1))


def distance_sq(x: HyperValue, y: HyperValue) -> float:
    """
    Squared Euclidean distance between two values of the same shape.
    """
    if isinstance(x, Scalar) and isinstance(y, Scalar):
        return (x.value - y.value) ** 2
    if isinstance(x, Sequence) and isinstance(y, Sequence) and len(x) == len(y):
        return float(sum((u - v) ** 2 for u, v in zip(x.values, y.values)))
    raise ShapeMismatchError(f"Cannot compare {x} with {y}")


def same_shape(x: HyperValue, y: HyperValue) -> bool:
    if isinstance(x, Scalar):
        return isinstance(y, Scalar)
    return isinstance(y, Sequence) and len(x) == len(y)
