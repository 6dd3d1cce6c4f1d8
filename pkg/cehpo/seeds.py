import numpy as np

# stream tags keep the random streams of different consumers apart
STREAM_SAMPLING = 0
STREAM_EVALUATION = 1
STREAM_GRID_CELL = 2
STREAM_RANDOM_SEARCH = 3
STREAM_RANDOM_SEARCH_EVALUATION = 4
STREAM_GRID_SEARCH_EVALUATION = 5
STREAM_DATASET = 6

MAX_SEED = 2 ** 64 - 1


def _entropy(keys) -> list[int]:
    entropy = [int(k) for k in keys]
    for k in entropy:
        if k < 0:
            raise ValueError(f"Seed keys must be non-negative, got {k}")
    return entropy


def make_rng(*keys: int) -> np.random.Generator:
    """
    Creates an independent generator for the given key path, e.g. (run seed, stream tag, round index).
    :param keys: non-negative integers
    :return: a numpy generator
    """
    return np.random.default_rng(np.random.SeedSequence(_entropy(keys)))


def derive_seed(*keys: int) -> int:
    """
    Derives an unsigned 64-bit seed from a key path. Same keys, same seed.
    :param keys: non-negative integers
    :return: the seed
    """
    state = np.random.SeedSequence(_entropy(keys)).generate_state(1, dtype=np.uint64)
    return int(state[0])
