import pathlib


def ensure_directory(path: str):
    """
    Creates the directory and its parents unless it already exists.
    """
    pathlib.Path(path).mkdir(parents=True, exist_ok=True)


def round_half_up(x: float) -> int:
    return int(x + 0.5) if x >= 0 else -int(-x + 0.5)
