import json
import logging
import os
from dataclasses import dataclass, field

import dotenv

from cehpo.baselines.search import BaselineConfig
from cehpo.errors import ConfigError, ConfigFileNotFoundError, ConfigSyntaxError
from cehpo.hyperspace.spaces import DecreasingSequenceSpace, Space, space_from_dict
from cehpo.models.config import CeConfig, Direction
from cehpo.multitask.grid import TaskGrid
from cehpo.objectives.analytic import ANALYTIC_FUNCTIONS, AnalyticObjective
from cehpo.objectives.objective import Objective
from cehpo.objectives.optimizers import AdamParams, Variant
from cehpo.objectives.problems import problem_from_dict
from cehpo.objectives.tuning import TrainingObjective, TunedField, check_space
from cehpo.seeds import MAX_SEED

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

COMMANDS = ("tune", "grid", "compare")

TOP_LEVEL_KEYS = {"schema_version", "command", "seed", "out_dir", "threads", "record_wall_time", "space",
                  "objective", "ce", "baseline", "grid"}

DEFAULT_OUT_DIR = "./out"


def _int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}")


def build_objective(spec: dict, space: Space) -> Objective:
    """
    Builds an objective from its config form.
    :param spec: {"kind": "analytic", ...} or {"kind": "convergence" | "generalization", ...}
    :param space: the space the objective is tuned over
    :return: the objective
    """
    if not isinstance(spec, dict):
        raise ConfigError(f"An objective must be an object, got {spec!r}")

    kind = spec.get("kind")
    try:
        if kind == "analytic":
            unknown = set(spec.keys()) - {"kind", "name", "direction"}
            if unknown:
                raise ConfigError(f"Unknown analytic objective keys: {sorted(unknown)}")
            name = spec.get("name")
            if name not in ANALYTIC_FUNCTIONS:
                raise ConfigError(f"Unknown analytic objective: {name} (known: {', '.join(ANALYTIC_FUNCTIONS)})")
            return AnalyticObjective(name, Direction.from_str(spec.get("direction", "minimize")))

        if kind in ("convergence", "generalization"):
            unknown = set(spec.keys()) - {"kind", "tuned", "variant", "fixed", "problem"}
            if unknown:
                raise ConfigError(f"Unknown {kind} objective keys: {sorted(unknown)}")
            if "tuned" not in spec:
                raise ConfigError(f"A {kind} objective needs a tuned field")
            if "problem" not in spec:
                raise ConfigError(f"A {kind} objective needs a problem")

            fixed = spec.get("fixed", {})
            if not isinstance(fixed, dict) or set(fixed.keys()) - {"alpha", "beta1", "beta2", "epsilon"}:
                raise ConfigError(f"fixed must be an object with alpha, beta1, beta2 or epsilon, got {fixed!r}")

            tuned = TunedField.from_str(spec["tuned"])
            problem = problem_from_dict(spec["problem"])
            check_space(tuned, space, problem)
            return TrainingObjective(
                problem=problem,
                fixed=AdamParams.from_dict(fixed),
                tuned=tuned,
                variant=Variant.from_str(spec.get("variant", "adam")),
                metric=kind,
                space=space if isinstance(space, DecreasingSequenceSpace) else None
            )
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid {kind} objective: {e}")

    raise ConfigError(f"Unknown objective kind: {kind} (known: analytic, convergence, generalization)")


def with_dataset(objective_spec: dict, dataset: dict) -> dict:
    """
    The objective spec with the dataset's problem fields laid over its problem.
    """
    if not dataset:
        return objective_spec
    if "problem" not in objective_spec:
        raise ConfigError(f"Dataset overrides {sorted(dataset)} need an objective with a problem")
    return {**objective_spec, "problem": {**objective_spec["problem"], **dataset}}


@dataclass(frozen=True)
class RunConfig:
    """
    A parsed and validated run configuration.

    :param command: tune, grid or compare
    :param space: the search space
    :param objective: the objective spec (tune and compare)
    :param ce: the cross-entropy config, its direction is the objective's
    :param baseline: baseline budget and grid size (compare)
    :param baseline_seeds: the seeds compared (compare)
    :param grid_datasets: problem field overrides, one per dataset (grid)
    :param grid_problems: objective specs, one per problem (grid)
    :param seed: the run seed
    :param out_dir: where the output files are written
    :param threads: evaluation (tune, compare) or cell (grid) worker threads
    :param record_wall_time: whether summary.json records the wall time
    """
    command: str
    space: Space
    ce: CeConfig
    objective: dict | None = None
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    baseline_seeds: tuple[int, ...] = (0,)
    grid_datasets: tuple[dict, ...] = ()
    grid_problems: tuple[dict, ...] = ()
    seed: int = 0
    out_dir: str = DEFAULT_OUT_DIR
    threads: int = 1
    record_wall_time: bool = True
    schema_version: int = SCHEMA_VERSION

    def build_objective(self) -> Objective:
        if self.objective is None:
            raise ConfigError(f"The {self.command} command needs an objective")
        return build_objective(self.objective, self.space)

    def build_grid(self) -> TaskGrid:
        return TaskGrid(
            datasets=list(self.grid_datasets),
            problems=list(self.grid_problems),
            factory=lambda dataset, problem: build_objective(with_dataset(problem, dataset), self.space),
            space=self.space
        )


def _direction_of(d: dict, command: str, space: Space) -> Direction:
    """
    Builds every objective the run needs once, so broken specs fail at load time, and returns their direction.
    """
    if command in ("tune", "compare"):
        if "objective" not in d:
            raise ConfigError(f"The {command} command needs an objective")
        return build_objective(d["objective"], space).direction

    grid = d.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("The grid command needs a grid with datasets and problems")
    unknown = set(grid.keys()) - {"datasets", "problems"}
    if unknown:
        raise ConfigError(f"Unknown grid keys: {sorted(unknown)}")
    datasets = grid.get("datasets", [{}])
    problems = grid.get("problems", [])
    if not isinstance(datasets, list) or len(datasets) == 0:
        raise ConfigError("grid.datasets must be a non-empty list")
    if not isinstance(problems, list) or len(problems) == 0:
        raise ConfigError("grid.problems must be a non-empty list")

    directions = set()
    for dataset in datasets:
        if not isinstance(dataset, dict):
            raise ConfigError(f"A grid dataset must be an object of problem fields, got {dataset!r}")
        for problem in problems:
            directions.add(build_objective(with_dataset(problem, dataset), space).direction)
    if len(directions) > 1:
        raise ConfigError("All grid problems must be optimized in the same direction")
    return directions.pop()


def parse_config(d: dict, seed: int | None = None, out_dir: str | None = None,
                 threads: int | None = None) -> RunConfig:
    """
    Validates a config dict. Explicit arguments override the dict, environment variables fill in what both leave
    out (CEHPO_OUT_DIR, CEHPO_THREADS).
    :param d: the config dict
    :param seed: (optional) seed override
    :param out_dir: (optional) output directory override
    :param threads: (optional) thread count override
    :return: the run config
    """
    if not isinstance(d, dict):
        raise ConfigError("A run config must be a JSON object")
    unknown = set(d.keys()) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"Unknown config keys: {sorted(unknown)}")

    schema_version = _int(d.get("schema_version", SCHEMA_VERSION), "schema_version")
    if schema_version != SCHEMA_VERSION:
        raise ConfigError(f"Unsupported schema_version {schema_version}, expected {SCHEMA_VERSION}")

    command = d.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")

    if seed is None:
        seed = _int(d.get("seed", 0), "seed")
    if not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed}")

    if out_dir is None:
        out_dir = d.get("out_dir", os.getenv("CEHPO_OUT_DIR", DEFAULT_OUT_DIR))
    if not isinstance(out_dir, str) or out_dir == "":
        raise ConfigError(f"out_dir must be a non-empty path, got {out_dir!r}")

    if threads is None:
        threads = _int(d.get("threads", os.getenv("CEHPO_THREADS", 1)), "threads")
    if threads < 1:
        raise ConfigError(f"threads must be a positive integer, got {threads}")

    record_wall_time = d.get("record_wall_time", True)
    if not isinstance(record_wall_time, bool):
        raise ConfigError(f"record_wall_time must be true or false, got {record_wall_time!r}")

    if "space" not in d:
        raise ConfigError("A run config needs a space")
    if not isinstance(d["space"], dict):
        raise ConfigError(f"space must be an object, got {d['space']!r}")
    space = space_from_dict(d["space"])

    direction = _direction_of(d, command, space)

    ce_dict = d.get("ce", {})
    if not isinstance(ce_dict, dict):
        raise ConfigError(f"ce must be an object, got {ce_dict!r}")
    if "seed" in ce_dict:
        raise ConfigError("The run seed goes in the top-level seed field, not in ce")
    if "direction" in ce_dict and ce_dict["direction"] != direction.to_str():
        raise ConfigError(f"ce.direction is {ce_dict['direction']} but the objective is to {direction}")
    ce = CeConfig.from_dict(ce_dict, direction=direction, seed=seed)

    baseline_dict = d.get("baseline", {})
    if not isinstance(baseline_dict, dict):
        raise ConfigError(f"baseline must be an object, got {baseline_dict!r}")
    unknown = set(baseline_dict.keys()) - {"budget", "grid_points", "seeds"}
    if unknown:
        raise ConfigError(f"Unknown baseline keys: {sorted(unknown)}")
    budget = baseline_dict.get("budget")
    grid_points = baseline_dict.get("grid_points")
    baseline = BaselineConfig(
        budget=None if budget is None else _int(budget, "baseline.budget"),
        grid_points=None if grid_points is None else _int(grid_points, "baseline.grid_points"),
        seed=seed
    )
    seeds = baseline_dict.get("seeds", [seed])
    if not isinstance(seeds, list) or len(seeds) == 0:
        raise ConfigError("baseline.seeds must be a non-empty list")
    baseline_seeds = tuple(_int(s, "baseline seed") for s in seeds)
    if any(not 0 <= s <= MAX_SEED for s in baseline_seeds):
        raise ConfigError(f"baseline seeds must be unsigned 64-bit integers, got {list(baseline_seeds)}")
    if len(set(baseline_seeds)) != len(baseline_seeds):
        raise ConfigError(f"baseline seeds must be unique, got {list(baseline_seeds)}")

    grid = d.get("grid", {}) if command == "grid" else {}

    return RunConfig(
        command=command,
        space=space,
        ce=ce,
        objective=d.get("objective"),
        baseline=baseline,
        baseline_seeds=baseline_seeds,
        grid_datasets=tuple(grid.get("datasets", [{}])),
        grid_problems=tuple(grid.get("problems", [])),
        seed=seed,
        out_dir=out_dir,
        threads=threads,
        record_wall_time=record_wall_time,
        schema_version=schema_version
    )


def load_config(path: str, seed: int | None = None, out_dir: str | None = None,
                threads: int | None = None) -> RunConfig:
    """
    Reads and validates a JSON run config. Missing fields take the defaults (M=100, rho=0.05, c=0.7, s=10, l=5,
    gamma_tol=1e-9, max_rounds=100).
    :param path: the config file
    :param seed: (optional) seed override
    :param out_dir: (optional) output directory override
    :param threads: (optional) thread count override
    :return: the run config
    """
    dotenv.load_dotenv()

    if not os.path.isfile(path):
        raise ConfigFileNotFoundError(f"Config file not found: {path}")

    with open(path, "r", encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigSyntaxError(f"Malformed JSON in {path} (line {e.lineno}, column {e.colno}): {e.msg}")

    config = parse_config(d, seed=seed, out_dir=out_dir, threads=threads)
    logger.debug(f"Loaded {config.command} config from {path}: {config.ce.to_dict()}")
    return config
