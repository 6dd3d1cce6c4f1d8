import logging
import os
import time

from cehpo.baselines.comparison import compare_methods
from cehpo.cli.config import RunConfig
from cehpo.cli.output import print_comparison, result_summary, write_comparison, write_summary, write_trace
from cehpo.engine.ce import run_cehpo
from cehpo.engine.diagnostics import result_violations
from cehpo.engine.evaluation import Evaluator
from cehpo.errors import CehpoError, ConfigError, RunError
from cehpo.models.samples import ResampledFrom, RoundRecord
from cehpo.multitask.grid import run_grid
from cehpo.util import ensure_directory

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUN_ERROR = 3


class RoundLogger:
    """
    Logs the composition of every finished round.
    """

    def __init__(self, label: str):
        self.label = label

    def __call__(self, record: RoundRecord):
        resampled = sum(1 for s in record.samples if isinstance(s.origin, ResampledFrom))
        logger.debug(f"{self.label} round {record.round_index}: {resampled} resampled, "
                     f"{len(record.samples) - resampled} fresh, {len(record.elite)} elite")


def _base_summary(config: RunConfig) -> dict:
    return {
        "schema_version": config.schema_version,
        "command": config.command,
        "seed": config.seed,
        "space": config.space.to_dict(),
        "ce": config.ce.to_dict()
    }


def _finish_summary(summary: dict, config: RunConfig, started: float) -> dict:
    if config.record_wall_time:
        summary["wall_time_seconds"] = time.perf_counter() - started
    return summary


def _log_violations(violations: list[str]):
    for v in violations:
        logger.error(f"Invariant violated: {v}")


def run_tune(config: RunConfig) -> dict:
    started = time.perf_counter()
    objective = config.build_objective()
    result = run_cehpo(config.space, objective, config.ce, Evaluator(config.threads),
                       on_round=RoundLogger(objective.name))

    violations = result_violations(result, config.ce)
    _log_violations(violations)

    write_trace(result, os.path.join(config.out_dir, "trace.csv"))
    summary = {
        **_base_summary(config),
        "objective": objective.name,
        "direction": objective.direction.to_str(),
        **result_summary(result),
        "invariant_violations": len(violations)
    }
    summary = _finish_summary(summary, config, started)
    write_summary(summary, os.path.join(config.out_dir, "summary.json"))
    logger.info(f"Best value {result.best_value.to_str()} with score {result.best_score!r}")
    return summary


def run_grid_command(config: RunConfig) -> dict:
    started = time.perf_counter()
    grid = config.build_grid()
    result = run_grid(grid, config.ce, threads=config.threads)

    cells = []
    total_violations = 0
    for i, j in grid.cells():
        cell_result = result.cell_results[i][j]
        violations = result_violations(cell_result, config.ce)
        _log_violations(violations)
        total_violations += len(violations)

        write_trace(cell_result, os.path.join(config.out_dir, "cells", f"d{i}_m{j}", "trace.csv"))
        cells.append({"dataset": i, "problem": j, **result_summary(cell_result),
                      "invariant_violations": len(violations)})

    consensus = result.consensus.to_str()
    consensus_cell = next(c for c in cells if c["best_value"] == consensus)
    summary = {
        **_base_summary(config),
        "cells": cells,
        "consensus": consensus,
        "best_value": consensus,
        "best_score": consensus_cell["best_score"],
        "stop_reason": consensus_cell["stop_reason"],
        "consensus_cell": {"dataset": consensus_cell["dataset"], "problem": consensus_cell["problem"]},
        "rounds_used": sum(c["rounds_used"] for c in cells),
        "evaluations_used": sum(c["evaluations_used"] for c in cells),
        "invariant_violations": total_violations
    }
    summary = _finish_summary(summary, config, started)
    write_summary(summary, os.path.join(config.out_dir, "summary.json"))
    logger.info(f"Consensus value {result.consensus.to_str()}")
    return summary


def run_compare(config: RunConfig) -> dict:
    started = time.perf_counter()
    objective = config.build_objective()
    comparison = compare_methods(config.space, objective, config.ce, config.baseline, list(config.baseline_seeds),
                                 Evaluator(config.threads))

    total_violations = 0
    per_seed = []
    best_seed = None
    for seed, ce_result in comparison.ce_results.items():
        violations = result_violations(ce_result, config.ce)
        _log_violations(violations)
        total_violations += len(violations)
        write_trace(ce_result, os.path.join(config.out_dir, "seeds", str(seed), "trace.csv"))

        per_seed.append({"seed": seed, **result_summary(ce_result), "invariant_violations": len(violations)})
        if best_seed is None or objective.direction.is_better(ce_result.best_score,
                                                              comparison.ce_results[best_seed].best_score):
            best_seed = seed
    best = comparison.ce_results[best_seed]

    write_comparison(comparison.table, os.path.join(config.out_dir, "comparison.csv"))
    print_comparison(comparison.table)

    medians = comparison.table.groupby("method", sort=False)["best_score"].median()
    summary = {
        **_base_summary(config),
        "objective": objective.name,
        "direction": objective.direction.to_str(),
        "seeds": list(config.baseline_seeds),
        "per_seed": per_seed,
        "best_seed": best_seed,
        "best_value": best.best_value.to_str(),
        "best_score": best.best_score,
        "stop_reason": best.stop_reason.to_str(),
        "rounds_used": sum(entry["rounds_used"] for entry in per_seed),
        "median_best_score": {method: float(m) for method, m in medians.items()},
        "evaluations_used": {method: int(n) for method, n in
                             comparison.table.groupby("method", sort=False)["evaluations"].sum().items()},
        "invariant_violations": total_violations
    }
    summary = _finish_summary(summary, config, started)
    write_summary(summary, os.path.join(config.out_dir, "summary.json"))
    return summary


COMMAND_RUNNERS = {
    "tune": run_tune,
    "grid": run_grid_command,
    "compare": run_compare,
}


def execute(config: RunConfig) -> int:
    """
    Runs the configured command and writes its output files.
    :param config: the run config
    :return: the exit status, 0 on success, 2 for config errors, 3 for run errors
    """
    try:
        try:
            ensure_directory(config.out_dir)
        except OSError as e:
            raise RunError(f"Cannot create the output directory {config.out_dir}: {e}")
        if not os.access(config.out_dir, os.W_OK):
            raise RunError(f"The output directory {config.out_dir} is not writable")

        COMMAND_RUNNERS[config.command](config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (CehpoError, OSError) as e:
        logger.error(f"{config.command} failed: {e.__class__.__name__}: {e}")
        return EXIT_RUN_ERROR

    logger.info(f"Wrote results to {config.out_dir}")
    return EXIT_OK
