import json
import os

import pandas as pd
from rich import box
from rich.console import Console
from rich.table import Table

from cehpo.baselines.comparison import COMPARISON_COLUMNS
from cehpo.errors import RunError
from cehpo.models.samples import CeResult
from cehpo.util import ensure_directory

TRACE_COLUMNS = ["round", "sample_index", "origin", "beta", "score", "q_prev", "q_est", "q_smooth", "is_elite",
                 "gamma", "best_so_far"]


def format_real(x: float | None) -> str:
    """
    Shortest representation that reads back to the same float, empty for unset values.
    """
    if x is None:
        return ""
    return repr(float(x))


def trace_frame(result: CeResult) -> pd.DataFrame:
    """
    One row per sample per round, in round then sample order.
    """
    rows = []
    for record in result.rounds:
        for i, sample in enumerate(record.samples):
            rows.append({
                "round": record.round_index,
                "sample_index": i,
                "origin": sample.origin.to_str(),
                "beta": sample.value.to_str(),
                "score": format_real(sample.score),
                "q_prev": format_real(sample.q_prev),
                "q_est": format_real(sample.q_est),
                "q_smooth": format_real(sample.q_smooth),
                "is_elite": "true" if sample.is_elite else "false",
                "gamma": format_real(record.gamma),
                "best_so_far": format_real(record.best_so_far[1])
            })
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def _write_frame(df: pd.DataFrame, path: str):
    ensure_directory(os.path.dirname(path) or ".")
    try:
        df.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise RunError(f"Cannot write {path}: {e}")


def write_trace(result: CeResult, path: str):
    _write_frame(trace_frame(result), path)


def read_trace(path: str) -> pd.DataFrame:
    """
    Reads a trace back, reals are parsed exactly as written and unset values become NaN.
    """
    return pd.read_csv(path, dtype={"origin": str, "beta": str, "is_elite": str}, float_precision="round_trip")


def result_summary(result: CeResult) -> dict:
    return {
        "best_value": result.best_value.to_str(),
        "best_score": result.best_score,
        "stop_reason": result.stop_reason.to_str(),
        "rounds_used": result.rounds_used,
        "evaluations_used": result.evaluations,
        "gamma_trace": result.gamma_trace
    }


def write_summary(summary: dict, path: str):
    ensure_directory(os.path.dirname(path) or ".")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise RunError(f"Cannot write {path}: {e}")


def comparison_frame(table: pd.DataFrame) -> pd.DataFrame:
    df = table[COMPARISON_COLUMNS].copy()
    df["best_score"] = [format_real(x) for x in df["best_score"]]
    return df


def write_comparison(table: pd.DataFrame, path: str):
    _write_frame(comparison_frame(table), path)


def print_comparison(table: pd.DataFrame, console: Console | None = None):
    """
    Renders the comparison with one row per (method, seed) and the median best score of every method.
    """
    if console is None:
        console = Console()

    rich_table = Table(title="Budget-matched comparison", box=box.SIMPLE)
    rich_table.add_column("Method", style="cyan")
    rich_table.add_column("Seed", justify="right")
    rich_table.add_column("Evaluations", justify="right")
    rich_table.add_column("Best value", style="white")
    rich_table.add_column("Best score", justify="right", style="yellow")
    for row in table.itertuples(index=False):
        rich_table.add_row(row.method, str(row.seed), str(row.evaluations), row.best_value, f"{row.best_score:.6g}")
    console.print(rich_table)

    medians = table.groupby("method", sort=False)["best_score"].median()
    for method, median in medians.items():
        console.print(f"[bold]{method}[/bold] median best score: {median:.6g}")
