"""
JSON result reports and plot-ready CSV tables
"""
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src import __version__
from src.selection.models import SelectionResult
from src.simulation.models import OracleMetrics, SimScenario

logger = logging.getLogger(__name__)

REPORT_FIELDS = ("command", "config", "result", "diagnostics", "version")


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy scalars and arrays, tuples, paths and enums to JSON types

    Non-finite floats become None so every report is strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def build_report(
    command: str,
    config: Dict[str, Any],
    result: Dict[str, Any],
    diagnostics: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Assemble the report envelope {command, config, result, diagnostics, version}"""
    return to_jsonable({
        "command": command,
        "config": config,
        "result": result,
        "diagnostics": diagnostics or {},
        "version": __version__,
    })


def dumps_report(report: Dict[str, Any]) -> str:
    """Serialize with sorted keys; floats keep their shortest round-trip form"""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(report), encoding="utf-8")
    logger.info(f"Wrote report {path}")
    return path


def write_table(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """Write a table as CSV with round-trip float formatting"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=lambda v: repr(float(v)), lineterminator="\n")
    logger.info(f"Wrote table {path} ({len(frame)} rows)")
    return path


def scoreboard_frame(selection: SelectionResult) -> pd.DataFrame:
    """One row per grid cell in path order"""
    columns = ["lambda", "gamma", "k_nonzero", "mean_loss", "sn", "n", "value", "feasible"]
    return pd.DataFrame([score.to_dict() for score in selection.scoreboard], columns=columns)


def rate_plot_frame(scenarios: Sequence[SimScenario], metrics: Sequence[OracleMetrics]) -> pd.DataFrame:
    """log alpha_n against log median l2 error, one row per sample size"""
    alphas = np.array([sc.alpha_n for sc in scenarios])
    medians = np.array([m.median_l2 for m in metrics])
    with np.errstate(divide="ignore"):
        log_medians = np.log(medians)
    return pd.DataFrame({
        "n": [sc.n for sc in scenarios],
        "d": [sc.d for sc in scenarios],
        "alpha_n": alphas,
        "log_alpha_n": np.log(alphas),
        "median_l2": medians,
        "log_median_l2": log_medians,
        "exact_recovery_rate": [m.exact_recovery_rate for m in metrics],
    })


def replications_frame(ns: Sequence[int], metrics: Sequence[OracleMetrics]) -> pd.DataFrame:
    """Per-replication records of every scenario, tagged with its sample size"""
    frames = []
    for n, m in zip(ns, metrics):
        frame = m.records_frame()
        frame.insert(0, "n", n)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
