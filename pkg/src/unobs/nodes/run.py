from __future__ import annotations

from copy import deepcopy
from inspect import signature
from os import environ
from pathlib import Path
from typing import Any, Callable

from loguru import logger

RESULTS = "results"


def run(task: Callable, data: dict[str, Any], item: dict[str, Any] = {}):
    """Call `task` with the entries of data and item that match its parameter names."""
    logger.info(f"Running check {task.__name__}")
    sig = signature(task)
    inputs = {k: v for k, v in {**data, **item}.items() if k in sig.parameters}
    return task(**inputs)


def unobs_path() -> Path:
    unobs_path = Path(environ.get("UNOBS_DIR", Path.cwd() / ".unobs"))
    unobs_path.mkdir(exist_ok=True, parents=True)
    return unobs_path


def _is_result(value: Any) -> bool:
    # duck-typed to keep nodes free of campaign imports
    return hasattr(value, "criterion") and hasattr(value, "passed")


def run_step(task: Callable, data: dict[str, Any], item: dict[str, Any] = {}):
    """Run one check; result records are appended to `results`, other outputs update data."""
    result = run(task, data, item)
    result = {} if result is None else result
    if not isinstance(result, dict):
        raise ValueError(
            f"Check `{task.__name__}` must return a dict or None, got {type(result).__name__}"
        )
    data = deepcopy(data)
    records = list(data.get(RESULTS, []))
    for key, value in result.items():
        if _is_result(value):
            records.append(value)
        elif isinstance(value, list) and value and all(_is_result(v) for v in value):
            records.extend(value)
        else:
            data[key] = value
    data[RESULTS] = records
    logger.debug(f"Data keys passed to next check: {sorted(data)}")
    return data


def run_foreach(task: Callable, data: dict[str, Any]):
    result = run(task, data)
    if not isinstance(result, list):
        raise ValueError(
            f"Foreach `{task.__name__}` must return list, got {type(result).__name__}"
        )
    return result


def _same(a: Any, b: Any) -> bool:
    try:
        return bool(a == b)
    except ValueError:
        return False


def merge_foreach(data: list[dict[str, Any]]):
    """Collapse identical values, gather differing ones into lists, concatenate results."""
    merged: dict[str, list[Any]] = {}
    records = []
    for d in data:
        for k, v in d.items():
            if k == RESULTS:
                records.extend(v)
                continue
            merged.setdefault(k, []).append(v)

    out: dict[str, Any] = {}
    for k, vals in merged.items():
        out[k] = vals[0] if all(_same(v, vals[0]) for v in vals) else vals
    if records or any(RESULTS in d for d in data):
        out[RESULTS] = records
    return out
