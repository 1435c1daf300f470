"""JSON and CSV writers that print every float with 17 significant digits."""

from __future__ import annotations

from fractions import Fraction
from json import dumps as json_dumps
from math import isfinite
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from loguru import logger
from pydantic import BaseModel


def format_float(x: float) -> str:
    """17 significant digits; non-finite values become JSON strings."""
    x = float(x)
    if not isfinite(x):
        return json_dumps(str(x))
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def to_plain(obj: Any) -> Any:
    """Reduce models, arrays and exact numbers to JSON-ready containers."""
    if hasattr(obj, "to_json_dict"):
        return to_plain(obj.to_json_dict())
    if isinstance(obj, BaseModel):
        return {name: to_plain(getattr(obj, name)) for name in type(obj).model_fields}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [to_plain(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json_dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return json_dumps(obj, ensure_ascii=False)


def dumps(obj: Any, indent: int = 2) -> str:
    return _encode(to_plain(obj), indent, 0) + "\n"


def write_json(path: Path | str, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj), encoding="utf-8", newline="\n")
    logger.info(f"Wrote {path}")
    return path


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format_float(value).strip('"')
    return str(value)


def write_csv(path: Path | str, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> Path:
    """Header row, comma separator, LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    logger.info(f"Wrote {path}")
    return path
