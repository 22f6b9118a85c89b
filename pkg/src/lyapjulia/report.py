"""Machine-readable reports: one JSON object per run plus optional TSV tables.

Floats are written with 17 significant digits so reports round-trip
exactly and compare byte for byte between runs.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return _Float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_Float(obj.real), _Float(obj.imag)]
    return obj


class _Float(float):
    pass


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _dump(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, _Float):
        return _fmt_float(obj)
    return json.dumps(obj)


def build_report(
    command: str,
    inputs: dict,
    results: Any,
    seeds: Sequence[int] | dict = (),
    version: str = "",
    timestamp: bool = True,
) -> dict:
    doc = {
        "command": command,
        "version": version,
        "inputs": inputs,
        "seeds": seeds,
        "results": results,
    }
    if timestamp:
        doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return doc


def dumps(doc: dict) -> str:
    return _dump(_clean(doc)) + "\n"


def write_report(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def write_table(columns: Sequence[str], rows: Iterable[Sequence[Any]], path) -> None:
    """Tab-separated table; floats at 17 significant digits."""

    def cell(v):
        if isinstance(v, (float, np.floating)):
            return _fmt_float(float(v)).strip('"')
        return str(v)

    lines = ["\t".join(columns)]
    lines += ["\t".join(cell(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
