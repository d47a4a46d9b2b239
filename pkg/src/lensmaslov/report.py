"""Structured reports: deterministic JSON with sorted keys, embedding config and version."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from lensmaslov import __version__

TOOL = "lensmaslov"


def to_jsonable(obj):
    """Convert numpy scalars/arrays, tuples, fractions and non-finite floats to JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def render(command: str, config: dict, result: dict) -> str:
    doc = {"tool": TOOL, "version": __version__, "command": command, "config": config, "result": result}
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2) + "\n"


def write_report(out_dir, command: str, config: dict, result: dict, name: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name or command}.json"
    path.write_text(render(command, config, result))
    return path
