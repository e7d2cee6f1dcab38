"""JSON/CSV artifact helpers with a provenance header."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import __version__


class ArtifactError(ValueError):
    """Unreadable or malformed input artifact."""


def provenance(seed: int, caps: dict) -> dict:
    return {"tool": "metricfactor", "version": __version__, "seed": seed, "caps": dict(sorted(caps.items()))}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(payload: dict, prov: dict | None = None) -> str:
    """Deterministic JSON text.

    Floats use Python's shortest round-trip repr; infinities are written as
    ``Infinity``, which :func:`json.loads` reads back.
    """
    body = {"provenance": prov, **payload} if prov is not None else payload
    return json.dumps(_plain(body), indent=2, allow_nan=True) + "\n"


def loads(text: str, source: str = "<input>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ArtifactError(f"{source}: expected a JSON object")
    return data


def load(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc.strerror}") from exc
    return loads(text, str(path))


def fmt(x: float) -> str:
    """17 significant digits, as used in CSV tables and printed values."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(float(x), ".17g")
