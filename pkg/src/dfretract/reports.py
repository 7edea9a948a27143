"""Versioned JSON reports with an embedded run manifest.

Layout of a report document::

    {
      "schema": "dfretract-report",
      "schema_version": 1,
      "kind": "<command>",
      "manifest": {command, parameters, model_checksum, seed, library_version, timestamp},
      "payload": {...}
    }

Keys are sorted and floats are written with ``repr`` precision, so two runs
with the same manifest give byte-identical documents apart from the
``timestamp`` field.  Non-finite floats are written as the strings ``"nan"``,
``"inf"`` and ``"-inf"`` to keep the file strict JSON.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .exceptions import ModelFileError, SchemaMismatch

__all__ = [
    "SCHEMA",
    "SCHEMA_VERSION",
    "RunManifest",
    "make_manifest",
    "to_jsonable",
    "render_report",
    "write_report",
    "read_report",
    "deterministic_payload",
]

SCHEMA = "dfretract-report"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a run."""

    command: str
    parameters: dict[str, Any] = field(default_factory=dict)
    model_checksum: str | None = None
    seed: int | None = None
    library_version: str = ""
    timestamp: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def make_manifest(command: str, parameters: dict, model_checksum=None, seed=None) -> RunManifest:
    from . import __version__

    return RunManifest(
        command=command,
        parameters=to_jsonable(parameters),
        model_checksum=model_checksum,
        seed=seed,
        library_version=__version__,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )


def _float(x: float):
    if math.isfinite(x):
        return float(x)
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj: Any) -> Any:
    """Convert numpy values, fractions, dataclasses and complex matrices into JSON types."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"real": _float(obj.real), "imag": _float(obj.imag)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"real": to_jsonable(obj.real), "imag": to_jsonable(obj.imag)}
        return [to_jsonable(v) for v in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(manifest: RunManifest, payload: dict) -> str:
    doc = {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "kind": manifest.command,
        "manifest": to_jsonable(manifest),
        "payload": to_jsonable(payload),
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path, manifest: RunManifest, payload: dict) -> Path:
    """Write atomically; returns the path."""
    path = Path(path)
    text = render_report(manifest, payload)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_report(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"cannot read report {path}: {exc}") from exc
    if doc.get("schema") != SCHEMA or doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(f"{path} is not a version {SCHEMA_VERSION} report")
    return doc


def deterministic_payload(text: str) -> str:
    """Report text with the timestamp blanked, for reproducibility comparisons."""
    doc = json.loads(text)
    doc["manifest"]["timestamp"] = ""
    return json.dumps(doc, sort_keys=True, indent=2)
