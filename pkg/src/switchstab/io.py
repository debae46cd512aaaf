"""Matrix-set JSON files and report helpers."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import MatrixFileError
from .instances import get_instance, instance_names
from .linalg import MatrixSet


def _num(x: float) -> str:
    return format(float(x), ".17g")


def serialize_matrix_set(ms: MatrixSet) -> str:
    """JSON text with every entry written to 17 significant digits (bit-exact round trip)."""
    mats = ",\n    ".join("[" + ", ".join(_num(v) for v in a.reshape(-1)) + "]" for a in ms.matrices)
    labels = ", ".join(json.dumps(lab) for lab in ms.labels)
    return f'{{\n  "dim": {ms.dim},\n  "matrices": [\n    {mats}\n  ],\n  "labels": [{labels}]\n}}\n'


def parse_matrix_set(text: str) -> MatrixSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MatrixFileError("top level must be an object with fields dim, matrices, labels")
    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MatrixFileError("field 'dim' must be a positive integer")
    mats = doc.get("matrices")
    if not isinstance(mats, list) or not mats:
        raise MatrixFileError("field 'matrices' must be a nonempty list")
    out = []
    for k, entries in enumerate(mats):
        if not isinstance(entries, list) or len(entries) != dim * dim:
            raise MatrixFileError(f"field 'matrices[{k}]' must list dim^2 = {dim * dim} entries")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entries):
            raise MatrixFileError(f"field 'matrices[{k}]' has a non-numeric entry")
        a = np.array(entries, dtype=float).reshape(dim, dim)
        if not np.all(np.isfinite(a)):
            raise MatrixFileError(f"field 'matrices[{k}]' has a non-finite entry")
        out.append(a)
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            raise MatrixFileError("field 'labels' must be a list of strings")
        if len(labels) != len(out):
            raise MatrixFileError("field 'labels' must have one entry per matrix")
        if len(set(labels)) != len(labels):
            raise MatrixFileError("field 'labels' must be unique")
    return MatrixSet.from_matrices(out, labels)


def load_input(source: str) -> tuple[str, MatrixSet, str]:
    """Resolve an instance name or a file path to ``(name, set, digest)``."""
    if source in instance_names():
        ms = get_instance(source).matrix_set
        return source, ms, digest(serialize_matrix_set(ms))
    path = Path(source)
    if not path.is_file():
        raise MatrixFileError(f"no such instance or file: {source!r} (instances: {', '.join(instance_names())})")
    text = path.read_text(encoding="utf-8")
    return path.name, parse_matrix_set(text), digest(text)


def digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def tagged(value, status: str) -> dict:
    """A numeric payload field with its certification status."""
    assert status in ("certified", "empirical", "diagnostic")
    if isinstance(value, float) and not math.isfinite(value):
        value = str(value)
    return {"value": value, "status": status}
