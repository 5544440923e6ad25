"""Matrix JSON: ``{"n": int, "entries": [[[re, im], ...], ...]}``, row-major."""

from __future__ import annotations

import json
import math

import numpy as np

from .linalg import MatrixValueError, as_matrix

__all__ = ["dumps_line", "load_instance", "matrix_from_json", "matrix_to_json", "sanitize"]


def matrix_to_json(m) -> dict:
    a = as_matrix(m)
    return {
        "n": a.shape[0],
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in a],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Parse matrix JSON, rejecting non-square, malformed or non-finite input."""
    if not isinstance(obj, dict) or "n" not in obj or "entries" not in obj:
        raise MatrixValueError('matrix JSON must be an object with "n" and "entries"')
    n = obj["n"]
    rows = obj["entries"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise MatrixValueError(f"bad dimension {n!r}")
    if not isinstance(rows, list) or len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
        raise MatrixValueError(f"entries are not an {n}x{n} array")
    out = np.empty((n, n), dtype=np.complex128)
    for i, row in enumerate(rows):
        for j, pair in enumerate(row):
            if (not isinstance(pair, list) or len(pair) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
                raise MatrixValueError(f"entry ({i}, {j}) is not a [re, im] pair")
            re, im = float(pair[0]), float(pair[1])
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixValueError(f"entry ({i}, {j}) is not finite")
            out[i, j] = complex(re, im)
    return out


def sanitize(obj):
    """Replace non-finite floats by None and numpy scalars by Python ones, recursively."""
    if isinstance(obj, dict):
        return {k: sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def dumps_line(obj) -> str:
    return json.dumps(sanitize(obj), allow_nan=False, separators=(",", ":"))


def load_instance(path) -> dict[str, np.ndarray]:
    """Read ``{name: matrix-json}`` from a file.

    A search record (an object with an ``"instance"`` key) is accepted too.
    """
    with open(path) as fh:
        obj = json.load(fh)
    if isinstance(obj, dict) and "instance" in obj:
        obj = obj["instance"]
    if not isinstance(obj, dict):
        raise MatrixValueError("instance file must hold a JSON object of named matrices")
    return {k: matrix_from_json(v) for k, v in obj.items()}
