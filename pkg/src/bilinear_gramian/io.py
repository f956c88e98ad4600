"""JSON/CSV readers and writers for systems, libraries, inputs and reports."""

import csv
import io
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import InputError, ShapeError
from .selection import ActuatorLibrary
from .system import BilinearSystem

JSON_DIGITS = 17
CSV_DIGITS = 12


def fixture_path(name):
    """Path of a bundled fixture file (``example3.json``, ``example4_library.json``, ...)."""
    return Path(str(resources.files("bilinear_gramian") / "fixtures" / name))


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _matrix(value, shape, name):
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} is not numeric: {exc}") from exc
    if arr.shape != shape:
        raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def system_from_dict(d):
    try:
        n, m = int(d["n"]), int(d["m"])
        A = _matrix(d["A"], (n, n), "A")
        F = d["F"]
        if len(F) != m:
            raise ShapeError(f"F lists {len(F)} matrices, expected {m}")
        F = tuple(_matrix(Fj, (n, n), f"F[{j}]") for j, Fj in enumerate(F))
        B = _matrix(d["B"], (n, m), "B")
    except KeyError as exc:
        raise InputError(f"system is missing field {exc}") from None
    except TypeError as exc:
        raise InputError(f"malformed system: {exc}") from None
    return BilinearSystem(A, F, B)


def system_to_dict(sys):
    return {
        "n": sys.n,
        "m": sys.m,
        "A": sys.A.tolist(),
        "F": [Fj.tolist() for Fj in sys.F],
        "B": sys.B.tolist(),
    }


def load_system(path):
    return system_from_dict(_read_json(path))


def library_from_dict(d):
    try:
        A = np.array(d["A"], dtype=float)
        n = A.shape[0]
        A = _matrix(d["A"], (n, n), "A")
        cands = d["candidates"]
        F = tuple(_matrix(c["F"], (n, n), f"candidates[{i}].F") for i, c in enumerate(cands))
        b = tuple(_matrix(c["B"], (n,), f"candidates[{i}].B") for i, c in enumerate(cands))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise InputError(f"malformed library: {exc}") from None
    if not F:
        raise InputError("library has no candidates")
    return ActuatorLibrary(A, F, b)


def library_to_dict(lib):
    return {
        "A": lib.A.tolist(),
        "candidates": [{"F": Fi.tolist(), "B": bi.tolist()} for Fi, bi in zip(lib.F, lib.b)],
    }


def load_library(path):
    return library_from_dict(_read_json(path))


def _fmt(x, digits):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, f".{digits}g")


def dumps(obj, indent=2, digits=JSON_DIGITS):
    """JSON with floats written to ``digits`` significant digits and inf as the string "inf"."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None:
            return "null"
        if isinstance(o, (bool, np.bool_)):
            return "true" if o else "false"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _fmt(o, digits)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, np.ndarray):
            o = o.tolist()
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0) + "\n"


def read_inputs_csv(path, m):
    """Input sequence CSV: header ``u1,...,um`` then K rows."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if header != [f"u{j}" for j in range(1, m + 1)]:
        raise InputError(f"expected header {','.join(f'u{j}' for j in range(1, m + 1))}, got {','.join(header)}")
    try:
        U = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputError(f"non-numeric input in {path}: {exc}") from exc
    if U.size == 0:
        return np.zeros((0, m))
    if U.ndim != 2 or U.shape[1] != m or not np.all(np.isfinite(U)):
        raise InputError(f"inputs must be finite with {m} columns")
    return U


def write_inputs_csv(path, U):
    U = np.atleast_2d(np.asarray(U, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(f"u{j}" for j in range(1, U.shape[1] + 1)) + "\n")
        for row in U:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def to_csv(header, rows, digits=CSV_DIGITS):
    """CSV text; floats get ``digits`` significant digits, None becomes empty."""
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("")
            elif isinstance(v, (bool, np.bool_)):
                cells.append("true" if v else "false")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, str):
                cells.append(v)
            else:
                cells.append(format(float(v), f".{digits}g"))
        out.write(",".join(cells) + "\n")
    return out.getvalue()
