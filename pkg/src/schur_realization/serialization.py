"""
Serialization

JSON files for colligations, output pairs, point samples, completion
parameters and Schur functions. Complex scalars are two-element arrays
[re, im] (plain numbers are read as real), matrices are row-major nested
arrays. Floats are written with their shortest round-trip representation,
so reading back a written file reproduces every matrix bit for bit.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Callable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .colligation import BallPoint, Colligation, OperatorTuple, OutputPair, check_distinct
from .exceptions import DimensionMismatch, ParseError
from .kernels import SchurEvaluator
from .numerics import ComplexMatrix
from .worked_examples import example_schur

logger = logging.getLogger(__name__)

_SCHUR_KINDS = ("example33",)


def _read_json(path: str | Path) -> Any:
    """Load a JSON document, reporting the failing line on syntax errors."""
    file_path = Path(path)
    if not file_path.exists():
        raise ParseError(f"File not found: {file_path}", path=str(file_path))
    try:
        with open(file_path) as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(f"{file_path}:{e.lineno}: {e.msg}", path=str(file_path), line=e.lineno) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"{file_path}: not a text file", path=str(file_path)) from e


def parse_complex(value: Any, path: str = "<data>", where: str = "entry") -> complex:
    """
    Read one complex scalar.

    Args:
        value: [re, im] or a real number
        path: File name for error messages
        where: Location inside the document for error messages
    """
    if isinstance(value, bool):
        raise ParseError(f"{path}: {where}: expected a number, got {value!r}", path=path)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(float(value[0]), float(value[1]))
    raise ParseError(f"{path}: {where}: expected [re, im], got {value!r}", path=path)


def parse_matrix(
    value: Any, shape: tuple[int, int] | None = None, path: str = "<data>", name: str = "matrix"
) -> ComplexMatrix:
    """
    Read a row-major nested array of complex entries.

    Raises:
        ParseError: The value is not a list of equally long rows of scalars
        DimensionMismatch: The shape differs from the expected one
    """
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise ParseError(f"{path}: {name} must be a list of rows", path=path)
    widths = {len(row) for row in value}
    if len(widths) > 1:
        raise ParseError(f"{path}: {name} has rows of different lengths {sorted(widths)}", path=path)
    rows = len(value)
    cols = widths.pop() if widths else 0
    if shape is not None and rows == shape[0] and (rows == 0 or shape[1] == 0):
        cols = shape[1]
    m = np.zeros((rows, cols), dtype=np.complex128)
    for i, row in enumerate(value):
        for j, entry in enumerate(row):
            m[i, j] = parse_complex(entry, path, f"{name}[{i}][{j}]")
    if not np.all(np.isfinite(m)):
        raise ParseError(f"{path}: {name} has non-finite entries", path=path)
    if shape is not None and m.shape != tuple(shape):
        raise DimensionMismatch(f"{path}: {name} has shape {m.shape}, expected {tuple(shape)}", blocks=[name])
    return m


def format_matrix(m: ComplexMatrix) -> list[list[list[float]]]:
    """Nested [re, im] rows of a matrix."""
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _mapping(data: Any, path: str, required: Sequence[str]) -> dict[str, Any]:
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object", path=path)
    missing = [key for key in required if key not in data]
    if missing:
        raise ParseError(f"{path}: missing keys: {', '.join(missing)}", path=path)
    return data


def _dimension(data: dict[str, Any], key: str, path: str) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ParseError(f"{path}: {key} must be a non-negative integer, got {value!r}", path=path)
    return value


def _blocks(data: dict[str, Any], key: str, d: int, shape: tuple[int, int], path: str) -> list[ComplexMatrix]:
    value = data[key]
    if not isinstance(value, list):
        raise ParseError(f"{path}: {key} must be a list of {d} matrices", path=path)
    if len(value) != d:
        raise DimensionMismatch(f"{path}: {key} has {len(value)} blocks, expected d={d}", blocks=[key])
    return [parse_matrix(block, shape, path, f"{key}{j + 1}") for j, block in enumerate(value)]


def pair_from_dict(data: Any, path: str = "<data>") -> OutputPair:
    """Build an OutputPair from {d, dimX, dimY, A, C}."""
    data = _mapping(data, path, ("d", "dimX", "dimY", "A", "C"))
    d = _dimension(data, "d", path)
    dim_x = _dimension(data, "dimX", path)
    dim_y = _dimension(data, "dimY", path)
    if d < 1:
        raise ParseError(f"{path}: d must be at least 1", path=path)
    a = _blocks(data, "A", d, (dim_x, dim_x), path)
    c = parse_matrix(data["C"], (dim_y, dim_x), path, "C")
    return OutputPair(c, OperatorTuple(tuple(a)))


def colligation_from_dict(data: Any, path: str = "<data>") -> Colligation:
    """Build a Colligation from {d, dimX, dimU, dimY, A, B, C, D}."""
    data = _mapping(data, path, ("d", "dimX", "dimU", "dimY", "A", "B", "C", "D"))
    pair = pair_from_dict(data, path)
    dim_u = _dimension(data, "dimU", path)
    b = _blocks(data, "B", pair.d, (pair.dim_x, dim_u), path)
    dd = parse_matrix(data["D"], (pair.dim_y, dim_u), path, "D")
    return Colligation(pair.A, tuple(b), pair.C, dd)


def colligation_to_dict(c: Colligation) -> dict[str, Any]:
    """The file representation of a colligation."""
    return {
        "d": c.d,
        "dimX": c.dim_x,
        "dimU": c.dim_u,
        "dimY": c.dim_y,
        "A": [format_matrix(a) for a in c.A.blocks],
        "B": [format_matrix(b) for b in c.B],
        "C": format_matrix(c.C),
        "D": format_matrix(c.D),
    }


def pair_to_dict(p: OutputPair) -> dict[str, Any]:
    """The file representation of an output pair."""
    return {
        "d": p.d,
        "dimX": p.dim_x,
        "dimY": p.dim_y,
        "A": [format_matrix(a) for a in p.A.blocks],
        "C": format_matrix(p.C),
    }


def load_colligation(path: str | Path) -> Colligation:
    """Read a colligation file."""
    colligation = colligation_from_dict(_read_json(path), str(path))
    logger.debug(f"Loaded colligation from {path}: {colligation.to_dict()}")
    return colligation


def load_pair(path: str | Path) -> OutputPair:
    """Read a pair file; colligation files are accepted and their B, D ignored."""
    return pair_from_dict(_read_json(path), str(path))


def load_points(path: str | Path, d: int | None = None) -> list[BallPoint]:
    """
    Read a list of points of the open ball.

    Raises:
        ParseError: The file is not a list of equally long complex vectors
        DimensionMismatch: The points do not lie in C^d
        OutsideBall: A point has norm at least 1
        DuplicatePoints: Two points coincide
    """
    path_name = str(path)
    data = _read_json(path)
    if not isinstance(data, list) or not data:
        raise ParseError(f"{path_name}: expected a non-empty list of points", path=path_name)
    points = []
    for i, item in enumerate(data):
        if not isinstance(item, list) or not item:
            raise ParseError(f"{path_name}: point {i} must be a non-empty list", path=path_name)
        coords = [parse_complex(z, path_name, f"point[{i}][{j}]") for j, z in enumerate(item)]
        if d is not None and len(coords) != d:
            raise DimensionMismatch(f"{path_name}: point {i} has {len(coords)} coordinates, expected {d}")
        points.append(BallPoint(tuple(coords)))
    if len({p.d for p in points}) > 1:
        raise DimensionMismatch(f"{path_name}: points of different dimensions")
    check_distinct(points)
    return points


def load_parameter(path: str | Path, key: str = "Q") -> ComplexMatrix:
    """Read a matrix stored under a single key, e.g. {"Q": [[...]]}."""
    path_name = str(path)
    data = _mapping(_read_json(path), path_name, (key,))
    return parse_matrix(data[key], None, path_name, key)


def load_schur(path: str | Path) -> SchurEvaluator:
    """
    Read a Schur function: a colligation file, or {"kind": "example33"} for the closed form.
    """
    path_name = str(path)
    data = _read_json(path)
    if isinstance(data, dict) and "kind" in data:
        if data["kind"] not in _SCHUR_KINDS:
            raise ParseError(
                f"{path_name}: unknown kind {data['kind']!r}, expected one of {_SCHUR_KINDS}", path=path_name
            )
        return example_schur()
    return SchurEvaluator.from_colligation(colligation_from_dict(data, path_name))


_LOADERS: dict[str, Callable[[Path], Any]] = {
    "colligation": load_colligation,
    "pair": load_pair,
    "other_pair": load_pair,
    "s": load_schur,
    "points": load_points,
    "q": load_parameter,
    "isometry": lambda path: load_parameter(path, key="G"),
}


def parse_inputs(paths: Mapping[str, str | Path]) -> dict[str, Any]:
    """
    Read every input file of a job by its role.

    Args:
        paths: Mapping of role (colligation, pair, other_pair, s, points, q, isometry) to file

    Returns:
        Mapping of role to the parsed object

    Raises:
        ParseError: Unknown role or malformed file
        DimensionMismatch: A block has the wrong shape
    """
    parsed = {}
    for role, path in paths.items():
        if role not in _LOADERS:
            raise ParseError(f"{path}: unknown input role {role!r}", path=str(path))
        parsed[role] = _LOADERS[role](Path(path))
    return parsed


def dump_colligation(c: Colligation, path: str | Path) -> Path:
    """Write a colligation file, creating parent directories as needed."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        json.dump(colligation_to_dict(c), f, indent=2)
        f.write("\n")
    logger.info(f"Wrote colligation to {out}")
    return out


def dump_pair(p: OutputPair, path: str | Path) -> Path:
    """Write a pair file."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        json.dump(pair_to_dict(p), f, indent=2)
        f.write("\n")
    return out
