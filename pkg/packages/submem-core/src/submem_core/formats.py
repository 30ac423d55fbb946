"""Plain-text matrix and vector files.

Three formats, each starting with a header line:

- ``dense <rows> <cols>`` followed by one whitespace-separated row per line;
- ``vec <n>`` followed by the values, whitespace or newline separated;
- ``sparse <m> <n> <d>`` followed by one ``<row> <col> <weight>`` line per stored entry,
  zero-indexed.

Reals are written with 17 significant digits so a write/read cycle is exact.
"""

from pathlib import Path

import numpy as np
import numpy.typing as npt

from submem_core.errors import FormatError, ReportWriteError
from submem_core.model import SparseConstraintMatrix
from submem_core.types import DenseMatrix, Vector, as_dense, as_vector

__all__ = (
    "dumps_dense",
    "dumps_sparse",
    "dumps_vector",
    "loads_dense",
    "loads_sparse",
    "loads_vector",
    "read_dense",
    "read_sparse",
    "read_vector",
    "write_dense",
    "write_sparse",
    "write_vector",
)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _header(lines: list[str], keyword: str, arity: int) -> list[int]:
    if not lines:
        raise FormatError(f"missing '{keyword}' header")
    head = lines[0].split()
    if len(head) != arity + 1 or head[0] != keyword:
        raise FormatError(f"expected header '{keyword}' with {arity} sizes, got {lines[0]!r}")
    try:
        sizes = [int(token) for token in head[1:]]
    except ValueError as e:
        raise FormatError(f"non-integer size in header {lines[0]!r}") from e
    if any(size < 0 for size in sizes):
        raise FormatError(f"negative size in header {lines[0]!r}")
    return sizes


def _floats(tokens: list[str], where: str) -> Vector:
    try:
        values = np.array([float(token) for token in tokens], dtype=np.float64)
    except ValueError as e:
        raise FormatError(f"bad number in {where}") from e
    if not np.all(np.isfinite(values)):
        raise FormatError(f"non-finite value in {where}")
    return values


def _content_lines(text: str) -> list[str]:
    return [line for line in text.splitlines() if line.strip()]


def dumps_dense(matrix: npt.ArrayLike) -> str:
    arr = as_dense(matrix)
    rows = [" ".join(_fmt(v) for v in row) for row in arr]
    return "\n".join([f"dense {arr.shape[0]} {arr.shape[1]}", *rows]) + "\n"


def loads_dense(text: str) -> DenseMatrix:
    lines = _content_lines(text)
    rows, cols = _header(lines, "dense", 2)
    body = lines[1:]
    if len(body) != rows:
        raise FormatError(f"dense header promises {rows} rows, found {len(body)}")
    out = np.zeros((rows, cols))
    for k, line in enumerate(body):
        values = _floats(line.split(), f"row {k}")
        if values.size != cols:
            raise FormatError(f"row {k} has {values.size} values, expected {cols}")
        out[k] = values
    return out


def dumps_vector(vector: npt.ArrayLike) -> str:
    vec = as_vector(vector)
    return f"vec {vec.size}\n" + "\n".join(_fmt(v) for v in vec) + ("\n" if vec.size else "")


def loads_vector(text: str) -> Vector:
    lines = _content_lines(text)
    (n,) = _header(lines, "vec", 1)
    values = _floats(" ".join(lines[1:]).split(), "vector body")
    if values.size != n:
        raise FormatError(f"vec header promises {n} values, found {values.size}")
    return values


def dumps_sparse(B: SparseConstraintMatrix) -> str:  # noqa: N803
    entries = [f"{row} {col} {_fmt(weight)}" for row, col, weight in B.entries()]
    return "\n".join([f"sparse {B.m} {B.n} {B.d}", *entries]) + "\n"


def loads_sparse(text: str) -> SparseConstraintMatrix:
    lines = _content_lines(text)
    m, n, d = _header(lines, "sparse", 3)
    rows: list[int] = []
    cols: list[int] = []
    weights: list[float] = []
    for k, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"line {k}: expected '<row> <col> <weight>', got {line!r}")
        try:
            row, col = int(parts[0]), int(parts[1])
        except ValueError as e:
            raise FormatError(f"line {k}: non-integer index in {line!r}") from e
        if not (0 <= row < m and 0 <= col < n):
            raise FormatError(f"line {k}: index ({row}, {col}) outside {m}x{n}")
        rows.append(row)
        cols.append(col)
        weights.append(float(_floats([parts[2]], f"line {k}")[0]))
    try:
        return SparseConstraintMatrix.from_entries(m, n, d, rows, cols, weights)
    except ValueError as e:
        raise FormatError(f"invalid sparse matrix: {e}") from e


def _read(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e.strerror or e}") from e


def _write(path: Path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as e:
        raise ReportWriteError(f"cannot write {path}: {e.strerror or e}") from e


def read_dense(path: Path) -> DenseMatrix:
    return loads_dense(_read(path))


def write_dense(path: Path, matrix: npt.ArrayLike) -> None:
    _write(path, dumps_dense(matrix))


def read_vector(path: Path) -> Vector:
    return loads_vector(_read(path))


def write_vector(path: Path, vector: npt.ArrayLike) -> None:
    _write(path, dumps_vector(vector))


def read_sparse(path: Path) -> SparseConstraintMatrix:
    return loads_sparse(_read(path))


def write_sparse(path: Path, B: SparseConstraintMatrix) -> None:  # noqa: N803
    _write(path, dumps_sparse(B))
