"""
MatrixMarket and headerless CSV readers and writers.

Only real (or integer/pattern) general and symmetric matrices are supported;
coordinate files are densified. Values are written with ``repr`` so a
save/load round trip is exact.
"""
import csv
from pathlib import Path

import numpy as np

from .dense_core import as_matrix
from .errors import InvalidInputError


class MatrixFormatError(InvalidInputError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def _parse_float(text, path, lineno):
    try:
        value = float(text)
    except ValueError:
        raise MatrixFormatError(path, lineno, f"cannot parse {text!r} as a number") from None
    if not np.isfinite(value):
        raise MatrixFormatError(path, lineno, f"non-finite entry {text!r}")
    return value


def _parse_int(text, path, lineno):
    try:
        return int(text)
    except ValueError:
        raise MatrixFormatError(path, lineno, f"expected an integer, got {text!r}") from None


def _read_matrix_market(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise MatrixFormatError(path, 1, "missing %%MatrixMarket header")
    header = lines[0].lower().split()
    if len(header) != 5 or header[1] != "matrix":
        raise MatrixFormatError(path, 1, "malformed header")
    layout, field, symmetry = header[2], header[3], header[4]
    if layout not in ("array", "coordinate"):
        raise MatrixFormatError(path, 1, f"unsupported layout {layout!r}")
    if field not in ("real", "double", "integer", "pattern"):
        raise MatrixFormatError(path, 1, f"unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise MatrixFormatError(path, 1, f"unsupported symmetry {symmetry!r}")
    if field == "pattern" and layout == "array":
        raise MatrixFormatError(path, 1, "pattern field needs coordinate layout")

    body = [(i + 1, ln.split()) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixFormatError(path, len(lines), "missing size line")
    size_line, size = body[0]
    want = 2 if layout == "array" else 3
    if len(size) != want:
        raise MatrixFormatError(path, size_line, f"size line needs {want} integers")
    dims = [_parse_int(t, path, size_line) for t in size]
    m, n = dims[0], dims[1]
    if m < 1 or n < 1:
        raise MatrixFormatError(path, size_line, "matrix dimensions must be positive")
    entries = body[1:]
    a = np.zeros((m, n))

    if layout == "array":
        if symmetry == "symmetric":
            slots = [(i, j) for j in range(n) for i in range(j, m)]
        else:
            slots = [(i, j) for j in range(n) for i in range(m)]
        if len(entries) != len(slots):
            lineno = entries[-1][0] if entries else size_line
            raise MatrixFormatError(path, lineno, f"expected {len(slots)} entries, found {len(entries)}")
        for (lineno, tokens), (i, j) in zip(entries, slots):
            if len(tokens) != 1:
                raise MatrixFormatError(path, lineno, "array entries hold one value per line")
            a[i, j] = _parse_float(tokens[0], path, lineno)
            if symmetry == "symmetric":
                a[j, i] = a[i, j]
        return a

    nnz = dims[2]
    if len(entries) != nnz:
        lineno = entries[-1][0] if entries else size_line
        raise MatrixFormatError(path, lineno, f"expected {nnz} entries, found {len(entries)}")
    per_line = 2 if field == "pattern" else 3
    for lineno, tokens in entries:
        if len(tokens) != per_line:
            raise MatrixFormatError(path, lineno, f"coordinate entries need {per_line} fields")
        i, j = _parse_int(tokens[0], path, lineno), _parse_int(tokens[1], path, lineno)
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixFormatError(path, lineno, f"index ({i}, {j}) outside {m}x{n}")
        value = 1.0 if field == "pattern" else _parse_float(tokens[2], path, lineno)
        a[i - 1, j - 1] += value
        if symmetry == "symmetric" and i != j:
            a[j - 1, i - 1] += value
    return a


def _read_csv(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            values = [_parse_float(cell.strip(), path, lineno) for cell in record]
            if rows and len(values) != len(rows[0]):
                raise MatrixFormatError(path, lineno, f"expected {len(rows[0])} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise MatrixFormatError(path, 1, "no data")
    return np.array(rows)


def load_matrix(path, fmt=None):
    """Read a dense matrix from a MatrixMarket (``mm``) or headerless CSV (``csv``) file.

    ``fmt`` defaults to the file extension (``.csv`` means CSV, anything
    else MatrixMarket).
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "mm")
    try:
        if fmt == "mm":
            return as_matrix(_read_matrix_market(path))
        if fmt == "csv":
            return as_matrix(_read_csv(path))
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from exc
    raise InvalidInputError(f"unknown matrix format {fmt!r}")


def save_matrix(path, a, fmt=None):
    path = Path(path)
    a = as_matrix(a)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "mm")
    if fmt == "mm":
        lines = ["%%MatrixMarket matrix array real general", f"{a.shape[0]} {a.shape[1]}"]
        lines += [repr(float(v)) for v in a.T.reshape(-1)]
    elif fmt == "csv":
        lines = [",".join(repr(float(v)) for v in row) for row in a]
    else:
        raise InvalidInputError(f"unknown matrix format {fmt!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
