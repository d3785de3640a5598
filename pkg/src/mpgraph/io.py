"""Matrix, edge-list and manifest files.

Matrix formats
--------------
``csv``
    Comma separated, one observation per row. A first line that does not
    parse as numbers is taken as a header and skipped.
``f64bin``
    16-byte header (magic ``b"MPGX"``, little-endian uint32 ``N`` and ``M``,
    4 zero bytes) followed by ``N * M`` little-endian float64 values in
    row-major order.

Edge lists are tab-separated ``i, j, value`` rows with 1-based indices,
sorted by ``(i, j)``.
"""

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import MatrixParseError

__all__ = [
    "FORMATS",
    "MAGIC",
    "parse_matrix",
    "write_matrix",
    "write_edge_list",
    "read_edge_list",
    "write_manifest",
    "file_digest",
]

FORMATS = ("csv", "f64bin")
MAGIC = b"MPGX"
_HEADER = struct.Struct("<4sII4x")


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _parse_csv(path):
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or all(not c.strip() for c in record):
                continue
            if lineno == 1 and not all(_is_number(c) for c in record):
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise MatrixParseError(
                    f"{path}: line {lineno} has {len(record)} fields, expected {width}"
                )
            values = []
            for col, cell in enumerate(record, start=1):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise MatrixParseError(
                        f"{path}: line {lineno}, column {col}: {cell!r} is not a number"
                    ) from None
            rows.append(values)
    if not rows:
        raise MatrixParseError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _parse_f64bin(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise MatrixParseError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, N, M = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise MatrixParseError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = _HEADER.size + 8 * N * M
    if len(raw) != expected:
        raise MatrixParseError(
            f"{path}: expected {expected} bytes for a {N} x {M} matrix, found {len(raw)}"
        )
    return np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(N, M).astype(float)


def parse_matrix(path, fmt="csv"):
    """Read an ``N x M`` data matrix."""
    if fmt == "csv":
        return _parse_csv(path)
    if fmt == "f64bin":
        return _parse_f64bin(path)
    raise ValueError(f"unknown matrix format {fmt!r}; expected one of {FORMATS}")


def write_matrix(path, X, fmt="csv"):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            for row in X:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    elif fmt == "f64bin":
        N, M = X.shape
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, N, M))
            fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown matrix format {fmt!r}; expected one of {FORMATS}")


def write_edge_list(path, edges, values=None, fmt="{:.6f}"):
    """Write 0-based ``edges`` as 1-based TSV rows; ``values`` is indexed ``[i, j]``."""
    lines = []
    for i, j in sorted((min(e), max(e)) for e in edges):
        fields = [str(i + 1), str(j + 1)]
        if values is not None:
            fields.append(fmt.format(values[i, j]))
        lines.append("\t".join(fields))
    Path(path).write_text("".join(line + "\n" for line in lines))


def read_edge_list(path):
    """Read a TSV edge list back into 0-based ``(i, j)`` pairs."""
    edges = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        try:
            edges.append((int(parts[0]) - 1, int(parts[1]) - 1))
        except (IndexError, ValueError):
            raise MatrixParseError(f"{path}: line {lineno} is not an edge row") from None
    return edges


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
