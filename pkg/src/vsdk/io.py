"""File formats: headed CSV tables, PGM images and JSON reports.

CSV files store one point per line with 17 significant digits, which makes
a write/read cycle exact for doubles. PGM output is 8-bit and meant for
viewing only; the affine display range is kept in a comment line.
"""
import json
import math
import os
import tempfile

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "CSV_HEADERS",
    "atomic_write",
    "write_table",
    "read_table",
    "write_nodes",
    "read_nodes",
    "write_data",
    "read_data",
    "write_values",
    "read_values",
    "write_labels",
    "read_labels",
    "write_pgm",
    "read_pgm",
    "write_json",
    "read_json",
]

CSV_HEADERS = {
    "nodes": ("x", "y"),
    "data": ("x", "y", "f"),
    "values": ("x", "y", "v"),
    "labels": ("x", "y", "z"),
}


def atomic_write(path, payload, mode="w"):
    """Write ``payload`` to a temporary file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    return repr(int(v)) if isinstance(v, (int, np.integer)) else "%.17g" % v


def write_table(path, columns, header):
    columns = [np.asarray(c).reshape(-1) for c in columns]
    if len(columns) != len(header):
        raise ValueError("one column per header field expected")
    if any(len(c) != len(columns[0]) for c in columns):
        raise ValueError("columns differ in length")
    for name, col in zip(header, columns):
        if col.dtype.kind == "f" and not np.all(np.isfinite(col)):
            raise ValidationError(f"column {name!r} contains non-finite values")
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write(path, "\n".join(lines) + "\n")


def read_table(path, header):
    """Read a CSV written by :func:`write_table`; returns a float array (rows, cols)."""
    path = os.fspath(path)
    with open(path) as fh:
        lines = fh.read().split("\n")
    if not lines or lines[0].strip() != ",".join(header):
        found = lines[0].strip() if lines else ""
        raise ParseError(f"{path}:1: expected header {','.join(header)!r}, found {found!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, found {len(fields)}")
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"{path}:{lineno}: not a number in {line!r}") from None
        if not all(math.isfinite(v) for v in row):
            raise ValidationError(f"{path}:{lineno}: non-finite value")
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, len(header))


def write_nodes(path, nodes):
    nodes = np.asarray(nodes, dtype=float)
    write_table(path, [nodes[:, 0], nodes[:, 1]], CSV_HEADERS["nodes"])


def read_nodes(path):
    return read_table(path, CSV_HEADERS["nodes"])


def write_data(path, nodes, values):
    nodes = np.asarray(nodes, dtype=float)
    write_table(path, [nodes[:, 0], nodes[:, 1], np.asarray(values, dtype=float)], CSV_HEADERS["data"])


def read_data(path):
    """Return ``(nodes, values)`` from an ``x,y,f`` file."""
    table = read_table(path, CSV_HEADERS["data"])
    return table[:, :2], table[:, 2]


def write_values(path, points, values):
    points = np.asarray(points, dtype=float)
    write_table(path, [points[:, 0], points[:, 1], np.asarray(values, dtype=float)], CSV_HEADERS["values"])


def read_values(path):
    table = read_table(path, CSV_HEADERS["values"])
    return table[:, :2], table[:, 2]


def write_labels(path, nodes, labels):
    nodes = np.asarray(nodes, dtype=float)
    labels = np.asarray(labels)
    if np.any(labels != np.round(labels)):
        raise ValidationError("labels must be integers")
    write_table(path, [nodes[:, 0], nodes[:, 1], labels.astype(np.int64)], CSV_HEADERS["labels"])


def read_labels(path):
    table = read_table(path, CSV_HEADERS["labels"])
    if np.any(table[:, 2] != np.round(table[:, 2])):
        raise ValidationError(f"{os.fspath(path)}: non-integer label")
    return table[:, :2], table[:, 2].astype(int)


def write_pgm(path, image, binary=True, vmin=None, vmax=None):
    """Write a 2-D array as an 8-bit PGM (P5 binary or P2 ASCII).

    Row 0 of ``image`` becomes the top row of the picture. Values are mapped
    affinely from ``[vmin, vmax]`` (default: data range) onto 0..255.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    if not np.all(np.isfinite(image)):
        raise ValidationError("image contains non-finite values")
    lo = float(image.min()) if vmin is None else float(vmin)
    hi = float(image.max()) if vmax is None else float(vmax)
    span = hi - lo
    scaled = np.zeros_like(image) if span == 0 else (np.clip(image, lo, hi) - lo) / span * 255.0
    pixels = np.rint(scaled).astype(np.uint8)
    height, width = pixels.shape
    header = f"{'P5' if binary else 'P2'}\n# range min={lo!r} max={hi!r}\n{width} {height}\n255\n"
    if binary:
        atomic_write(path, header.encode("ascii") + pixels.tobytes(), mode="wb")
    else:
        body = "\n".join(" ".join(str(p) for p in row) for row in pixels)
        atomic_write(path, header + body + "\n")


def _pgm_tokens(data):
    """Yield (token, end offset) pairs of the header, skipping comments."""
    pos = 0
    while pos < len(data):
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace():
                pos += 1
            yield data[start:pos], pos


def read_pgm(path):
    """Return ``(pixels, (vmin, vmax) or None)`` from a P2 or P5 file."""
    with open(path, "rb") as fh:
        data = fh.read()
    display = None
    for line in data.split(b"\n")[:4]:
        if line.startswith(b"# range"):
            parts = dict(p.split(b"=") for p in line.split()[2:])
            display = (float(parts[b"min"]), float(parts[b"max"]))
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError):
        raise ParseError(f"{os.fspath(path)}: truncated or malformed PGM header") from None
    if magic == b"P5":
        raw = data[end + 1:end + 1 + width * height]
        if len(raw) != width * height:
            raise ParseError(f"{os.fspath(path)}: expected {width * height} pixel bytes, found {len(raw)}")
        pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    elif magic == b"P2":
        values = data[end:].split()
        if len(values) != width * height:
            raise ParseError(f"{os.fspath(path)}: expected {width * height} pixels, found {len(values)}")
        pixels = np.array([int(v) for v in values], dtype=np.int64).reshape(height, width)
    else:
        raise ParseError(f"{os.fspath(path)}:1: unsupported magic {magic!r}")
    if pixels.max(initial=0) > maxval:
        raise ValidationError(f"{os.fspath(path)}: pixel exceeds maxval {maxval}")
    return pixels, display


def _check_finite(obj, where="$"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValidationError(f"non-finite number at {where}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, payload):
    payload = json.loads(json.dumps(payload, default=_jsonable))
    _check_finite(payload)
    atomic_write(path, json.dumps(payload, indent=2, allow_nan=False) + "\n")


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{os.fspath(path)}:{exc.lineno}: {exc.msg}") from None
