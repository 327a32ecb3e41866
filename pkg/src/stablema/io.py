"""CSV serialisation of paths, fields, estimates and Monte Carlo reports.

Numbers are written with 17 significant digits so that a write/read cycle
reproduces every float exactly.  Metadata travels in ``#``-prefixed lines of
``key=value`` tokens.
"""

from __future__ import annotations

import csv
import shlex
from pathlib import Path

import numpy as np

from .simulate import SampledField, SampledPath


def fmt(x) -> str:
    return format(float(x), ".17g")


def _meta_tokens(meta: dict) -> str:
    return " ".join(f"{k}={shlex.quote(str(v)) if ' ' in str(v) else v}" for k, v in meta.items())


def parse_meta_line(line: str) -> dict:
    out = {}
    for tok in shlex.split(line.lstrip("#").strip()):
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    return out


def _open_for_write(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _read_lines(path):
    path = Path(path)
    try:
        return path.read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def write_path_csv(obj, path, seed=None) -> Path:
    """Write a path or field: one header line, then one value per line (row-major)."""
    meta = obj.meta
    header = {
        "n": obj.n,
        "delta": fmt(obj.delta),
        "alpha": "nan" if obj.alpha is None else fmt(obj.alpha),
        "kernel": meta.get("kernel", "unknown"),
        "seed": meta.get("seed", seed if seed is not None else "none"),
    }
    if isinstance(obj, SampledField):
        header["dim"] = 2
    with _open_for_write(path) as fh:
        fh.write("# " + _meta_tokens(header) + "\n")
        for v in obj.values.ravel():
            fh.write(fmt(v) + "\n")
    return Path(path)


def read_path_csv(path):
    lines = _read_lines(path)
    meta = {}
    vals = []
    for line in lines:
        if line.startswith("#"):
            meta.update(parse_meta_line(line))
        elif line.strip():
            vals.append(float(line))
    if "n" not in meta or "delta" not in meta:
        raise ValueError(f"{path}: missing n/delta header")
    n = int(meta["n"])
    alpha = float(meta.get("alpha", "nan"))
    alpha = None if np.isnan(alpha) else alpha
    info = {"kernel": meta.get("kernel", "unknown"), "seed": meta.get("seed", "none")}
    arr = np.array(vals)
    if meta.get("dim") == "2":
        return SampledField(arr.reshape(n, n), float(meta["delta"]), alpha, info)
    if arr.size != n:
        raise ValueError(f"{path}: header says n={n} but found {arr.size} values")
    return SampledPath(arr, float(meta["delta"]), alpha, info)


def write_table(path, columns: dict, meta_lines=()) -> Path:
    """Write equal-length numeric columns with ``#`` metadata lines first."""
    names = list(columns)
    cols = [np.asarray(columns[k], dtype=float).ravel() for k in names]
    with _open_for_write(path) as fh:
        for line in meta_lines:
            fh.write("# " + line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*cols):
            writer.writerow([fmt(v) for v in row])
    return Path(path)


def read_table(path):
    """Return ``(meta_lines, columns)`` from a file written by :func:`write_table`."""
    meta, rows, names = [], [], None
    for line in _read_lines(path):
        if line.startswith("#"):
            meta.append(line[1:].strip())
        elif names is None:
            names = next(csv.reader([line]))
        elif line.strip():
            rows.append([float(v) for v in next(csv.reader([line]))])
    names = names or []
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return meta, {k: data[:, i] for i, k in enumerate(names)}
