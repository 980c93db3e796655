"""Deterministic table and summary writers.

Floats are written with 17 significant digits so a CSV round-trips to the
exact binary value. Tables are written in row order only; no timestamps.
"""
import json
import math
from pathlib import Path

import numpy as np


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _json_value(value):
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_json_value(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path, payload):
    path = Path(path)
    path.write_text(json.dumps(_json_value(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_table(directory, stem, header, rows, fmt="csv"):
    """Write ``stem.csv`` or ``stem.json`` (list of records) under ``directory``."""
    directory = Path(directory)
    if fmt == "json":
        records = [dict(zip(header, row)) for row in rows]
        return write_json(directory / f"{stem}.json", records)
    return write_csv(directory / f"{stem}.csv", header, rows)


def read_csv(path):
    """Header and float rows of a CSV written by :func:`write_csv`."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, np.array(rows) if rows else np.empty((0, len(header)))


def crystal_rows(crystal):
    return [(i, x, y) for i, (x, y) in enumerate(crystal.positions)]


def mode_rows(spectrum):
    return [(m, w) for m, w in enumerate(spectrum.frequencies)]


def eigenvector_table(spectrum):
    n = spectrum.n
    header = ["ion_index"] + [f"mode_{m}" for m in range(n)]
    rows = [(i, *spectrum.eigenvectors[i]) for i in range(n)]
    return header, rows


def coupling_rows(cm, crystal):
    d = crystal.distances()
    n = crystal.n
    return [(i, j, d[i, j], cm.j[i, j]) for i in range(n) for j in range(i + 1, n)]
